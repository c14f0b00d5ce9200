use super::codes::SparseCodes;
use super::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fraction of zero entries in the `m x |V|` code matrix.
pub fn sparsity_level<T: Scalar>(codes: &SparseCodes<T>, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    if codes.is_empty() {
        return Ok(1.0);
    }
    let cells = (m * codes.len()) as f64;
    Ok(1.0 - codes.nnz() as f64 / cells)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisReport<T> {
    pub norms: Vec<T>,
    /// Fraction of words with a nonzero coefficient on each basis.
    pub frequencies: Vec<f64>,
    /// Pearson correlation of norms and frequencies; 0 when either side
    /// has no variance.
    pub correlation: f64,
}

pub fn basis_statistics<T: Scalar>(
    dict: &Dictionary<T>,
    codes: &SparseCodes<T>,
) -> Result<BasisReport<T>> {
    let m = dict.m();
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    if codes.m() > m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: codes.m(),
        });
    }
    let mut counts = vec![0usize; m];
    for v in codes.vectors() {
        for &i in v.indices() {
            counts[i] += 1;
        }
    }
    let n = codes.len().max(1) as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let norms = dict.column_norms();
    let norms64: Vec<f64> = norms.iter().map(|v| v.as_f64()).collect();
    let correlation = pearson(&norms64, &frequencies);
    Ok(BasisReport {
        norms,
        frequencies,
        correlation,
    })
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    // relative variance floor: SC1 norms are all 1 up to rounding
    let tiny = |s: f64, mean: f64| s <= 1e-20 * (1.0 + mean * mean) * n as f64;
    if tiny(sxx, mx) || tiny(syy, my) {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{SparseVector, Variant};

    fn codes(rows: Vec<Vec<(usize, f64)>>, m: usize) -> SparseCodes<f64> {
        let vocab = (0..rows.len()).map(|i| format!("w{i}")).collect();
        let vecs = rows
            .into_iter()
            .map(|r| SparseVector::from_pairs(r).unwrap())
            .collect();
        SparseCodes::new(vocab, vecs, m).unwrap()
    }

    #[test]
    fn sparsity_examples() {
        let c = codes(vec![(0..10).map(|i| (i * 7, 1.0)).collect()], 1000);
        assert!((sparsity_level(&c, 1000).unwrap() - 0.99).abs() < 1e-15);
        let empty = codes(vec![vec![], vec![]], 5);
        assert_eq!(sparsity_level(&empty, 5).unwrap(), 1.0);
        assert!(sparsity_level(&empty, 0).is_err());
    }

    #[test]
    fn hand_counted_frequencies() {
        // basis 0 used by all four words, basis 1 by two, basis 2 by one
        let c = codes(
            vec![
                vec![(0, 0.5), (1, -0.2), (2, 0.1)],
                vec![(0, 0.3), (1, 0.4)],
                vec![(0, -1.0)],
                vec![(0, 0.2)],
            ],
            3,
        );
        let d = Dictionary::from_columns(
            vec![vec![3.0, 0.0], vec![0.0, 2.0], vec![1.0, 0.0]],
            Variant::Sc3,
            0.1,
            0.0,
        )
        .unwrap();
        let r = basis_statistics(&d, &c).unwrap();
        assert_eq!(r.frequencies, vec![1.0, 0.5, 0.25]);
        assert_eq!(r.norms, vec![3.0, 2.0, 1.0]);
        // centered: x = (1, 0, -1), y = (5, -1, -4)/12; sxy = 3/4, sxx = 2, syy = 7/24
        let expected = 0.75 / (2.0f64 * 7.0 / 24.0).sqrt();
        assert!((r.correlation - expected).abs() < 1e-12);
    }

    #[test]
    fn pearson_degenerate_and_bounds() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[0.1, 0.5, 0.9]), 0.0);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }
}
