use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::codes::{SparseCodes, SparseVector};
use super::dictionary::{Dictionary, Variant};
use super::lasso::{Encoder, LassoSettings};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::scalar::{norm2, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodingConfig<T> {
    pub variant: Variant,
    /// Number of basis vectors.
    pub m: usize,
    pub lambda: T,
    /// Dictionary penalty for `Sc3`/`Sc4`; ignored by `Sc1`.
    pub tau: T,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Early stop once an epoch lowers the objective by less than this
    /// fraction; zero disables.
    pub tolerance: T,
    pub lasso: LassoSettings<T>,
}

impl<T: Scalar> Default for SparseCodingConfig<T> {
    fn default() -> Self {
        SparseCodingConfig {
            variant: Variant::Sc1,
            m: 1024,
            lambda: T::lit(0.1),
            tau: T::lit(1e-5),
            epochs: 10,
            batch_size: 256,
            seed: 42,
            tolerance: T::zero(),
            lasso: LassoSettings::default(),
        }
    }
}

impl<T: Scalar> SparseCodingConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("m must be >= 1".into()));
        }
        if !(self.lambda > T::zero()) {
            return Err(Error::InvalidArgument("lambda must be > 0".into()));
        }
        if !(self.tau >= T::zero()) {
            return Err(Error::InvalidArgument("tau must be >= 0".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument(
                "epochs and batch size must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn effective_tau(&self) -> T {
        match self.variant {
            Variant::Sc1 => T::zero(),
            Variant::Sc3 | Variant::Sc4 => self.tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats<T> {
    pub epoch: usize,
    /// Mean per-word objective plus the dictionary penalty.
    pub objective: T,
    pub max_column_norm: T,
    pub nonzeros: usize,
}

#[derive(Debug, Clone)]
pub struct LearnedDictionary<T> {
    pub dictionary: Dictionary<T>,
    pub codes: SparseCodes<T>,
    pub history: Vec<EpochStats<T>>,
    /// Objective after the closing encoding pass against the final
    /// dictionary.
    pub final_objective: T,
}

/// Full-data objective `(1/n) Σ [½‖x_i − Dα_i‖² + λ‖α_i‖₁] + τ‖D‖²_F`.
pub fn objective<T: Scalar>(
    dict: &Dictionary<T>,
    table: &EmbeddingTable<T>,
    codes: &[SparseVector<T>],
) -> T {
    let tau = match dict.variant {
        Variant::Sc1 => T::zero(),
        _ => dict.tau,
    };
    mean_loss(dict, table, codes, dict.lambda) + tau * dict.frobenius_sq()
}

fn mean_loss<T: Scalar>(
    dict: &Dictionary<T>,
    table: &EmbeddingTable<T>,
    codes: &[SparseVector<T>],
    lambda: T,
) -> T {
    let n = table.len();
    let k = dict.k();
    let per_word: Vec<T> = codes
        .par_iter()
        .enumerate()
        .map(|(i, code)| {
            let mut r = table.row(i).to_vec();
            for (j, a) in code.iter() {
                for (ri, &d) in r.iter_mut().zip(dict.atom(j)) {
                    *ri -= a * d;
                }
            }
            debug_assert_eq!(r.len(), k);
            T::lit(0.5) * r.iter().map(|&v| v * v).sum::<T>() + lambda * code.l1_norm()
        })
        .collect();
    // fixed summation order
    per_word.into_iter().sum::<T>() / T::from_usize(n).unwrap()
}

/// Sufficient statistics `A = Σ α αᵀ` (m x m) and `B = Σ x αᵀ` (k x m,
/// column-major) of the current codes.
struct Statistics<T> {
    m: usize,
    k: usize,
    a: Vec<T>,
    b: Vec<T>,
}

impl<T: Scalar> Statistics<T> {
    fn new(k: usize, m: usize) -> Self {
        Statistics {
            m,
            k,
            a: vec![T::zero(); m * m],
            b: vec![T::zero(); k * m],
        }
    }

    fn accumulate(&mut self, x: &[T], code: &SparseVector<T>, sign: T) {
        let m = self.m;
        for (i, ai) in code.iter() {
            for (j, aj) in code.iter() {
                self.a[i * m + j] += sign * ai * aj;
            }
            let col = &mut self.b[i * self.k..(i + 1) * self.k];
            for (bv, &xv) in col.iter_mut().zip(x) {
                *bv += sign * ai * xv;
            }
        }
    }

    fn rebuild(table: &EmbeddingTable<T>, codes: &[SparseVector<T>], m: usize) -> Self {
        let mut s = Statistics::new(table.dim(), m);
        for (i, c) in codes.iter().enumerate() {
            s.accumulate(table.row(i), c, T::one());
        }
        s
    }
}

/// One block-coordinate pass over the dictionary columns, each an exact
/// minimization of the dictionary objective with the others held fixed.
fn update_dictionary<T: Scalar>(dict: &mut Dictionary<T>, stats: &Statistics<T>, n: usize, tau: T) {
    let (k, m) = (dict.k(), dict.m());
    let ridge = T::lit(2.0) * T::from_usize(n).unwrap() * tau;
    let mut u = vec![T::zero(); k];
    for j in 0..m {
        let ajj = stats.a[j * m + j];
        let denom = match dict.variant {
            Variant::Sc1 => ajj,
            Variant::Sc3 | Variant::Sc4 => ajj + ridge,
        };
        if !(denom > T::zero()) {
            // unused atom with nothing pulling on it
            continue;
        }
        // u = b_j − Σ_{l≠j} d_l A_lj
        u.copy_from_slice(&stats.b[j * k..(j + 1) * k]);
        for l in 0..m {
            let alj = stats.a[l * m + j];
            if l != j && alj != T::zero() {
                for (ui, &d) in u.iter_mut().zip(dict.atom(l)) {
                    *ui -= alj * d;
                }
            }
        }
        let variant = dict.variant;
        let atom = dict.atom_mut(j);
        match variant {
            Variant::Sc1 => {
                let scale = T::one() / ajj;
                u.iter_mut().for_each(|v| *v *= scale);
                let norm = norm2(&u);
                let shrink = if norm > T::one() {
                    T::one() / norm
                } else {
                    T::one()
                };
                for (a, &v) in atom.iter_mut().zip(&u) {
                    *a = v * shrink;
                }
            }
            Variant::Sc3 | Variant::Sc4 => {
                for (a, &v) in atom.iter_mut().zip(&u) {
                    *a = v / denom;
                }
            }
        }
    }
}

fn initial_dictionary<T: Scalar>(
    table: &EmbeddingTable<T>,
    config: &SparseCodingConfig<T>,
    rng: &mut ChaCha8Rng,
) -> Result<Dictionary<T>> {
    let k = table.dim();
    let nonzero_rows: Vec<usize> = (0..table.len())
        .filter(|&i| table.row(i).iter().any(|&v| v != T::zero()))
        .collect();
    let mut columns = Vec::with_capacity(config.m);
    for _ in 0..config.m {
        let mut col: Vec<T> = (0..k)
            .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        if norm2(&col) == T::zero() {
            let pick = nonzero_rows[rng.random_range(0..nonzero_rows.len())];
            col = table.row(pick).to_vec();
        }
        if config.variant == Variant::Sc1 {
            let norm = norm2(&col);
            col.iter_mut().for_each(|v| *v /= norm);
        }
        columns.push(col);
    }
    Dictionary::from_columns(
        columns,
        config.variant,
        config.lambda,
        config.effective_tau(),
    )
}

/// Alternates exact lasso steps over mini-batches with block-coordinate
/// dictionary updates on the sufficient statistics of all current codes.
/// Each step can only lower the full-data objective, so the per-epoch
/// objectives in `history` are non-increasing.
pub fn learn_dictionary<T: Scalar>(
    table: &EmbeddingTable<T>,
    config: &SparseCodingConfig<T>,
) -> Result<LearnedDictionary<T>> {
    config.validate()?;
    let n = table.len();
    if n == 0 || table.rows().all(|r| r.iter().all(|&v| v == T::zero())) {
        return Err(Error::DegenerateInput(
            "all embedding vectors are zero".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut dict = initial_dictionary(table, config, &mut rng)?;
    let nonneg = config.variant.nonnegative_codes();
    let tau = config.effective_tau();
    let lambda = config.lambda;
    let m = config.m;

    let mut codes: Vec<SparseVector<T>> = vec![SparseVector::new(); n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut previous = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut stats = Statistics::rebuild(table, &codes, m);
        for batch in order.chunks(config.batch_size) {
            let mut encoder = Encoder::new(&dict);
            encoder.settings = config.lasso;
            let fresh: Vec<SparseVector<T>> = batch
                .par_iter()
                .map(|&i| {
                    let mut alpha = codes[i].to_dense(m);
                    encoder.descend(table.row(i), lambda, nonneg, &mut alpha);
                    SparseVector::from_dense(&alpha)
                })
                .collect();
            for (&i, code) in batch.iter().zip(fresh) {
                stats.accumulate(table.row(i), &codes[i], -T::one());
                stats.accumulate(table.row(i), &code, T::one());
                codes[i] = code;
            }
            update_dictionary(&mut dict, &stats, n, tau);
        }

        let obj = objective(&dict, table, &codes);
        if !obj.is_finite() || dict.atoms().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                stage: "dictionary learning",
                step: "epoch",
                index: epoch + 1,
            });
        }
        history.push(EpochStats {
            epoch: epoch + 1,
            objective: obj,
            max_column_norm: dict.column_norms().into_iter().fold(T::zero(), T::max),
            nonzeros: codes.iter().map(SparseVector::nnz).sum(),
        });
        if let Some(prev) = previous {
            let prev: T = prev;
            if config.tolerance > T::zero() && prev - obj <= config.tolerance * prev.abs() {
                break;
            }
        }
        previous = Some(obj);
    }

    // closing pass so the codes are exact lasso solutions for the final D
    let mut encoder = Encoder::new(&dict);
    encoder.settings = config.lasso;
    let codes: Vec<SparseVector<T>> = codes
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut alpha = c.to_dense(m);
            encoder.descend(table.row(i), lambda, nonneg, &mut alpha);
            SparseVector::from_dense(&alpha)
        })
        .collect();
    let final_objective = objective(&dict, table, &codes);
    let codes = SparseCodes::new(table.vocab().to_vec(), codes, m)?;
    Ok(LearnedDictionary {
        dictionary: dict,
        codes,
        history,
        final_objective,
    })
}

/// Sparse codes for every word of `table` under a fixed dictionary, using
/// the dictionary's own λ and sign constraint.
pub fn encode<T: Scalar>(
    dict: &Dictionary<T>,
    table: &EmbeddingTable<T>,
) -> Result<SparseCodes<T>> {
    if dict.k() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: dict.k(),
            actual: table.dim(),
        });
    }
    let encoder = Encoder::new(dict);
    let nonneg = dict.variant.nonnegative_codes();
    let vectors = (0..table.len())
        .into_par_iter()
        .map(|i| encoder.solve(table.row(i), dict.lambda, nonneg))
        .collect::<Result<Vec<_>>>()?;
    SparseCodes::new(table.vocab().to_vec(), vectors, dict.m())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::kkt_violation;

    fn random_table(n: usize, k: usize, seed: u64) -> EmbeddingTable<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = (0..n).map(|i| format!("w{i}")).collect();
        let rows = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
                let norm = norm2(&v);
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        EmbeddingTable::from_rows(vocab, rows).unwrap()
    }

    fn config(variant: Variant, m: usize, lambda: f64, epochs: usize) -> SparseCodingConfig<f64> {
        SparseCodingConfig {
            variant,
            m,
            lambda,
            epochs,
            batch_size: 32,
            ..Default::default()
        }
    }

    #[test]
    fn rank_one_data_recovers_direction() {
        // 50 copies of one unit vector; the best single atom is ±v and the
        // code solves a 1-d soft threshold, so the residual is λ·v
        let v = [0.6, 0.0, -0.8];
        let vocab = (0..50).map(|i| format!("w{i}")).collect();
        let table = EmbeddingTable::from_rows(vocab, vec![v.to_vec(); 50]).unwrap();
        let out = learn_dictionary(&table, &config(Variant::Sc1, 1, 0.01, 10)).unwrap();
        let d = out.dictionary.atom(0);
        let cos = d.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() / norm2(d);
        assert!(cos.acos() < 1e-3, "angle {}", cos.acos());
        let code = out.codes.vector(0).to_dense(1);
        let mut recon = vec![0.0; 3];
        out.dictionary.reconstruct_into(&code, &mut recon);
        let mse = recon
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / 3.0;
        assert!(mse < 1e-4, "mse {mse}");
    }

    #[test]
    fn more_epochs_never_worse() {
        let table = random_table(120, 6, 3);
        let one = learn_dictionary(&table, &config(Variant::Sc3, 12, 0.1, 1)).unwrap();
        let ten = learn_dictionary(&table, &config(Variant::Sc3, 12, 0.1, 10)).unwrap();
        assert_eq!(one.history[0], ten.history[0]);
        assert!(ten.history[9].objective <= one.history[0].objective + 1e-8);
    }

    #[test]
    fn deterministic_given_seed() {
        let table = random_table(80, 5, 9);
        let a = learn_dictionary(&table, &config(Variant::Sc1, 10, 0.1, 3)).unwrap();
        let b = learn_dictionary(&table, &config(Variant::Sc1, 10, 0.1, 3)).unwrap();
        assert_eq!(a.dictionary, b.dictionary);
        assert_eq!(a.codes, b.codes);
    }

    #[test]
    fn codes_satisfy_kkt_against_final_dictionary() {
        let table = random_table(60, 5, 11);
        for variant in [Variant::Sc1, Variant::Sc3, Variant::Sc4] {
            let out = learn_dictionary(&table, &config(variant, 8, 0.1, 3)).unwrap();
            for i in 0..table.len() {
                let a = out.codes.vector(i).to_dense(8);
                let v = kkt_violation(
                    &out.dictionary,
                    table.row(i),
                    &a,
                    0.1,
                    variant == Variant::Sc4,
                );
                assert!(v < 1e-6, "{variant:?} word {i}: {v}");
                if variant == Variant::Sc4 {
                    assert!(a.iter().all(|&x| x >= 0.0));
                }
            }
        }
    }

    #[test]
    fn encode_reproduces_learned_codes() {
        let table = random_table(40, 4, 5);
        let out = learn_dictionary(&table, &config(Variant::Sc1, 6, 0.1, 2)).unwrap();
        let enc = encode(&out.dictionary, &table).unwrap();
        for (i, (a, b)) in enc.vectors().iter().zip(out.codes.vectors()).enumerate() {
            let obj = |c: &SparseVector<f64>| {
                crate::sparse::lasso_objective(&out.dictionary, table.row(i), &c.to_dense(6), 0.1)
            };
            assert!((obj(a) - obj(b)).abs() < 1e-9);
        }
        assert_eq!(enc.len(), table.len());
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let zeros = EmbeddingTable::from_rows(vec!["a".into()], vec![vec![0.0f64; 3]]).unwrap();
        assert!(matches!(
            learn_dictionary(&zeros, &config(Variant::Sc1, 2, 0.1, 1)),
            Err(Error::DegenerateInput(_))
        ));
        let t = random_table(5, 3, 1);
        assert!(learn_dictionary(&t, &config(Variant::Sc1, 0, 0.1, 1)).is_err());
        assert!(learn_dictionary(&t, &config(Variant::Sc1, 2, 0.0, 1)).is_err());
        let d = Dictionary::<f64>::identity(4, Variant::Sc1, 0.1).unwrap();
        assert!(matches!(
            encode(&d, &t),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn learns_in_f32() {
        let t64 = random_table(30, 4, 2);
        let rows: Vec<Vec<f32>> = t64
            .rows()
            .map(|r| r.iter().map(|&v| v as f32).collect())
            .collect();
        let t = EmbeddingTable::from_rows(t64.vocab().to_vec(), rows).unwrap();
        let cfg = SparseCodingConfig::<f32> {
            m: 6,
            epochs: 3,
            batch_size: 8,
            ..Default::default()
        };
        let out = learn_dictionary(&t, &cfg).unwrap();
        assert!(out
            .history
            .windows(2)
            .all(|w| w[1].objective <= w[0].objective + 1e-5));
        assert!(out
            .dictionary
            .column_norms()
            .iter()
            .all(|&n| n <= 1.0 + 1e-6));
    }
}
