use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::scalar::{norm2, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Columns in the unit ℓ2 ball.
    Sc1,
    /// `τ‖D‖²` penalty, signed codes.
    Sc3,
    /// `τ‖D‖²` penalty, non-negative codes.
    Sc4,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Sc1 => "sc1",
            Variant::Sc3 => "sc3",
            Variant::Sc4 => "sc4",
        }
    }

    pub fn nonnegative_codes(self) -> bool {
        self == Variant::Sc4
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc1" => Ok(Variant::Sc1),
            "sc3" => Ok(Variant::Sc3),
            "sc4" => Ok(Variant::Sc4),
            other => Err(Error::InvalidArgument(format!("unknown variant `{other}`"))),
        }
    }
}

/// A `k x m` dictionary stored column by column, with the settings it was
/// learned under.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<T> {
    k: usize,
    m: usize,
    atoms: Vec<T>,
    pub variant: Variant,
    pub lambda: T,
    pub tau: T,
}

impl<T: Scalar> Dictionary<T> {
    pub fn from_columns(columns: Vec<Vec<T>>, variant: Variant, lambda: T, tau: T) -> Result<Self> {
        let m = columns.len();
        let k = columns.first().map_or(0, Vec::len);
        if m == 0 || k == 0 {
            return Err(Error::InvalidArgument(
                "dictionary must be at least 1x1".into(),
            ));
        }
        let mut atoms = Vec::with_capacity(k * m);
        for c in &columns {
            if c.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: c.len(),
                });
            }
            atoms.extend_from_slice(c);
        }
        Self::from_flat(k, m, atoms, variant, lambda, tau)
    }

    pub(crate) fn from_flat(
        k: usize,
        m: usize,
        atoms: Vec<T>,
        variant: Variant,
        lambda: T,
        tau: T,
    ) -> Result<Self> {
        debug_assert_eq!(atoms.len(), k * m);
        if atoms.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dictionary".into()));
        }
        if !(lambda > T::zero()) {
            return Err(Error::InvalidArgument("lambda must be > 0".into()));
        }
        if !(tau >= T::zero()) {
            return Err(Error::InvalidArgument("tau must be >= 0".into()));
        }
        Ok(Dictionary {
            k,
            m,
            atoms,
            variant,
            lambda,
            tau,
        })
    }

    /// Identity-like dictionary, handy for tests and closed-form checks.
    pub fn identity(k: usize, variant: Variant, lambda: T) -> Result<Self> {
        let cols = (0..k)
            .map(|j| {
                (0..k)
                    .map(|i| if i == j { T::one() } else { T::zero() })
                    .collect()
            })
            .collect();
        Self::from_columns(cols, variant, lambda, T::zero())
    }

    /// Embedding dimension (rows).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of basis vectors (columns).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn atom(&self, j: usize) -> &[T] {
        &self.atoms[j * self.k..(j + 1) * self.k]
    }

    pub(crate) fn atom_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.atoms[j * self.k..(j + 1) * self.k]
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[T]> {
        self.atoms.chunks_exact(self.k)
    }

    pub fn column_norms(&self) -> Vec<T> {
        self.atoms().map(norm2).collect()
    }

    pub fn frobenius_sq(&self) -> T {
        self.atoms.iter().map(|&v| v * v).sum()
    }

    /// `out = D α` for a dense code.
    pub fn reconstruct_into(&self, alpha: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        for (j, &a) in alpha.iter().enumerate() {
            if a != T::zero() {
                for (o, &d) in out.iter_mut().zip(self.atom(j)) {
                    *o += a * d;
                }
            }
        }
    }

    /// `Dᵀx`.
    pub fn correlate(&self, x: &[T]) -> Vec<T> {
        self.atoms()
            .map(|d| d.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `DᵀD`, row-major `m x m`.
    pub fn gram(&self) -> Vec<T> {
        let m = self.m;
        let mut g = vec![T::zero(); m * m];
        for i in 0..m {
            for j in i..m {
                let v = self
                    .atom(i)
                    .iter()
                    .zip(self.atom(j))
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        g
    }

    /// Header `m k variant lambda tau`, then one line of `k` values per
    /// basis vector.
    pub fn write(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(
            w,
            "{} {} {} {} {}",
            self.m,
            self.k,
            self.variant.as_str(),
            self.lambda,
            self.tau
        )?;
        for atom in self.atoms() {
            let line: Vec<String> = atom.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing dictionary header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 {
            return Err(Error::parse(1, "expected header `m k variant lambda tau`"));
        }
        let bad = |what: &str| Error::parse(1, format!("bad {what} in header"));
        let m: usize = h[0].parse().map_err(|_| bad("m"))?;
        let k: usize = h[1].parse().map_err(|_| bad("k"))?;
        let variant: Variant = h[2].parse().map_err(|_| bad("variant"))?;
        let lambda = T::from_str(h[3]).map_err(|_| bad("lambda"))?;
        let tau = T::from_str(h[4]).map_err(|_| bad("tau"))?;
        let mut atoms = Vec::with_capacity(k * m);
        let mut rows = 0;
        for (i, line) in lines {
            let vals = line
                .split_whitespace()
                .map(|f| {
                    T::from_str(f).map_err(|_| Error::parse(i + 1, format!("bad number `{f}`")))
                })
                .collect::<Result<Vec<T>>>()?;
            if vals.len() != k {
                return Err(Error::parse(
                    i + 1,
                    format!("expected {k} values, found {}", vals.len()),
                ));
            }
            atoms.extend(vals);
            rows += 1;
        }
        if rows != m {
            return Err(Error::parse(
                1,
                format!("header declares {m} basis vectors, found {rows}"),
            ));
        }
        if m == 0 || k == 0 {
            return Err(Error::InvalidArgument(
                "dictionary must be at least 1x1".into(),
            ));
        }
        Self::from_flat(k, m, atoms, variant, lambda, tau)
    }
}
