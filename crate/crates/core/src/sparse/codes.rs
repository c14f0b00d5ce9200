use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::scalar::{format_sig6, Scalar};

/// Coefficients with magnitude below this are stored as zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;

/// Sparse coefficient vector: strictly increasing indices, nonzero finite
/// values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector<T> {
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseVector<T> {
    pub fn new() -> Self {
        SparseVector {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(index, value)` pairs; zero values are dropped.
    pub fn from_pairs(mut pairs: Vec<(usize, T)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let mut out = SparseVector::new();
        for (i, v) in pairs {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("coefficient {i}")));
            }
            if out.indices.last() == Some(&i) {
                return Err(Error::InvalidArgument(format!("index {i} repeated")));
            }
            if v != T::zero() {
                out.indices.push(i);
                out.values.push(v);
            }
        }
        Ok(out)
    }

    /// Keeps entries with `|v| >= ZERO_THRESHOLD`.
    pub fn from_dense(dense: &[T]) -> Self {
        let eps = T::lit(ZERO_THRESHOLD);
        let mut out = SparseVector::new();
        for (i, &v) in dense.iter().enumerate() {
            if v.abs() >= eps {
                out.indices.push(i);
                out.values.push(v);
            }
        }
        out
    }

    pub fn to_dense(&self, m: usize) -> Vec<T> {
        let mut d = vec![T::zero(); m];
        self.scatter(&mut d);
        d
    }

    /// Writes the entries into a zeroed dense buffer.
    pub fn scatter(&self, dense: &mut [T]) {
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            dense[i] = v;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn l1_norm(&self) -> T {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Per-word sparse codes aligned with a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodes<T> {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<SparseVector<T>>,
    m: usize,
    lowercase_fallback: bool,
}

impl<T: Scalar> SparseCodes<T> {
    pub fn new(vocab: Vec<String>, vectors: Vec<SparseVector<T>>, m: usize) -> Result<Self> {
        if vocab.len() != vectors.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} words but {} code vectors",
                vocab.len(),
                vectors.len()
            )));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, (w, v)) in vocab.iter().zip(&vectors).enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::DuplicateWord(w.clone()));
            }
            if let Some(&last) = v.indices.last() {
                if last >= m {
                    return Err(Error::InvalidArgument(format!(
                        "code of `{w}` uses basis {last} but m = {m}"
                    )));
                }
            }
        }
        Ok(SparseCodes {
            vocab,
            index,
            vectors,
            m,
            lowercase_fallback: false,
        })
    }

    pub fn set_lowercase_fallback(&mut self, on: bool) {
        self.lowercase_fallback = on;
    }

    pub fn get(&self, word: &str) -> Option<&SparseVector<T>> {
        if let Some(&i) = self.index.get(word) {
            return Some(&self.vectors[i]);
        }
        if self.lowercase_fallback {
            let lower = word.to_lowercase();
            if lower != word {
                return self.index.get(&lower).map(|&i| &self.vectors[i]);
            }
        }
        None
    }

    pub fn vector(&self, i: usize) -> &SparseVector<T> {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[SparseVector<T>] {
        &self.vectors
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.vectors.iter().map(SparseVector::nnz).sum()
    }

    /// `word idx:coef ...` per line, coefficients at six significant digits.
    pub fn write(&self, w: &mut dyn Write) -> std::io::Result<()> {
        for (word, v) in self.vocab.iter().zip(&self.vectors) {
            write!(w, "{word}")?;
            for (i, c) in v.iter() {
                write!(w, " {i}:{}", format_sig6(c))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read(path: &Path, m: Option<usize>) -> Result<Self> {
        Self::parse(&read_to_string(path)?, m)
    }

    /// Parses the codes file. Without an explicit `m`, the basis count is
    /// one past the largest index seen.
    pub fn parse(text: &str, m: Option<usize>) -> Result<Self> {
        let mut vocab = Vec::new();
        let mut vectors = Vec::new();
        let mut max_index = None;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let mut v = SparseVector::new();
            for f in fields {
                let (idx, coef) = f
                    .split_once(':')
                    .ok_or_else(|| Error::parse(lineno, format!("expected idx:coef, got `{f}`")))?;
                let idx: usize = idx
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad index `{idx}`")))?;
                let coef = T::from_str(coef)
                    .ok()
                    .filter(|c| c.is_finite() && *c != T::zero())
                    .ok_or_else(|| Error::parse(lineno, format!("bad coefficient `{coef}`")))?;
                if v.indices.last().is_some_and(|&last| last >= idx) {
                    return Err(Error::parse(lineno, "indices must be strictly increasing"));
                }
                v.indices.push(idx);
                v.values.push(coef);
                max_index = max_index.max(Some(idx));
            }
            vocab.push(word.to_string());
            vectors.push(v);
        }
        let m = match (m, max_index) {
            (Some(m), _) => m,
            (None, Some(i)) => i + 1,
            (None, None) => 0,
        };
        Self::new(vocab, vectors, m)
    }
}
