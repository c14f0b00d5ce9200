//! Token-in-context feature extraction for every labeling scheme.

mod brown;
mod rich;

pub use brown::{brown_features, ClusterTable};
pub use rich::rich_features;

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::Dataset;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{SparseCodes, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Signed basis indices of sparse codes.
    Sc,
    /// Raw embedding coordinates as real-valued features.
    Dense,
    /// Brown cluster path prefixes.
    Brown,
    /// Word-level templates only.
    FrW,
    /// Word-level plus character-level templates.
    FrWc,
    /// Word identity.
    Wi,
    /// Word identity together with sparse-code features.
    WiSc,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Sc,
        Scheme::Dense,
        Scheme::Brown,
        Scheme::FrW,
        Scheme::FrWc,
        Scheme::Wi,
        Scheme::WiSc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Sc => "sc",
            Scheme::Dense => "dense",
            Scheme::Brown => "brown",
            Scheme::FrW => "fr_w",
            Scheme::FrWc => "fr_wc",
            Scheme::Wi => "wi",
            Scheme::WiSc => "wi_sc",
        }
    }

    pub fn needs_codes(self) -> bool {
        matches!(self, Scheme::Sc | Scheme::WiSc)
    }

    pub fn needs_embeddings(self) -> bool {
        self == Scheme::Dense
    }

    pub fn needs_clusters(self) -> bool {
        self == Scheme::Brown
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature scheme `{s}`")))
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub scheme: Scheme,
    /// Neighbor radius, 1 or 2.
    pub window: usize,
    pub brown_prefix_lengths: Vec<usize>,
}

impl FeatureConfig {
    pub fn new(scheme: Scheme, window: usize) -> Result<Self> {
        if !(1..=2).contains(&window) {
            return Err(Error::InvalidArgument(format!(
                "window must be 1 or 2, got {window}"
            )));
        }
        Ok(FeatureConfig {
            scheme,
            window,
            brown_prefix_lengths: vec![4, 6, 10, 20],
        })
    }
}

/// Features of one token: unique names in sorted order, finite values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector<T> {
    entries: Vec<(String, T)>,
}

impl<T: Scalar> FeatureVector<T> {
    /// Sorts by name; later duplicates of a name are dropped.
    pub fn from_entries(mut entries: Vec<(String, T)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|later, earlier| later.0 == earlier.0);
        FeatureVector { entries }
    }

    pub fn indicators<I: IntoIterator<Item = String>>(names: I) -> Self {
        Self::from_entries(names.into_iter().map(|n| (n, T::one())).collect())
    }

    pub fn entries(&self) -> &[(String, T)] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.0.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries
            .binary_search_by(|e| e.0.as_str().cmp(name))
            .is_ok()
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.entries
            .binary_search_by(|e| e.0.as_str().cmp(name))
            .ok()
            .map(|i| self.entries[i].1)
    }
}

/// Escapes whitespace and backslashes so feature names stay single tokens.
pub fn escape_form(form: &str) -> std::borrow::Cow<'_, str> {
    if !form.chars().any(|c| c.is_whitespace() || c == '\\') {
        return std::borrow::Cow::Borrowed(form);
    }
    let mut out = String::with_capacity(form.len() + 4);
    for c in form.chars() {
        if c == '\\' {
            out.push_str("\\\\");
        } else if c.is_whitespace() {
            let _ = write!(out, "\\u{:x}", c as u32);
        } else {
            out.push(c);
        }
    }
    std::borrow::Cow::Owned(out)
}

/// One feature per nonzero coefficient: its sign followed by its index.
pub fn sparse_features<T: Scalar>(alpha: &SparseVector<T>) -> Vec<String> {
    alpha
        .iter()
        .map(|(i, v)| format!("{}{i}", if v < T::zero() { '-' } else { '+' }))
        .collect()
}

/// `d:j` carrying the j-th coordinate, for every coordinate.
pub fn dense_features<T: Scalar>(w: &[T]) -> FeatureVector<T> {
    FeatureVector::from_entries(
        w.iter()
            .enumerate()
            .map(|(j, &v)| (format!("d:{j}"), v))
            .collect(),
    )
}

/// Lexical resources a scheme may draw on.
#[derive(Debug, Clone, Copy)]
pub struct Resources<'a, T> {
    pub codes: Option<&'a SparseCodes<T>>,
    pub embeddings: Option<&'a EmbeddingTable<T>>,
    pub clusters: Option<&'a ClusterTable>,
}

impl<T> Default for Resources<'_, T> {
    fn default() -> Self {
        Resources {
            codes: None,
            embeddings: None,
            clusters: None,
        }
    }
}

impl<T: Scalar> Resources<'_, T> {
    pub fn check(&self, scheme: Scheme) -> Result<()> {
        if scheme.needs_codes() && self.codes.is_none() {
            return Err(Error::MissingResource(format!(
                "scheme {scheme} needs sparse codes"
            )));
        }
        if scheme.needs_embeddings() && self.embeddings.is_none() {
            return Err(Error::MissingResource(format!(
                "scheme {scheme} needs embeddings"
            )));
        }
        if scheme.needs_clusters() && self.clusters.is_none() {
            return Err(Error::MissingResource(format!(
                "scheme {scheme} needs Brown clusters"
            )));
        }
        Ok(())
    }
}

fn offset_tag(o: isize) -> String {
    if o > 0 {
        format!("[+{o}]")
    } else {
        format!("[{o}]")
    }
}

/// Features of position `t`. Window schemes emit the per-word features of
/// each in-bounds neighbor at offset `o` prefixed with `[o]`; the
/// feature-rich schemes encode positions themselves.
pub fn token_features<T: Scalar, S: AsRef<str>>(
    sentence: &[S],
    t: usize,
    config: &FeatureConfig,
    resources: &Resources<'_, T>,
) -> Result<FeatureVector<T>> {
    if t >= sentence.len() {
        return Err(Error::InvalidArgument(format!(
            "position {t} outside sentence of length {}",
            sentence.len()
        )));
    }
    resources.check(config.scheme)?;
    let scheme = config.scheme;
    if matches!(scheme, Scheme::FrW | Scheme::FrWc) {
        return Ok(FeatureVector::indicators(rich_features(
            sentence,
            t,
            scheme == Scheme::FrWc,
        )?));
    }

    let w = config.window as isize;
    let mut entries: Vec<(String, T)> = Vec::new();
    for o in -w..=w {
        let pos = t as isize + o;
        if pos < 0 || pos >= sentence.len() as isize {
            continue;
        }
        let form = sentence[pos as usize].as_ref();
        let tag = offset_tag(o);
        let mut push = |name: &str, v: T| entries.push((format!("{tag}{name}"), v));
        if matches!(scheme, Scheme::Wi | Scheme::WiSc) {
            push(&format!("w={}", escape_form(form)), T::one());
        }
        match scheme {
            Scheme::Sc | Scheme::WiSc => {
                if let Some(alpha) = resources.codes.and_then(|c| c.get(form)) {
                    for f in sparse_features(alpha) {
                        push(&f, T::one());
                    }
                }
            }
            Scheme::Dense => {
                if let Some(v) = resources.embeddings.and_then(|e| e.lookup(form)) {
                    for (j, &x) in v.iter().enumerate() {
                        push(&format!("d:{j}"), x);
                    }
                }
            }
            Scheme::Brown => {
                if let Some(path) = resources.clusters.and_then(|c| c.path(form)) {
                    for f in brown_features(path, &config.brown_prefix_lengths) {
                        push(&f, T::one());
                    }
                }
            }
            _ => {}
        }
    }
    Ok(FeatureVector::from_entries(entries))
}

/// Features of every position of a sentence.
pub fn sentence_features<T: Scalar, S: AsRef<str>>(
    sentence: &[S],
    config: &FeatureConfig,
    resources: &Resources<'_, T>,
) -> Result<Vec<FeatureVector<T>>> {
    (0..sentence.len())
        .map(|t| token_features(sentence, t, config, resources))
        .collect()
}

/// Features of every sentence in a dataset, computed in parallel.
pub fn dataset_features<T: Scalar>(
    dataset: &Dataset,
    config: &FeatureConfig,
    resources: &Resources<'_, T>,
) -> Result<Vec<Vec<FeatureVector<T>>>> {
    resources.check(config.scheme)?;
    dataset
        .sentences()
        .par_iter()
        .map(|s| {
            let forms: Vec<&str> = s.iter().map(|t| t.form.as_str()).collect();
            sentence_features(&forms, config, resources)
        })
        .collect()
}
