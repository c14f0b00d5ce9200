use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::io::read_to_string;
use crate::scalar::Scalar;

use super::Lattice;

pub const MODEL_VERSION: u32 = 1;

/// Trained linear-chain CRF: emission weights per (feature, label) and
/// label-pair transition weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel<T> {
    labels: Vec<String>,
    label_index: HashMap<String, usize>,
    features: Vec<String>,
    feature_index: HashMap<String, usize>,
    /// `features × labels`, row-major.
    emissions: Vec<T>,
    /// `labels × labels`, `[from * L + to]`.
    transitions: Vec<T>,
    pub c1: T,
    pub c2: T,
    /// Free-form key/value pairs carried in the `[meta]` section.
    pub meta: BTreeMap<String, String>,
}

fn build_index(names: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if n.is_empty() || n.chars().any(char::is_whitespace) {
            return Err(Error::ModelFormat(format!("invalid {what} name `{n}`")));
        }
        if index.insert(n.clone(), i).is_some() {
            return Err(Error::ModelFormat(format!("duplicate {what} `{n}`")));
        }
    }
    Ok(index)
}

const RESERVED: [&str; 4] = ["version", "c1", "c2", "labels"];

impl<T: Scalar> CrfModel<T> {
    /// All-zero weights.
    pub fn zeros(labels: Vec<String>, features: Vec<String>) -> Result<Self> {
        let (l, f) = (labels.len(), features.len());
        Self::from_parts(
            labels,
            features,
            vec![T::zero(); f * l],
            vec![T::zero(); l * l],
        )
    }

    pub fn from_parts(
        labels: Vec<String>,
        features: Vec<String>,
        emissions: Vec<T>,
        transitions: Vec<T>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::ModelFormat("model has no labels".into()));
        }
        let label_index = build_index(&labels, "label")?;
        let feature_index = build_index(&features, "feature")?;
        let l = labels.len();
        if emissions.len() != features.len() * l || transitions.len() != l * l {
            return Err(Error::ShapeMismatch(
                "weight tables do not match label/feature counts".into(),
            ));
        }
        if !emissions.iter().chain(&transitions).all(|w| w.is_finite()) {
            return Err(Error::NonFinite("model weights".into()));
        }
        Ok(CrfModel {
            labels,
            label_index,
            features,
            feature_index,
            emissions,
            transitions,
            c1: T::zero(),
            c2: T::zero(),
            meta: BTreeMap::new(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn label_id(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn feature_id(&self, name: &str) -> Option<usize> {
        self.feature_index.get(name).copied()
    }

    pub fn emissions(&self) -> &[T] {
        &self.emissions
    }

    pub fn transitions(&self) -> &[T] {
        &self.transitions
    }

    pub fn emission_weight(&self, feature: usize, label: usize) -> T {
        self.emissions[feature * self.labels.len() + label]
    }

    pub fn transition_weight(&self, from: usize, to: usize) -> T {
        self.transitions[from * self.labels.len() + to]
    }

    /// Number of parameters: emissions followed by transitions.
    pub fn num_params(&self) -> usize {
        self.emissions.len() + self.transitions.len()
    }

    pub fn params(&self) -> Vec<T> {
        let mut p = self.emissions.clone();
        p.extend_from_slice(&self.transitions);
        p
    }

    pub fn set_params(&mut self, params: &[T]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                actual: params.len(),
            });
        }
        if !params.iter().all(|w| w.is_finite()) {
            return Err(Error::NonFinite("model weights".into()));
        }
        let (e, t) = params.split_at(self.emissions.len());
        self.emissions.copy_from_slice(e);
        self.transitions.copy_from_slice(t);
        Ok(())
    }

    pub fn nonzero_emissions(&self) -> usize {
        self.emissions.iter().filter(|w| !w.is_zero()).count()
    }

    /// Emission scores `Σ_f weight(f, y) · value(f)`; unseen features are
    /// skipped.
    pub fn score_lattice(&self, sentence: &[FeatureVector<T>]) -> Lattice<T> {
        let l = self.labels.len();
        let mut emissions = vec![T::zero(); sentence.len() * l];
        for (t, fv) in sentence.iter().enumerate() {
            let row = &mut emissions[t * l..(t + 1) * l];
            for (name, v) in fv.entries() {
                if let Some(f) = self.feature_id(name) {
                    for (e, &w) in row.iter_mut().zip(&self.emissions[f * l..(f + 1) * l]) {
                        *e += w * *v;
                    }
                }
            }
        }
        Lattice::new(sentence.len(), l, emissions, self.transitions.clone())
    }

    pub fn tag(&self, sentence: &[FeatureVector<T>]) -> Vec<usize> {
        self.score_lattice(sentence).viterbi()
    }

    pub fn tag_labels(&self, sentence: &[FeatureVector<T>]) -> Vec<String> {
        self.tag(sentence)
            .into_iter()
            .map(|y| self.labels[y].clone())
            .collect()
    }

    /// Writes the sectioned text format. Only nonzero emission weights are
    /// stored; weights carry 17 significant digits.
    pub fn write(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let num = |x: T| format!("{:.16e}", x.as_f64());
        writeln!(w, "[meta]")?;
        writeln!(w, "version\t{MODEL_VERSION}")?;
        writeln!(w, "c1\t{}", num(self.c1))?;
        writeln!(w, "c2\t{}", num(self.c2))?;
        writeln!(w, "labels\t{}", self.labels.join("\t"))?;
        for (k, v) in &self.meta {
            writeln!(w, "{k}\t{v}")?;
        }
        writeln!(w, "[transitions]")?;
        for (a, from) in self.labels.iter().enumerate() {
            for (b, to) in self.labels.iter().enumerate() {
                writeln!(w, "{from}\t{to}\t{}", num(self.transition_weight(a, b)))?;
            }
        }
        writeln!(w, "[emissions]")?;
        let l = self.labels.len();
        for (f, name) in self.features.iter().enumerate() {
            for (y, label) in self.labels.iter().enumerate() {
                let wt = self.emissions[f * l + y];
                if !wt.is_zero() {
                    writeln!(w, "{name}\t{label}\t{}", num(wt))?;
                }
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Meta,
            Transitions,
            Emissions,
        }
        let mut section = Section::None;
        let mut version = None;
        let mut c1 = T::zero();
        let mut c2 = T::zero();
        let mut labels: Option<Vec<String>> = None;
        let mut meta = BTreeMap::new();
        let mut transitions: Vec<(String, String, T)> = Vec::new();
        let mut features: Vec<String> = Vec::new();
        let mut feature_index: HashMap<String, usize> = HashMap::new();
        let mut emissions: Vec<(usize, String, T)> = Vec::new();

        let weight = |s: &str, line: usize| -> Result<T> {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(T::lit)
                .ok_or_else(|| Error::parse(line, format!("bad weight `{s}`")))
        };

        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            let n = i + 1;
            if line.is_empty() {
                continue;
            }
            match line {
                "[meta]" => section = Section::Meta,
                "[transitions]" => section = Section::Transitions,
                "[emissions]" => section = Section::Emissions,
                _ => {
                    let cols: Vec<&str> = line.split('\t').collect();
                    match section {
                        Section::None => {
                            return Err(Error::parse(n, "content before the first section"))
                        }
                        Section::Meta => {
                            let (key, rest) = (cols[0], &cols[1..]);
                            match key {
                                "version" => {
                                    version = rest.first().and_then(|v| v.parse::<u32>().ok());
                                }
                                "c1" => c1 = weight(rest.first().copied().unwrap_or(""), n)?,
                                "c2" => c2 = weight(rest.first().copied().unwrap_or(""), n)?,
                                "labels" => {
                                    labels = Some(rest.iter().map(|s| s.to_string()).collect())
                                }
                                _ => {
                                    meta.insert(key.to_string(), rest.join("\t"));
                                }
                            }
                        }
                        Section::Transitions => {
                            if cols.len() != 3 {
                                return Err(Error::parse(n, "expected `from<TAB>to<TAB>weight`"));
                            }
                            transitions.push((cols[0].into(), cols[1].into(), weight(cols[2], n)?));
                        }
                        Section::Emissions => {
                            if cols.len() != 3 {
                                return Err(Error::parse(
                                    n,
                                    "expected `feature<TAB>label<TAB>weight`",
                                ));
                            }
                            let next = features.len();
                            let f = *feature_index.entry(cols[0].to_string()).or_insert(next);
                            if f == next {
                                features.push(cols[0].to_string());
                            }
                            emissions.push((f, cols[1].into(), weight(cols[2], n)?));
                        }
                    }
                }
            }
        }
        match version {
            Some(MODEL_VERSION) => {}
            Some(v) => return Err(Error::ModelFormat(format!("unsupported model version {v}"))),
            None => return Err(Error::ModelFormat("missing version".into())),
        }
        let labels = labels.ok_or_else(|| Error::ModelFormat("missing label list".into()))?;
        let mut model = Self::zeros(labels, features)?;
        let l = model.num_labels();
        for (from, to, w) in transitions {
            let a = model.label_id(&from).ok_or(Error::UnknownLabel(from))?;
            let b = model.label_id(&to).ok_or(Error::UnknownLabel(to))?;
            model.transitions[a * l + b] = w;
        }
        for (f, label, w) in emissions {
            let y = model.label_id(&label).ok_or(Error::UnknownLabel(label))?;
            model.emissions[f * l + y] = w;
        }
        model.c1 = c1;
        model.c2 = c2;
        model.meta = meta;
        Ok(model)
    }

    /// Sets a meta entry; reserved keys are rejected.
    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let value = value.into();
        if RESERVED.contains(&key)
            || key.is_empty()
            || key.contains(['\t', '\n', '['])
            || value.contains('\n')
        {
            return Err(Error::InvalidArgument(format!("invalid meta key `{key}`")));
        }
        self.meta.insert(key.to_string(), value);
        Ok(())
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }
}
