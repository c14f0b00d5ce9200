//! Labeled corpora: CoNLL-X / CoNLL-U treebanks and CoNLL-2002/2003 NER
//! files, universal tag mapping, span-scheme conversion.

mod conll;
mod spans;
mod tagmap;

pub use conll::{
    parse_conll_ner, parse_conllu, parse_conllx, read_conll_ner, read_conllu, read_conllx,
    write_conll_ner, write_conllu, write_conllx, NerFormat, PosColumn,
};
pub use spans::{
    bio_to_iobes, from_iobes, iob1_to_bio, iobes_alphabet, iobes_to_bio, split_tag, to_iobes,
    SpanTag, IOBES_PREFIXES,
};
pub use tagmap::{map_universal, TagMap, UNIVERSAL_TAGS_12, UNIVERSAL_TAGS_UD};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Pos,
    Ner,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Pos => "pos",
            Task::Ner => "ner",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos" => Ok(Task::Pos),
            "ner" => Ok(Task::Ner),
            other => Err(Error::InvalidArgument(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    pub label: String,
}

impl Token {
    pub fn new(form: impl Into<String>, label: impl Into<String>) -> Self {
        Token {
            form: form.into(),
            label: label.into(),
        }
    }
}

pub type Sentence = Vec<Token>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub task: Task,
    sentences: Vec<Sentence>,
}

impl Dataset {
    /// Builds a dataset, rejecting empty sentences and empty forms.
    pub fn new(task: Task, sentences: Vec<Sentence>) -> Result<Self> {
        for (i, s) in sentences.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidArgument(format!("sentence {i} is empty")));
            }
            if s.iter().any(|t| t.form.is_empty()) {
                return Err(Error::InvalidArgument(format!(
                    "sentence {i} has an empty form"
                )));
            }
        }
        Ok(Dataset { task, sentences })
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }

    pub fn labels(&self) -> Vec<Vec<String>> {
        self.sentences
            .iter()
            .map(|s| s.iter().map(|t| t.label.clone()).collect())
            .collect()
    }

    /// Copy with every sentence's labels replaced; shapes must match.
    pub fn with_labels(&self, labels: &[Vec<String>]) -> Result<Dataset> {
        if labels.len() != self.sentences.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} label sequences for {} sentences",
                labels.len(),
                self.sentences.len()
            )));
        }
        let mut sentences = self.sentences.clone();
        for (i, (s, ls)) in sentences.iter_mut().zip(labels).enumerate() {
            if s.len() != ls.len() {
                return Err(Error::ShapeMismatch(format!(
                    "sentence {i}: {} labels for {} tokens",
                    ls.len(),
                    s.len()
                )));
            }
            for (t, l) in s.iter_mut().zip(ls) {
                t.label = l.clone();
            }
        }
        Ok(Dataset {
            task: self.task,
            sentences,
        })
    }

    /// Concatenation of two datasets of the same task.
    pub fn concat(&self, other: &Dataset) -> Dataset {
        let mut sentences = self.sentences.clone();
        sentences.extend(other.sentences.iter().cloned());
        Dataset {
            task: self.task,
            sentences,
        }
    }
}

/// The first `min(n, len)` sentences, in order.
pub fn subset_first_n(dataset: &Dataset, n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("subset size must be >= 1".into()));
    }
    let n = n.min(dataset.len());
    Ok(Dataset {
        task: dataset.task,
        sentences: dataset.sentences[..n].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let sents = (0..n)
            .map(|i| vec![Token::new(format!("w{i}"), "X")])
            .collect();
        Dataset::new(Task::Pos, sents).unwrap()
    }

    #[test]
    fn subset_takes_prefix() {
        let d = toy(5190);
        let s = subset_first_n(&d, 150).unwrap();
        assert_eq!(s.len(), 150);
        assert_eq!(s.sentences()[0], d.sentences()[0]);
        // 150 of the Danish treebank's 5190 sentences: 2.89%
        assert_eq!(
            format!("{:.2}", 100.0 * s.len() as f64 / d.len() as f64),
            "2.89"
        );
        let all = subset_first_n(&d, 10_000).unwrap();
        assert_eq!(all, d);
        let s2 = subset_first_n(&d, 1500).unwrap();
        assert_eq!(&s2.sentences()[..150], s.sentences());
        assert!(subset_first_n(&d, 0).is_err());
    }

    #[test]
    fn rejects_empty_sentences() {
        assert!(Dataset::new(Task::Pos, vec![vec![]]).is_err());
        assert!(Dataset::new(Task::Pos, vec![vec![Token::new("", "X")]]).is_err());
    }
}
