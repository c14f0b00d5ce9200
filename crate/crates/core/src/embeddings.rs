//! Dense word-embedding tables and corpus coverage.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmbeddingFormat {
    /// `word v1 ... vk` per line; a leading `|V| k` header is auto-detected.
    #[default]
    Text,
    /// Same records, but the `|V| k` header is mandatory.
    Word2VecText,
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(EmbeddingFormat::Text),
            "word2vec-text" | "word2vec" => Ok(EmbeddingFormat::Word2VecText),
            other => Err(Error::InvalidArgument(format!(
                "unknown embedding format `{other}`"
            ))),
        }
    }
}

/// Vocabulary plus a `|V| x k` row-major matrix of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<T>,
    unknown: Option<usize>,
    lowercase_fallback: bool,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn from_rows(vocab: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self> {
        if vocab.len() != rows.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} words but {} rows",
                vocab.len(),
                rows.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be >= 1".into(),
            ));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        let mut data = Vec::with_capacity(dim * rows.len());
        for (i, (w, row)) in vocab.iter().zip(&rows).enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("embedding of `{w}`")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::DuplicateWord(w.clone()));
            }
            data.extend_from_slice(row);
        }
        Ok(EmbeddingTable {
            vocab,
            index,
            dim,
            data,
            unknown: None,
            lowercase_fallback: false,
        })
    }

    pub fn load(path: &Path, format: EmbeddingFormat) -> Result<Self> {
        Self::parse(&read_to_string(path)?, format)
    }

    pub fn parse(text: &str, format: EmbeddingFormat) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches(['\r', ' ', '\t'])))
            .filter(|(_, l)| !l.is_empty())
            .peekable();

        let mut declared: Option<(usize, usize)> = None;
        if let Some(&(lineno, first)) = lines.peek() {
            let header = parse_header(first);
            match format {
                EmbeddingFormat::Word2VecText => {
                    declared = Some(
                        header.ok_or_else(|| Error::parse(lineno, "expected `|V| k` header"))?,
                    );
                    lines.next();
                }
                EmbeddingFormat::Text => {
                    // a two-integer first line is a header only if the next
                    // record has k+1 fields
                    if let Some((n, k)) = header {
                        let mut ahead = lines.clone();
                        ahead.next();
                        let next_fields = ahead.peek().map(|(_, l)| fields(l).count());
                        if next_fields.is_none_or(|c| c == k + 1) {
                            declared = Some((n, k));
                            lines.next();
                        }
                    }
                }
            }
        }

        let mut vocab = Vec::new();
        let mut rows = Vec::new();
        let mut dim = declared.map(|(_, k)| k);
        let mut seen = HashSet::new();
        for (lineno, line) in lines {
            let mut it = fields(line);
            let word = it.next().expect("non-empty line");
            let row = it
                .map(|f| {
                    T::from_str(f)
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::parse(lineno, format!("bad number `{f}`")))
                })
                .collect::<Result<Vec<T>>>()?;
            match dim {
                None if row.is_empty() => {
                    return Err(Error::parse(lineno, "no vector values"));
                }
                None => dim = Some(row.len()),
                Some(k) if k != row.len() => {
                    return Err(Error::parse(
                        lineno,
                        format!("expected {k} values, found {}", row.len()),
                    ));
                }
                _ => {}
            }
            if !seen.insert(word) {
                return Err(Error::DuplicateWord(word.to_string()));
            }
            vocab.push(word.to_string());
            rows.push(row);
        }
        if let Some((n, _)) = declared {
            if n != vocab.len() {
                return Err(Error::parse(
                    1,
                    format!("header declares {n} words, file has {}", vocab.len()),
                ));
            }
        }
        if vocab.is_empty() {
            return Err(Error::Empty("embedding file has no records".into()));
        }
        Self::from_rows(vocab, rows)
    }

    /// Writes `word v1 ... vk` lines, optionally preceded by a `|V| k` header.
    pub fn write_text(&self, w: &mut dyn Write, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(w, "{} {}", self.len(), self.dim)?;
        }
        for (i, word) in self.vocab.iter().enumerate() {
            write!(w, "{word}")?;
            for v in self.row(i) {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Designates an in-vocabulary word (e.g. `<UNK>`) as the fallback row.
    pub fn set_unknown_word(&mut self, word: Option<&str>) -> Result<()> {
        self.unknown = match word {
            None => None,
            Some(w) => Some(
                *self
                    .index
                    .get(w)
                    .ok_or_else(|| Error::MissingResource(format!("unknown-word row `{w}`")))?,
            ),
        };
        Ok(())
    }

    pub fn set_lowercase_fallback(&mut self, on: bool) {
        self.lowercase_fallback = on;
    }

    pub fn lowercase_fallback(&self) -> bool {
        self.lowercase_fallback
    }

    /// Row index of `word` by exact match, then (if enabled) its lowercased
    /// form. Does not consult the unknown row.
    pub fn index_of(&self, word: &str) -> Option<usize> {
        if let Some(&i) = self.index.get(word) {
            return Some(i);
        }
        if self.lowercase_fallback {
            let lower = word.to_lowercase();
            if lower != word {
                return self.index.get(&lower).copied();
            }
        }
        None
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index_of(word).is_some()
    }

    pub fn lookup(&self, word: &str) -> Option<&[T]> {
        self.index_of(word).or(self.unknown).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn word(&self, i: usize) -> &str {
        &self.vocab[i]
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }
}

fn fields(line: &str) -> impl Iterator<Item = &str> + Clone {
    line.split(' ').filter(|f| !f.is_empty())
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = fields(line);
    let n = it.next()?.parse().ok()?;
    let k = it.next()?.parse().ok()?;
    match it.next() {
        None if k > 0 => Some((n, k)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub token_coverage: f64,
    pub type_coverage: f64,
    pub tokens_total: usize,
    pub tokens_covered: usize,
    pub types_total: usize,
    pub types_covered: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Fraction of tokens and of distinct word forms that have a vector.
pub fn coverage<T: Scalar>(table: &EmbeddingTable<T>, dataset: &Dataset) -> Result<CoverageReport> {
    if dataset.is_empty() {
        return Err(Error::Empty("coverage of an empty dataset".into()));
    }
    let mut tokens_total = 0;
    let mut tokens_covered = 0;
    let mut types: HashMap<&str, bool> = HashMap::new();
    for tok in dataset.tokens() {
        tokens_total += 1;
        let hit = *types
            .entry(tok.form.as_str())
            .or_insert_with(|| table.contains(&tok.form));
        if hit {
            tokens_covered += 1;
        }
    }
    let types_total = types.len();
    let types_covered = types.values().filter(|&&h| h).count();
    Ok(CoverageReport {
        token_coverage: ratio(tokens_covered, tokens_total),
        type_coverage: ratio(types_covered, types_total),
        tokens_total,
        tokens_covered,
        types_total,
        types_covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Task, Token};

    fn two_words() -> EmbeddingTable<f64> {
        EmbeddingTable::parse("a 1.0 0.0\nb 0.0 1.0\n", EmbeddingFormat::Text).unwrap()
    }

    #[test]
    fn minimal_file() {
        let t = two_words();
        assert_eq!((t.len(), t.dim()), (2, 2));
        assert_eq!(t.lookup("a"), Some(&[1.0, 0.0][..]));
        assert_eq!(t.lookup("zzz"), None);
    }

    #[test]
    fn inconsistent_dimension_reports_line() {
        let err =
            EmbeddingTable::<f64>::parse("a 1.0\nb 0.0 1.0\n", EmbeddingFormat::Text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = EmbeddingTable::<f64>::parse("a 1.0 x\n", EmbeddingFormat::Text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = EmbeddingTable::<f64>::parse("a 1.0 NaN\n", EmbeddingFormat::Text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_word_named() {
        match EmbeddingTable::<f64>::parse("a 1 2\na 3 4\n", EmbeddingFormat::Text) {
            Err(Error::DuplicateWord(w)) => assert_eq!(w, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_detection() {
        let t =
            EmbeddingTable::<f64>::parse("2 3\na 1 2 3\nb 4 5 6\n", EmbeddingFormat::Text).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 3));
        // a numeric word with a 1-d vector is a record, not a header
        let t = EmbeddingTable::<f64>::parse("7 5\n8 6\n", EmbeddingFormat::Text).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 1));
        assert!(EmbeddingTable::<f64>::parse("a 1 2\n", EmbeddingFormat::Word2VecText).is_err());
        let t =
            EmbeddingTable::<f32>::parse("1 2\na 1 2 \n", EmbeddingFormat::Word2VecText).unwrap();
        assert_eq!(t.lookup("a"), Some(&[1.0f32, 2.0][..]));
    }

    #[test]
    fn unknown_row_and_lowercase_fallback() {
        let mut t =
            EmbeddingTable::<f64>::parse("<UNK> 0.5 0.5\nparis 1 0\n", EmbeddingFormat::Text)
                .unwrap();
        assert_eq!(t.lookup("Paris"), None);
        t.set_lowercase_fallback(true);
        assert_eq!(t.lookup("Paris"), Some(&[1.0, 0.0][..]));
        assert_eq!(t.lookup("zzz"), None);
        t.set_unknown_word(Some("<UNK>")).unwrap();
        assert_eq!(t.lookup("zzz"), Some(&[0.5, 0.5][..]));
        assert!(!t.contains("zzz"));
        assert!(t.set_unknown_word(Some("nope")).is_err());
    }

    fn dataset(sents: &[&[&str]]) -> Dataset {
        Dataset::new(
            Task::Pos,
            sents
                .iter()
                .map(|s| s.iter().map(|w| Token::new(*w, "X")).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn coverage_examples() {
        let t = two_words();
        let r = coverage(&t, &dataset(&[&["a", "b", "zzz"]])).unwrap();
        assert_eq!(r.token_coverage, 2.0 / 3.0);
        assert_eq!(r.type_coverage, 2.0 / 3.0);
        let r = coverage(&t, &dataset(&[&["a", "a", "a"]])).unwrap();
        assert_eq!((r.token_coverage, r.type_coverage), (1.0, 1.0));
        assert_eq!((r.types_total, r.tokens_total), (1, 3));
        let empty = Dataset::new(Task::Pos, vec![]).unwrap();
        assert!(coverage(&t, &empty).is_err());
    }
}
