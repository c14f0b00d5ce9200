//! Token accuracy, conlleval-style entity scores, and the TSV experiment
//! report.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{split_tag, Dataset, SpanTag, Task};
use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};

fn check_shape<S>(gold: &Dataset, pred: &[Vec<S>]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} gold sentences, {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    for (i, (g, p)) in gold.sentences().iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::ShapeMismatch(format!(
                "sentence {i}: {} gold tokens, {} predicted",
                g.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

/// Fraction of tokens whose predicted label equals the gold label.
pub fn token_accuracy<S: AsRef<str>>(gold: &Dataset, pred: &[Vec<S>]) -> Result<f64> {
    check_shape(gold, pred)?;
    let total = gold.token_count();
    if total == 0 {
        return Err(Error::Empty("no tokens to score".into()));
    }
    let correct = gold
        .sentences()
        .iter()
        .zip(pred)
        .flat_map(|(g, p)| g.iter().zip(p))
        .filter(|(t, p)| t.label == p.as_ref())
        .count();
    Ok(correct as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagScheme {
    Bio,
    Iobes,
}

impl TagScheme {
    fn admits(self, tag: SpanTag<'_>) -> bool {
        self == TagScheme::Iobes || !matches!(tag, SpanTag::End(_) | SpanTag::Single(_))
    }
}

/// An entity: type and inclusive token range within a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entity {
    pub kind: String,
    pub start: usize,
    pub end: usize,
}

/// Chunks of one sentence under the shared-task rules: a chunk starts at
/// B-/S-, at an I-/E- that does not continue a same-typed open chunk, and
/// ends after E-/S- or before anything that does not continue it.
pub fn extract_entities<S: AsRef<str>>(labels: &[S], scheme: TagScheme) -> Result<Vec<Entity>> {
    let tags = labels
        .iter()
        .map(|l| {
            let l = l.as_ref();
            split_tag(l)
                .filter(|t| scheme.admits(*t))
                .ok_or_else(|| Error::InvalidTag(l.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let mut open: Option<(&str, usize)> = None;
    for (i, tag) in tags.iter().enumerate() {
        let continues = match (open, tag) {
            (Some((ty, _)), SpanTag::Inside(t) | SpanTag::End(t)) => ty == *t,
            _ => false,
        };
        if !continues {
            if let Some((ty, start)) = open.take() {
                out.push(Entity {
                    kind: ty.to_string(),
                    start,
                    end: i - 1,
                });
            }
            if let Some(ty) = tag.entity_type() {
                open = Some((ty, i));
            }
        }
        if let SpanTag::End(_) | SpanTag::Single(_) = tag {
            if let Some((ty, start)) = open.take() {
                out.push(Entity {
                    kind: ty.to_string(),
                    start,
                    end: i,
                });
            }
        }
    }
    if let Some((ty, start)) = open {
        out.push(Entity {
            kind: ty.to_string(),
            start,
            end: tags.len() - 1,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EntityCounts {
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl EntityCounts {
    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            0.0
        } else {
            self.correct as f64 / self.predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold == 0 {
            0.0
        } else {
            self.correct as f64 / self.gold as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntityReport {
    pub overall: EntityCounts,
    pub per_type: BTreeMap<String, EntityCounts>,
}

/// Exact-match entity precision, recall and F1, micro-averaged over the
/// dataset and broken down by entity type.
pub fn entity_f1<S: AsRef<str>>(
    gold: &Dataset,
    pred: &[Vec<S>],
    scheme: TagScheme,
) -> Result<EntityReport> {
    check_shape(gold, pred)?;
    let mut report = EntityReport::default();
    for (g, p) in gold.sentences().iter().zip(pred) {
        let g_labels: Vec<&str> = g.iter().map(|t| t.label.as_str()).collect();
        let gold_ents = extract_entities(&g_labels, scheme)?;
        let pred_ents = extract_entities(p, scheme)?;
        for e in &gold_ents {
            report.per_type.entry(e.kind.clone()).or_default().gold += 1;
        }
        for e in &pred_ents {
            let c = report.per_type.entry(e.kind.clone()).or_default();
            c.predicted += 1;
            if gold_ents.contains(e) {
                c.correct += 1;
            }
        }
    }
    for c in report.per_type.values() {
        report.overall.correct += c.correct;
        report.overall.predicted += c.predicted;
        report.overall.gold += c.gold;
    }
    Ok(report)
}

pub const REPORT_HEADER: &str = "treebank\ttask\tscheme\tlambda\tm\tsparsity\tmetric\tvalue";

/// One line of the experiment table. Absent numeric fields are written
/// as `-`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub treebank: String,
    pub task: Task,
    pub scheme: String,
    pub lambda: Option<f64>,
    pub m: Option<usize>,
    pub sparsity: Option<f64>,
    pub metric: String,
    pub value: f64,
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "-".to_string(), |x| x.to_string())
}

impl ReportRow {
    /// Accuracy row for POS, micro F1 row for NER.
    pub fn new(treebank: &str, task: Task, scheme: &str, value: f64) -> Self {
        ReportRow {
            treebank: treebank.to_string(),
            task,
            scheme: scheme.to_string(),
            lambda: None,
            m: None,
            sparsity: None,
            metric: match task {
                Task::Pos => "accuracy",
                Task::Ner => "f1",
            }
            .to_string(),
            value,
        }
    }

    fn key(&self) -> (String, String, String) {
        (
            self.treebank.clone(),
            self.scheme.clone(),
            opt(&self.lambda),
        )
    }
}

impl fmt::Display for ReportRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.treebank,
            self.task.as_str(),
            self.scheme,
            opt(&self.lambda),
            opt(&self.m),
            opt(&self.sparsity),
            self.metric,
            self.value
        )
    }
}

impl FromStr for ReportRow {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.split('\t').collect();
        let bad = || Error::parse(0, format!("malformed report row `{line}`"));
        if cols.len() != 8 {
            return Err(bad());
        }
        fn field<T: FromStr>(s: &str) -> std::result::Result<Option<T>, ()> {
            if s == "-" {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| ())
            }
        }
        Ok(ReportRow {
            treebank: cols[0].to_string(),
            task: cols[1].parse()?,
            scheme: cols[2].to_string(),
            lambda: field(cols[3]).map_err(|_| bad())?,
            m: field(cols[4]).map_err(|_| bad())?,
            sparsity: field(cols[5]).map_err(|_| bad())?,
            metric: cols[6].to_string(),
            value: cols[7].parse().map_err(|_| bad())?,
        })
    }
}

pub fn parse_report(text: &str) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || (i == 0 && line == REPORT_HEADER) {
            continue;
        }
        rows.push(line.parse().map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(i + 1, message),
            other => other,
        })?);
    }
    Ok(rows)
}

/// Adds `row` to the report at `path`, replacing any row with the same
/// (treebank, scheme, λ) key. The file is created if absent.
pub fn upsert_report(path: &Path, row: &ReportRow) -> Result<()> {
    let mut rows = if path.exists() {
        parse_report(&read_to_string(path)?)?
    } else {
        Vec::new()
    };
    match rows.iter_mut().find(|r| r.key() == row.key()) {
        Some(r) => *r = row.clone(),
        None => rows.push(row.clone()),
    }
    write_atomic(path, |w| {
        writeln!(w, "{REPORT_HEADER}")?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;

    fn ds(labels: &[&[&str]]) -> Dataset {
        let sents = labels
            .iter()
            .map(|s| {
                s.iter()
                    .enumerate()
                    .map(|(i, l)| Token::new(format!("w{i}"), *l))
                    .collect()
            })
            .collect();
        Dataset::new(Task::Ner, sents).unwrap()
    }

    #[test]
    fn accuracy() {
        let g = ds(&[&["O", "B-PER", "O", "O"]]);
        assert_eq!(
            token_accuracy(&g, &[vec!["O", "B-PER", "O", "O"]]).unwrap(),
            1.0
        );
        assert_eq!(
            token_accuracy(&g, &[vec!["O", "O", "O", "O"]]).unwrap(),
            0.75
        );
        assert!(token_accuracy(&g, &[vec!["O"]]).is_err());
    }

    #[test]
    fn chunking_rules() {
        let e = extract_entities(
            &["O", "I-PER", "I-PER", "I-LOC", "B-LOC", "O"],
            TagScheme::Bio,
        )
        .unwrap();
        assert_eq!(
            e,
            [
                Entity {
                    kind: "PER".into(),
                    start: 1,
                    end: 2
                },
                Entity {
                    kind: "LOC".into(),
                    start: 3,
                    end: 3
                },
                Entity {
                    kind: "LOC".into(),
                    start: 4,
                    end: 4
                },
            ]
        );
        let e = extract_entities(
            &["S-PER", "B-LOC", "I-LOC", "E-LOC", "E-LOC"],
            TagScheme::Iobes,
        )
        .unwrap();
        assert_eq!(e.len(), 3);
        assert!(extract_entities(&["S-PER"], TagScheme::Bio).is_err());
        assert!(extract_entities(&["X-PER"], TagScheme::Iobes).is_err());
    }

    #[test]
    fn boundary_error_scores_zero() {
        let g = ds(&[&["B-PER", "I-PER"]]);
        let r = entity_f1(&g, &[vec!["B-PER", "O"]], TagScheme::Bio).unwrap();
        assert_eq!(
            (r.overall.precision(), r.overall.recall(), r.overall.f1()),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn report_upsert() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.tsv");
        let mut a = ReportRow::new("en", Task::Pos, "sc", 0.9);
        a.lambda = Some(0.1);
        let mut b = ReportRow::new("de", Task::Pos, "sc", 0.8);
        b.lambda = Some(0.1);
        upsert_report(&path, &a).unwrap();
        upsert_report(&path, &b).unwrap();
        a.value = 0.95;
        upsert_report(&path, &a).unwrap();
        let rows = parse_report(&read_to_string(&path).unwrap()).unwrap();
        assert_eq!(rows, [a, b]);
        assert!(read_to_string(&path).unwrap().starts_with(REPORT_HEADER));
    }
}
