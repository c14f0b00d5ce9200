use std::io::Write;
use std::path::Path;

use super::spans::{iob1_to_bio, split_tag, SpanTag};
use super::{Dataset, Sentence, Task, Token};
use crate::error::{Error, Result};
use crate::io::read_to_string;

/// Which CoNLL-X column supplies the POS label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PosColumn {
    /// CPOSTAG, column 4.
    Coarse,
    /// POSTAG, column 5.
    #[default]
    Fine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NerFormat {
    /// CoNLL-2002 (Spanish, Dutch): already BIO.
    Conll2002,
    /// CoNLL-2003 (English, German): IOB1, normalized to BIO on read.
    Conll2003,
}

fn finish_sentence(current: &mut Sentence, out: &mut Vec<Sentence>) {
    if !current.is_empty() {
        out.push(std::mem::take(current));
    }
}

pub fn read_conllx(path: &Path, column: PosColumn) -> Result<Dataset> {
    parse_conllx(&read_to_string(path)?, column)
}

pub fn parse_conllx(text: &str, column: PosColumn) -> Result<Dataset> {
    let col = match column {
        PosColumn::Coarse => 3,
        PosColumn::Fine => 4,
    };
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish_sentence(&mut current, &mut sentences);
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 5 {
            return Err(Error::parse(
                lineno,
                format!(
                    "expected at least 5 tab-separated columns, found {}",
                    fields.len()
                ),
            ));
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::parse(
                    lineno,
                    format!(
                        "ragged row: {} columns, earlier rows have {w}",
                        fields.len()
                    ),
                ))
            }
            _ => {}
        }
        if fields[1].is_empty() {
            return Err(Error::parse(lineno, "empty form"));
        }
        current.push(Token::new(fields[1], fields[col]));
    }
    finish_sentence(&mut current, &mut sentences);
    Dataset::new(Task::Pos, sentences)
}

pub fn read_conllu(path: &Path) -> Result<Dataset> {
    parse_conllu(&read_to_string(path)?)
}

enum ConlluId {
    Word,
    Range,
    Empty,
}

fn classify_id(id: &str) -> Option<ConlluId> {
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if all_digits(id) {
        return Some(ConlluId::Word);
    }
    if let Some((a, b)) = id.split_once('-') {
        return (all_digits(a) && all_digits(b)).then_some(ConlluId::Range);
    }
    if let Some((a, b)) = id.split_once('.') {
        return (all_digits(a) && all_digits(b)).then_some(ConlluId::Empty);
    }
    None
}

pub fn parse_conllu(text: &str) -> Result<Dataset> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish_sentence(&mut current, &mut sentences);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            return Err(Error::parse(
                lineno,
                format!(
                    "expected at least 4 tab-separated columns, found {}",
                    fields.len()
                ),
            ));
        }
        match classify_id(fields[0]) {
            Some(ConlluId::Word) => {
                if fields[1].is_empty() {
                    return Err(Error::parse(lineno, "empty form"));
                }
                current.push(Token::new(fields[1], fields[3]));
            }
            Some(ConlluId::Range) | Some(ConlluId::Empty) => {}
            None => {
                return Err(Error::parse(
                    lineno,
                    format!("malformed id `{}`", fields[0]),
                ))
            }
        }
    }
    finish_sentence(&mut current, &mut sentences);
    Dataset::new(Task::Pos, sentences)
}

pub fn read_conll_ner(path: &Path, format: NerFormat) -> Result<Dataset> {
    parse_conll_ner(&read_to_string(path)?, format)
}

pub fn parse_conll_ner(text: &str, format: NerFormat) -> Result<Dataset> {
    let mut sentences = Vec::new();
    let mut current: Sentence = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            finish_sentence(&mut current, &mut sentences);
            continue;
        }
        if fields[0] == "-DOCSTART-" {
            finish_sentence(&mut current, &mut sentences);
            continue;
        }
        if fields.len() < 2 {
            return Err(Error::parse(lineno, "expected a form and a tag column"));
        }
        let tag = fields[fields.len() - 1];
        match split_tag(tag) {
            Some(SpanTag::Outside) | Some(SpanTag::Begin(_)) | Some(SpanTag::Inside(_)) => {}
            _ => {
                return Err(Error::parse(
                    lineno,
                    format!("tag `{tag}` is not O, B-TYPE or I-TYPE"),
                ))
            }
        }
        current.push(Token::new(fields[0], tag));
    }
    finish_sentence(&mut current, &mut sentences);
    for s in &mut sentences {
        let labels: Vec<String> = s.iter().map(|t| t.label.clone()).collect();
        let normalized = match format {
            NerFormat::Conll2003 => iob1_to_bio(&labels),
            // I- after O does not occur in well-formed 2002 data; treat stray
            // ones the same way
            NerFormat::Conll2002 => iob1_to_bio(&labels),
        };
        for (t, l) in s.iter_mut().zip(normalized) {
            t.label = l;
        }
    }
    Dataset::new(Task::Ner, sentences)
}

/// Minimal 10-column CoNLL-X rendering; the label fills CPOSTAG and POSTAG.
pub fn write_conllx(w: &mut dyn Write, dataset: &Dataset) -> std::io::Result<()> {
    for s in dataset.sentences() {
        for (i, t) in s.iter().enumerate() {
            writeln!(
                w,
                "{}\t{}\t_\t{}\t{}\t_\t_\t_\t_\t_",
                i + 1,
                t.form,
                t.label,
                t.label
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_conllu(w: &mut dyn Write, dataset: &Dataset) -> std::io::Result<()> {
    for s in dataset.sentences() {
        for (i, t) in s.iter().enumerate() {
            writeln!(w, "{}\t{}\t_\t{}\t_\t_\t_\t_\t_\t_", i + 1, t.form, t.label)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_conll_ner(w: &mut dyn Write, dataset: &Dataset) -> std::io::Result<()> {
    for s in dataset.sentences() {
        for t in s {
            writeln!(w, "{} {}", t.form, t.label)?;
        }
        writeln!(w)?;
    }
    Ok(())
}
