use super::Dataset;
use crate::error::{Error, Result};
use crate::eval::{extract_entities, TagScheme};

pub const IOBES_PREFIXES: [char; 4] = ['B', 'I', 'E', 'S'];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanTag<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
    End(&'a str),
    Single(&'a str),
}

impl<'a> SpanTag<'a> {
    pub fn entity_type(self) -> Option<&'a str> {
        match self {
            SpanTag::Outside => None,
            SpanTag::Begin(t) | SpanTag::Inside(t) | SpanTag::End(t) | SpanTag::Single(t) => {
                Some(t)
            }
        }
    }
}

/// Parses `O` or `<P>-TYPE` with `P` one of B, I, E, S.
pub fn split_tag(tag: &str) -> Option<SpanTag<'_>> {
    if tag == "O" {
        return Some(SpanTag::Outside);
    }
    let (prefix, ty) = tag.split_once('-')?;
    if ty.is_empty() {
        return None;
    }
    match prefix {
        "B" => Some(SpanTag::Begin(ty)),
        "I" => Some(SpanTag::Inside(ty)),
        "E" => Some(SpanTag::End(ty)),
        "S" => Some(SpanTag::Single(ty)),
        _ => None,
    }
}

/// The full IOBES inventory for the given entity types: `O` plus four
/// prefixed tags per type.
pub fn iobes_alphabet<S: AsRef<str>>(types: &[S]) -> Vec<String> {
    let mut out = vec!["O".to_string()];
    for t in types {
        for p in IOBES_PREFIXES {
            out.push(format!("{p}-{}", t.as_ref()));
        }
    }
    out
}

/// IOB1 (an `I-` tag opens a span unless it continues one of the same
/// type) to BIO. Already-BIO input is returned unchanged.
pub fn iob1_to_bio<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    let mut out = Vec::with_capacity(labels.len());
    let mut prev: Option<&str> = None;
    for l in labels {
        let l = l.as_ref();
        match split_tag(l) {
            Some(SpanTag::Inside(ty)) if prev != Some(ty) => out.push(format!("B-{ty}")),
            _ => out.push(l.to_string()),
        }
        prev = split_tag(l).and_then(SpanTag::entity_type);
    }
    out
}

/// Converts one BIO sequence to IOBES. An `I-X` that does not continue an
/// `X` span is repaired into a span start; the number of repairs is
/// returned alongside.
pub fn bio_to_iobes<S: AsRef<str>>(labels: &[S]) -> Result<(Vec<String>, usize)> {
    let parsed: Vec<SpanTag<'_>> = labels
        .iter()
        .map(|l| {
            split_tag(l.as_ref())
                .filter(|t| matches!(t, SpanTag::Outside | SpanTag::Begin(_) | SpanTag::Inside(_)))
                .ok_or_else(|| Error::InvalidTag(l.as_ref().to_string()))
        })
        .collect::<Result<_>>()?;

    // span starts after repair
    let mut repairs = 0;
    let mut starts = vec![false; parsed.len()];
    let mut prev_type: Option<&str> = None;
    for (i, t) in parsed.iter().enumerate() {
        match *t {
            SpanTag::Begin(_) => starts[i] = true,
            SpanTag::Inside(ty) if prev_type != Some(ty) => {
                starts[i] = true;
                repairs += 1;
            }
            _ => {}
        }
        prev_type = t.entity_type();
    }

    let mut out = Vec::with_capacity(parsed.len());
    for (i, t) in parsed.iter().enumerate() {
        let Some(ty) = t.entity_type() else {
            out.push("O".to_string());
            continue;
        };
        let continues = parsed
            .get(i + 1)
            .is_some_and(|n| matches!(n, SpanTag::Inside(nt) if *nt == ty) && !starts[i + 1]);
        let prefix = match (starts[i], continues) {
            (true, false) => 'S',
            (true, true) => 'B',
            (false, true) => 'I',
            (false, false) => 'E',
        };
        out.push(format!("{prefix}-{ty}"));
    }
    Ok((out, repairs))
}

/// IOBES back to BIO. Spans are those the shared-task chunker reads, so
/// ill-formed input such as `S-PER E-PER` keeps its two entities.
pub fn iobes_to_bio<S: AsRef<str>>(labels: &[S]) -> Result<Vec<String>> {
    let mut out = vec!["O".to_string(); labels.len()];
    for e in extract_entities(labels, TagScheme::Iobes)? {
        out[e.start] = format!("B-{}", e.kind);
        for tag in &mut out[e.start + 1..=e.end] {
            *tag = format!("I-{}", e.kind);
        }
    }
    Ok(out)
}

/// Relabels a BIO dataset with IOBES tags; returns the repair count.
pub fn to_iobes(dataset: &Dataset) -> Result<(Dataset, usize)> {
    let mut repairs = 0;
    let mut labels = Vec::with_capacity(dataset.len());
    for s in dataset.labels() {
        let (l, r) = bio_to_iobes(&s)?;
        repairs += r;
        labels.push(l);
    }
    Ok((dataset.with_labels(&labels)?, repairs))
}

pub fn from_iobes(dataset: &Dataset) -> Result<Dataset> {
    let labels = dataset
        .labels()
        .iter()
        .map(|s| iobes_to_bio(s))
        .collect::<Result<Vec<_>>>()?;
    dataset.with_labels(&labels)
}
