use crate::error::{Error, Result};

use super::escape_form;

fn is_number(w: &str) -> bool {
    w.chars().any(|c| c.is_ascii_digit())
        && w.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-' | '+' | '/' | ':'))
}

fn is_title_case(w: &str) -> bool {
    let mut chars = w.chars();
    match chars.next() {
        Some(c) if c.is_uppercase() => chars.all(|c| !c.is_uppercase()),
        _ => false,
    }
}

fn is_non_alnum(w: &str) -> bool {
    !w.chars().any(char::is_alphanumeric)
}

/// Feature-rich templates for position `t`: word unigrams in ±2, pairs of
/// the current word with each word up to 9 away on either side, and the
/// contiguous 2- to 5-grams around `t`. With `include_chars`, shape flags
/// and 1–4 character prefixes/suffixes of the current word are added.
/// Templates reaching outside the sentence are skipped.
pub fn rich_features<S: AsRef<str>>(
    sentence: &[S],
    t: usize,
    include_chars: bool,
) -> Result<Vec<String>> {
    let n = sentence.len() as isize;
    if t as isize >= n {
        return Err(Error::InvalidArgument(format!(
            "position {t} outside sentence of length {n}"
        )));
    }
    let t = t as isize;
    let form = |j: isize| escape_form(sentence[(t + j) as usize].as_ref());
    let inside = |j: isize| (0..n).contains(&(t + j));
    let mut out = Vec::new();

    if include_chars {
        let w = sentence[t as usize].as_ref();
        if is_number(w) {
            out.push("num=1".to_string());
        }
        if is_title_case(w) {
            out.push("title=1".to_string());
        }
        if is_non_alnum(w) {
            out.push("nonalnum=1".to_string());
        }
        let chars: Vec<char> = w.chars().collect();
        for i in 1..=4.min(chars.len()) {
            let pre: String = chars[..i].iter().collect();
            let suf: String = chars[chars.len() - i..].iter().collect();
            out.push(format!("pre{i}={}", escape_form(&pre)));
            out.push(format!("suf{i}={}", escape_form(&suf)));
        }
    }

    for j in -2..=2 {
        if inside(j) {
            out.push(format!("w[{j}]={}", form(j)));
        }
    }
    for i in 1..=9 {
        for j in [i, -i] {
            if inside(j) {
                out.push(format!("w[0]|w[{j}]={}|{}", form(0), form(j)));
            }
        }
    }
    // (start, end) offsets of the contiguous n-gram windows
    let mut spans: Vec<(isize, isize)> = Vec::new();
    spans.extend((-2..=1).map(|j| (j, j + 1)));
    spans.extend((-2..=0).map(|j| (j, j + 2)));
    spans.extend((-1..=0).map(|j| (j - 1, j + 2)));
    spans.push((-2, 2));
    for (a, b) in spans {
        if inside(a) && inside(b) {
            let words: Vec<_> = (a..=b).map(&form).collect();
            out.push(format!("w[{a}..{b}]={}", words.join("|")));
        }
    }
    Ok(out)
}
