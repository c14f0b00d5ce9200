use std::collections::HashMap;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::io::read_to_string;

/// The 12 coarse universal POS tags.
pub const UNIVERSAL_TAGS_12: [&str; 12] = [
    "VERB", "NOUN", "PRON", "ADJ", "ADV", "ADP", "CONJ", "DET", "NUM", "PRT", "X", ".",
];

/// The 17 Universal Dependencies UPOS tags.
pub const UNIVERSAL_TAGS_UD: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN",
    "PUNCT", "SCONJ", "SYM", "VERB", "X",
];

/// Fine-grained treebank tag to universal tag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagMap {
    map: HashMap<String, String>,
}

impl TagMap {
    pub fn identity<S: AsRef<str>>(tags: &[S]) -> Self {
        tags.iter()
            .map(|t| (t.as_ref().to_string(), t.as_ref().to_string()))
            .collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    /// Two tab-separated columns `fine<TAB>universal`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(fine), Some(univ), None) if !fine.is_empty() && !univ.is_empty() => {
                    map.insert(fine.to_string(), univ.trim().to_string());
                }
                _ => return Err(Error::parse(i + 1, "expected `fine<TAB>universal`")),
            }
        }
        Ok(TagMap { map })
    }

    pub fn get(&self, fine: &str) -> Option<&str> {
        self.map.get(fine).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl FromIterator<(String, String)> for TagMap {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        TagMap {
            map: iter.into_iter().collect(),
        }
    }
}

pub fn map_universal(dataset: &Dataset, tagmap: &TagMap) -> Result<Dataset> {
    let labels = dataset
        .sentences()
        .iter()
        .map(|s| {
            s.iter()
                .map(|t| {
                    tagmap
                        .get(&t.label)
                        .map(str::to_string)
                        .ok_or_else(|| Error::UnmappedTag(t.label.clone()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    dataset.with_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_conllx, PosColumn};
    use std::collections::BTreeMap;

    const TREEBANK: &str = "1\tThe\t_\tDT\tDT\t_\n2\tdogs\t_\tNNS\tNNS\t_\n3\tbark\t_\tVBP\tVBP\t_\n4\t.\t_\t.\t.\t_\n\n\
1\tA\t_\tDT\tDT\t_\n2\tcat\t_\tNN\tNN\t_\n3\tsat\t_\tVBD\tVBD\t_\n";

    const MAP: &str = "# en-ptb subset\nDT\tDET\nNN\tNOUN\nNNS\tNOUN\nVBD\tVERB\nVBP\tVERB\n.\t.\n";

    #[test]
    fn maps_fixture_to_expected_histogram() {
        let d = parse_conllx(TREEBANK, PosColumn::Fine).unwrap();
        let m = TagMap::parse(MAP).unwrap();
        let u = map_universal(&d, &m).unwrap();
        let mut hist = BTreeMap::new();
        for t in u.tokens() {
            *hist.entry(t.label.as_str()).or_insert(0) += 1;
        }
        let expected: BTreeMap<&str, i32> = [(".", 1), ("DET", 2), ("NOUN", 2), ("VERB", 2)]
            .into_iter()
            .collect();
        assert_eq!(hist, expected);
        assert!(u
            .tokens()
            .all(|t| UNIVERSAL_TAGS_12.contains(&t.label.as_str())));
    }

    #[test]
    fn identity_map_is_noop_and_unmapped_tag_is_named() {
        let d = parse_conllx(TREEBANK, PosColumn::Fine).unwrap();
        let id = TagMap::identity(&["DT", "NN", "NNS", "VBD", "VBP", "."]);
        assert_eq!(map_universal(&d, &id).unwrap(), d);
        let partial = TagMap::parse("DT\tDET\n").unwrap();
        match map_universal(&d, &partial) {
            Err(Error::UnmappedTag(t)) => assert_eq!(t, "NNS"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_map_line() {
        assert!(matches!(
            TagMap::parse("DT DET\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
