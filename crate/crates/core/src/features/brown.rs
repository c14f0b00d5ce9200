use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_to_string;

/// Word to Brown-cluster bit-string path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterTable {
    paths: HashMap<String, String>,
}

impl ClusterTable {
    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    /// `bitstring<TAB>word<TAB>count` lines, as written by the usual Brown
    /// clustering tool.
    pub fn parse(text: &str) -> Result<Self> {
        let mut paths = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 {
                return Err(Error::parse(
                    i + 1,
                    "expected `bitstring<TAB>word<TAB>count`",
                ));
            }
            let (bits, word) = (cols[0], cols[1]);
            if bits.is_empty() || !bits.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::parse(i + 1, format!("bad cluster path `{bits}`")));
            }
            paths.insert(word.to_string(), bits.to_string());
        }
        Ok(ClusterTable { paths })
    }

    pub fn insert(&mut self, word: impl Into<String>, path: impl Into<String>) -> Result<()> {
        let path = path.into();
        if path.is_empty() || !path.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidArgument(format!("bad cluster path `{path}`")));
        }
        self.paths.insert(word.into(), path);
        Ok(())
    }

    pub fn path(&self, word: &str) -> Option<&str> {
        self.paths.get(word).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// `bp<p>=<prefix>` per length, where paths shorter than `p` contribute
/// the whole path.
pub fn brown_features(path: &str, lengths: &[usize]) -> Vec<String> {
    lengths
        .iter()
        .map(|&p| format!("bp{p}={}", &path[..p.min(path.len())]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LENGTHS: [usize; 4] = [4, 6, 10, 20];

    #[test]
    fn prefixes() {
        assert_eq!(
            brown_features("0110110101", &LENGTHS),
            [
                "bp4=0110",
                "bp6=011011",
                "bp10=0110110101",
                "bp20=0110110101"
            ]
        );
        assert_eq!(
            brown_features("01", &LENGTHS),
            ["bp4=01", "bp6=01", "bp10=01", "bp20=01"]
        );
    }

    #[test]
    fn cluster_file() {
        let c = ClusterTable::parse("0110\tthe\t1000\n0111\ta\t500\n").unwrap();
        assert_eq!(c.path("the"), Some("0110"));
        assert_eq!(c.path("zzz"), None);
        assert!(ClusterTable::parse("01x\tthe\t3\n").is_err());
    }
}
