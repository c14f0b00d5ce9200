use std::collections::BTreeMap;
use std::path::PathBuf;

use proptest::prelude::*;
use sparsetag_core::corpus::{
    from_iobes, map_universal, read_conll_ner, read_conllu, read_conllx, subset_first_n, to_iobes,
    write_conllx, Dataset, NerFormat, PosColumn, TagMap, Task, Token, UNIVERSAL_TAGS_12,
};
use sparsetag_core::eval::{extract_entities, Entity, TagScheme};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn labels(ds: &Dataset, i: usize) -> Vec<&str> {
    ds.sentences()[i].iter().map(|t| t.label.as_str()).collect()
}

#[test]
fn conllu_three_sentences() {
    let ds = read_conllu(&fixture("three.conllu")).unwrap();
    assert_eq!(ds.len(), 3);
    assert_eq!(labels(&ds, 0), ["DET", "NOUN", "VERB", "PUNCT"]);
    let forms: Vec<&str> = ds.sentences()[1].iter().map(|t| t.form.as_str()).collect();
    assert_eq!(forms, ["de", "el", "gato"]);
    assert_eq!(labels(&ds, 1), ["ADP", "DET", "NOUN"]);
    assert_eq!(labels(&ds, 2), ["VERB", "PUNCT"]);
}

#[test]
fn conllx_maps_to_expected_histogram() {
    let ds = read_conllx(&fixture("tiny.conllx"), PosColumn::Fine).unwrap();
    assert_eq!(ds.token_count(), 7);
    let map = TagMap::read(&fixture("tiny.map")).unwrap();
    let mapped = map_universal(&ds, &map).unwrap();
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    for t in mapped.tokens() {
        *hist.entry(t.label.clone()).or_default() += 1;
        assert!(UNIVERSAL_TAGS_12.contains(&t.label.as_str()));
    }
    let want: BTreeMap<String, usize> = [
        ("DET", 1),
        ("NOUN", 1),
        ("VERB", 2),
        ("PRON", 1),
        ("ADV", 1),
        (".", 1),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    assert_eq!(hist, want);
}

#[test]
fn conllx_file_round_trip() {
    let ds = read_conllx(&fixture("tiny.conllx"), PosColumn::Fine).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.conllx");
    sparsetag_core::io::write_atomic(&path, |w| write_conllx(w, &ds)).unwrap();
    assert_eq!(read_conllx(&path, PosColumn::Fine).unwrap(), ds);
}

#[test]
fn ner_fixture_spans() {
    let ds = read_conll_ner(&fixture("two.ner2003"), NerFormat::Conll2003).unwrap();
    assert_eq!(ds.len(), 2);
    assert_eq!(labels(&ds, 0), ["B-ORG", "O", "B-MISC", "O", "O"]);
    let e = extract_entities(&labels(&ds, 1), TagScheme::Bio).unwrap();
    assert_eq!(
        e,
        [Entity {
            kind: "PER".into(),
            start: 0,
            end: 1
        }]
    );
    let (iobes, repairs) = to_iobes(&ds).unwrap();
    assert_eq!(repairs, 0);
    assert_eq!(labels(&iobes, 0), ["S-ORG", "O", "S-MISC", "O", "O"]);
    assert_eq!(labels(&iobes, 1), ["B-PER", "E-PER"]);
    assert_eq!(from_iobes(&iobes).unwrap(), ds);
}

fn numbered(n: usize) -> Dataset {
    let sents = (0..n)
        .map(|i| vec![Token::new(format!("s{i}"), "X")])
        .collect();
    Dataset::new(Task::Pos, sents).unwrap()
}

#[test]
fn first_150_of_5190() {
    let ds = numbered(5190);
    let sub = subset_first_n(&ds, 150).unwrap();
    assert_eq!(sub.len(), 150);
    assert_eq!(sub.sentences()[0], ds.sentences()[0]);
    assert!((sub.len() as f64 / ds.len() as f64 * 100.0 - 2.89).abs() < 0.005);
    assert_eq!(subset_first_n(&ds, 10_000).unwrap().len(), 5190);
    assert!(subset_first_n(&ds, 0).is_err());
}

proptest! {
    #[test]
    fn subsets_are_prefixes(n in 1usize..60, a in 1usize..80, b in 1usize..80) {
        let ds = numbered(n);
        let (lo, hi) = (a.min(b), a.max(b));
        let small = subset_first_n(&ds, lo).unwrap();
        let large = subset_first_n(&ds, hi).unwrap();
        prop_assert_eq!(small.sentences(), &large.sentences()[..small.len()]);
        prop_assert_eq!(large.len(), hi.min(n));
    }
}
