mod common;

use proptest::prelude::*;
use sparsetag_core::crf::{self, CrfModel, Lattice, TrainConfig};
use sparsetag_core::features::FeatureVector;

use common::{all_paths, enumerate_lattice};

fn lattice_strategy() -> impl Strategy<Value = Lattice<f64>> {
    (1usize..=5, 1usize..=4).prop_flat_map(|(n, l)| {
        (
            prop::collection::vec(-4.0f64..4.0, n * l),
            prop::collection::vec(-4.0f64..4.0, l * l),
        )
            .prop_map(move |(e, t)| Lattice::new(n, l, e, t))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn agrees_with_enumeration(lat in lattice_strategy()) {
        let oracle = enumerate_lattice(&lat);
        prop_assert!((lat.log_partition() - oracle.log_z).abs() < 1e-10);
        for (a, b) in lat.marginals().iter().zip(&oracle.marginals) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        prop_assert_eq!(lat.viterbi(), oracle.best);
    }

    #[test]
    fn marginals_normalize(lat in lattice_strategy()) {
        let m = lat.marginals();
        for row in m.chunks(lat.labels()) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn viterbi_score_is_bounded(lat in lattice_strategy()) {
        let best = lat.path_score(&lat.viterbi());
        let log_z = lat.log_partition();
        prop_assert!(best <= log_z + 1e-12);
        for p in all_paths(lat.len(), lat.labels()) {
            prop_assert!(lat.path_score(&p) <= best + 1e-12);
        }
    }

    #[test]
    fn position_shift_keeps_argmax(lat in lattice_strategy(), c in -10.0f64..10.0, pos in 0usize..5) {
        let t = pos % lat.len();
        let mut shifted = lat.clone();
        for y in 0..lat.labels() {
            *shifted.emission_mut(t, y) += c;
        }
        prop_assert!((shifted.log_partition() - lat.log_partition() - c).abs() < 1e-9);
        let (a, b) = (lat.viterbi(), shifted.viterbi());
        prop_assert!((lat.path_score(&a) - lat.path_score(&b)).abs() < 1e-9);
    }
}

#[test]
fn three_by_three_log_z() {
    let em: Vec<f64> = (0..9).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
    let tr: Vec<f64> = (0..9).map(|i| ((i * 53 % 7) as f64 - 3.0) / 2.0).collect();
    let lat = Lattice::new(3, 3, em, tr);
    let paths = all_paths(3, 3);
    assert_eq!(paths.len(), 27);
    let brute = paths
        .iter()
        .map(|p| lat.path_score(p).exp())
        .sum::<f64>()
        .ln();
    assert!((lat.log_partition() - brute).abs() < 1e-10);
}

fn ind(name: &str) -> FeatureVector<f64> {
    FeatureVector::indicators([name.to_string()])
}

#[test]
fn trained_model_survives_disk_round_trip() {
    let xs: Vec<Vec<FeatureVector<f64>>> = (0..30)
        .map(|i| (0..4).map(|j| ind(&format!("w{}", (i + j) % 5))).collect())
        .collect();
    let ys: Vec<Vec<String>> = (0..30)
        .map(|i| {
            (0..4)
                .map(|j| {
                    if (i + j) % 5 < 2 {
                        "X".into()
                    } else {
                        "Y".into()
                    }
                })
                .collect()
        })
        .collect();
    let (model, _) = crf::train(&xs, &ys, &TrainConfig::default()).unwrap();
    for (x, y) in xs.iter().zip(&ys) {
        assert_eq!(&model.tag_labels(x), y);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    sparsetag_core::io::write_atomic(&path, |w| model.write(w)).unwrap();
    let back = CrfModel::<f64>::read(&path).unwrap();
    for x in &xs {
        assert_eq!(back.score_lattice(x), model.score_lattice(x));
    }
}

#[test]
fn training_in_f32() {
    let sent = vec![
        FeatureVector::<f32>::indicators(["a".to_string()]),
        FeatureVector::indicators(["b".to_string()]),
    ];
    let xs = vec![sent; 20];
    let ys = vec![vec!["A", "B"]; 20];
    let (model, _) = crf::train(&xs, &ys, &TrainConfig::default()).unwrap();
    assert_eq!(model.tag_labels(&xs[0]), ["A", "B"]);
}
