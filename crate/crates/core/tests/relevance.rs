use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use texclass::features::{feature_group, feature_names, FeatureTable};
use texclass::pipeline::{relevance_report, run_experiment_on_table, ExperimentConfig, Stage};
use texclass::{GaConfig, SourceSelection};

/// Unit noise everywhere; every `f9` column also carries a class offset of
/// `signal`. The offset is small enough that the all-features mask loses it
/// among the noise directions.
fn table(selection: SourceSelection, signal: f64, seed: u64) -> FeatureTable {
    let names = feature_names(selection);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ids, mut labels, mut rows) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..60 {
        let k = i % 3;
        ids.push(format!("s{i:02}"));
        labels.push(format!("class{k}"));
        rows.push(
            names
                .iter()
                .map(|n| {
                    let noise: f64 = rng.sample(StandardNormal);
                    let offset = if feature_group(n) == "f9" {
                        signal * k as f64
                    } else {
                        0.0
                    };
                    noise + offset
                })
                .collect(),
        );
    }
    FeatureTable::new(ids, labels, names, rows).unwrap()
}

fn config(case: SourceSelection, permutations: usize, out: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        output: out.to_path_buf(),
        cases: vec![case],
        permutations,
        stages: vec![Stage::Ga],
        ga: GaConfig {
            population: 20,
            max_generations: 25,
            ..GaConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

#[test]
fn planted_group_ranks_first() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_experiment_on_table(
        &table(SourceSelection::ORIGINAL, 1.0, 7),
        &config(SourceSelection::ORIGINAL, 8, dir.path()),
    )
    .unwrap();
    let rep = relevance_report(&res);
    assert_eq!(rep[0].group, "f9", "{rep:?}");
}

#[test]
fn null_fixture_has_flat_relevance() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_experiment_on_table(
        &table(SourceSelection::ALL, 0.0, 11),
        &config(SourceSelection::ALL, 50, dir.path()),
    )
    .unwrap();
    let rep = relevance_report(&res);
    let freqs: Vec<f64> = rep.iter().map(|e| e.frequency).collect();
    let spread = freqs.iter().cloned().fold(f64::MIN, f64::max)
        - freqs.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.15, "spread {spread}: {rep:?}");
}
