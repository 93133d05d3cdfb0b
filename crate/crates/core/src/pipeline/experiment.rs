use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, FitnessMode, GaMode, Stage};
use super::report;
use crate::bayes::{self, ConfusionMatrix};
use crate::dataset::{self, permute_split_labels, ImageSample, SplitSpec};
use crate::error::{Error, Result};
use crate::features::{extract_table, FeatureConfig, FeatureTable};
use crate::filters::SourceSelection;
use crate::reduce::{ga_fitness, ga_select, pca_fit, pca_project, GaConfig, Mask};
use crate::rng::derive_seed;

/// Fraction of the training fold used to fit inside the GA fitness.
pub const INNER_TRAIN_FRACTION: f64 = 0.75;

const GA_STREAM: u64 = 1;
const INNER_SPLIT_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    /// Mean success ratio over permutations.
    pub mean: f64,
    /// Population standard deviation over permutations.
    pub std: f64,
    /// Success ratio of each permutation, in permutation order.
    pub successes: Vec<f64>,
}

impl StageStats {
    fn from_successes(successes: Vec<f64>) -> Self {
        let n = successes.len() as f64;
        let mean = successes.iter().sum::<f64>() / n;
        let var = successes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
            successes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: u8,
    /// Source flags ordered (V, E, C, G, O).
    pub flags: [bool; 5],
    pub raw: Option<StageStats>,
    pub pca: Option<StageStats>,
    pub ga: Option<StageStats>,
    /// Features available to the case.
    pub nf0: usize,
    /// Mean number of features in the GA masks.
    pub nf_ga: Option<f64>,
    /// Mean PCA components over permutations (PCA stage).
    pub pca_components: Option<f64>,
    pub final_stage: Stage,
    /// Confusion matrix of the final stage averaged over permutations (absolute counts).
    pub confusion: ConfusionMatrix,
    pub feature_names: Vec<String>,
    /// Fraction of permutations whose GA mask kept each feature; empty without a GA stage.
    pub selection_frequency: Vec<f64>,
}

impl CaseResult {
    pub fn stage(&self, stage: Stage) -> Option<&StageStats> {
        match stage {
            Stage::Raw => self.raw.as_ref(),
            Stage::Pca => self.pca.as_ref(),
            Stage::Ga => self.ga.as_ref(),
        }
    }

    pub fn selection(&self) -> SourceSelection {
        SourceSelection::from_flags(self.flags).expect("case results hold valid flags")
    }
}

/// Seed of permutation `p` of `case`: `derive_seed(base, [case, p])`.
pub fn permutation_seed(base: u64, case: u8, permutation: usize) -> u64 {
    derive_seed(base, &[u64::from(case), permutation as u64])
}

/// Everything one permutation produced.
struct PermutationOutcome {
    success: BTreeMap<Stage, f64>,
    confusion: ConfusionMatrix,
    mask: Option<Mask>,
    components: Option<usize>,
}

/// Stratified split of `rows`: per class, the first `round(fraction * n_c)` after a seeded shuffle.
fn stratified_split(
    rows: &[usize],
    labels: &[String],
    fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        by_class.entry(labels[r].as_str()).or_default().push(r);
    }
    let mut rng = crate::rng::seeded(seed);
    let (mut fit, mut eval) = (Vec::new(), Vec::new());
    for (_, mut members) in by_class {
        members.shuffle(&mut rng);
        // The model needs two samples per class; a class too small to also
        // spare one for evaluation stays entirely on the fitting side.
        let k = if members.len() < 3 {
            members.len()
        } else {
            dataset::train_size(members.len(), fraction).clamp(2, members.len() - 1)
        };
        eval.extend_from_slice(&members[k..]);
        members.truncate(k);
        fit.extend(members);
    }
    (fit, eval)
}

fn evaluate_masked(
    mask: &Mask,
    train: &DMatrix<f64>,
    train_labels: &[String],
    test: &DMatrix<f64>,
    test_labels: &[String],
    threshold: f64,
) -> Result<(f64, ConfusionMatrix)> {
    let cols = mask.indices();
    let tr = train.select_columns(&cols);
    let te = test.select_columns(&cols);
    let pca = pca_fit(&tr, threshold)?;
    let model = bayes::fit(&pca_project(&pca, &tr)?, train_labels)?;
    bayes::evaluate(&model, &pca_project(&pca, &te)?, test_labels)
}

/// Runs the GA for one training fold and returns the best mask.
fn search_mask(
    table: &FeatureTable,
    cols: &[usize],
    train_rows: &[usize],
    test_rows: &[usize],
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Mask> {
    let (fit_rows, eval_rows) = match config.fitness_mode {
        FitnessMode::Inner => stratified_split(
            train_rows,
            &table.labels,
            INNER_TRAIN_FRACTION,
            derive_seed(seed, &[INNER_SPLIT_STREAM]),
        ),
        FitnessMode::TestFold => (train_rows.to_vec(), test_rows.to_vec()),
    };
    let fit_x = table.submatrix(&fit_rows, cols);
    let fit_y = table.labels_of(&fit_rows);
    let eval_x = table.submatrix(&eval_rows, cols);
    let eval_y = table.labels_of(&eval_rows);
    let ga = GaConfig {
        seed: derive_seed(seed, &[GA_STREAM]),
        ..config.ga
    };
    let outcome = ga_select(
        cols.len(),
        |m: &Mask| ga_fitness(m, &fit_x, &fit_y, &eval_x, &eval_y, config.pca_threshold),
        &ga,
    )?;
    Ok(outcome.best.mask)
}

fn run_permutation(
    table: &FeatureTable,
    cols: &[usize],
    seed: u64,
    fixed_mask: Option<&Mask>,
    config: &ExperimentConfig,
) -> Result<PermutationOutcome> {
    let split = permute_split_labels(
        &table.ids,
        &table.labels,
        SplitSpec::with_fraction(seed, config.train_fraction),
    )?;
    let train = table.submatrix(&split.train, cols);
    let test = table.submatrix(&split.test, cols);
    let train_y = table.labels_of(&split.train);
    let test_y = table.labels_of(&split.test);

    let final_stage = config.final_stage();
    let mut success = BTreeMap::new();
    let mut confusion = None;
    let mut mask = None;
    let mut components = None;
    for &stage in &config.stages {
        let (s, cm) = match stage {
            Stage::Raw => {
                let model = bayes::fit(&train, &train_y)?;
                bayes::evaluate(&model, &test, &test_y)?
            }
            Stage::Pca => {
                let pca = pca_fit(&train, config.pca_threshold)?;
                components = Some(pca.n_components());
                let model = bayes::fit(&pca_project(&pca, &train)?, &train_y)?;
                bayes::evaluate(&model, &pca_project(&pca, &test)?, &test_y)?
            }
            Stage::Ga => {
                let m = match fixed_mask {
                    Some(m) => m.clone(),
                    None => search_mask(table, cols, &split.train, &split.test, config, seed)?,
                };
                let r =
                    evaluate_masked(&m, &train, &train_y, &test, &test_y, config.pca_threshold)?;
                mask = Some(m);
                r
            }
        };
        success.insert(stage, s);
        if stage == final_stage {
            confusion = Some(cm);
        }
    }
    Ok(PermutationOutcome {
        success,
        confusion: confusion.expect("final stage is among the stages"),
        mask,
        components,
    })
}

/// Runs every permutation of one case over the cached feature table.
pub fn run_case(
    table: &FeatureTable,
    selection: SourceSelection,
    config: &ExperimentConfig,
) -> Result<CaseResult> {
    config.validate()?;
    let case = selection.case();
    let cols = table.columns_for(selection)?;
    let wrap = |p: usize, e: Error| Error::Permutation {
        case,
        permutation: p,
        seed: permutation_seed(config.seed, case, p),
        source: Box::new(e),
    };

    let fixed_mask = if config.ga_mode == GaMode::FixedMask && config.stages.contains(&Stage::Ga) {
        let seed = permutation_seed(config.seed, case, 0);
        let split = permute_split_labels(
            &table.ids,
            &table.labels,
            SplitSpec::with_fraction(seed, config.train_fraction),
        )
        .map_err(|e| wrap(0, e))?;
        Some(
            search_mask(table, &cols, &split.train, &split.test, config, seed)
                .map_err(|e| wrap(0, e))?,
        )
    } else {
        None
    };

    let outcomes: Vec<PermutationOutcome> = (0..config.permutations)
        .into_par_iter()
        .map(|p| {
            let seed = permutation_seed(config.seed, case, p);
            run_permutation(table, &cols, seed, fixed_mask.as_ref(), config).map_err(|e| wrap(p, e))
        })
        .collect::<Result<_>>()?;

    let stats = |stage: Stage| {
        config.stages.contains(&stage).then(|| {
            StageStats::from_successes(outcomes.iter().map(|o| o.success[&stage]).collect())
        })
    };
    let p = outcomes.len() as f64;
    let mut confusion = ConfusionMatrix::zeros(outcomes[0].confusion.classes.clone());
    for o in &outcomes {
        confusion.add(&o.confusion)?;
    }
    confusion.scale(1.0 / p);

    let feature_names: Vec<String> = cols.iter().map(|&c| table.names[c].clone()).collect();
    let (nf_ga, selection_frequency) = if config.stages.contains(&Stage::Ga) {
        let mut freq = vec![0.0; cols.len()];
        let mut total = 0usize;
        for o in &outcomes {
            let m = o.mask.as_ref().expect("GA stage ran");
            total += m.count();
            for i in m.indices() {
                freq[i] += 1.0;
            }
        }
        freq.iter_mut().for_each(|f| *f /= p);
        (Some(total as f64 / p), freq)
    } else {
        (None, Vec::new())
    };
    let pca_components = config.stages.contains(&Stage::Pca).then(|| {
        outcomes
            .iter()
            .map(|o| o.components.unwrap_or(0) as f64)
            .sum::<f64>()
            / p
    });

    Ok(CaseResult {
        case,
        flags: selection.flags(),
        raw: stats(Stage::Raw),
        pca: stats(Stage::Pca),
        ga: stats(Stage::Ga),
        nf0: cols.len(),
        nf_ga,
        pca_components,
        final_stage: config.final_stage(),
        confusion,
        feature_names,
        selection_frequency,
    })
}

/// Cache key over sample ids, labels, pixels and every extraction parameter.
pub fn cache_key(samples: &[ImageSample], features: &FeatureConfig) -> String {
    let mut h = Sha256::new();
    let mut order: Vec<&ImageSample> = samples.iter().collect();
    order.sort_by(|a, b| a.id().cmp(b.id()));
    for s in order {
        h.update(s.id().as_bytes());
        h.update([0]);
        h.update(s.label().as_bytes());
        h.update([0]);
        h.update((s.pixels().height() as u64).to_le_bytes());
        h.update((s.pixels().width() as u64).to_le_bytes());
        for v in s.pixels().data() {
            h.update(v.to_le_bytes());
        }
    }
    let f = &features.filters;
    h.update(features.levels.to_le_bytes());
    for v in [
        features.tsallis_q,
        f.gaussian_sigma,
        f.canny_sigma,
        f.canny_low_ratio,
        f.canny_high_percentile,
    ] {
        h.update(v.to_le_bytes());
    }
    for v in [
        features.sato.dimension,
        features.sato.delay,
        features.sato.horizon,
    ] {
        h.update((v as u64).to_le_bytes());
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads the feature table named by the config, extracting and caching it if needed.
pub fn load_or_extract(config: &ExperimentConfig) -> Result<FeatureTable> {
    if let Some(cache) = &config.cache {
        if cache.is_file() {
            return FeatureTable::read_csv(cache);
        }
    }
    let root = config
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("config needs `dataset` or an existing `cache`".into()))?;
    let samples = dataset::load_dataset(root)?;
    let features = config.feature_config();
    let path: PathBuf = match &config.cache {
        Some(p) => p.clone(),
        None => config
            .output
            .join(format!("features-{}.csv", cache_key(&samples, &features))),
    };
    if path.is_file() {
        return FeatureTable::read_csv(&path);
    }
    let table = extract_table(&samples, &features)?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    table.write_csv(&path)?;
    Ok(table)
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    // 0 lets rayon pick one thread per core.
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs `f` on a dedicated pool of `workers` threads (0 for one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    thread_pool(workers)?.install(f)
}

/// Runs every configured case over an already extracted table and writes the result files.
pub fn run_experiment_on_table(
    table: &FeatureTable,
    config: &ExperimentConfig,
) -> Result<Vec<CaseResult>> {
    config.validate()?;
    let pool = thread_pool(config.workers)?;
    let results = pool.install(|| {
        config
            .cases
            .iter()
            .map(|&sel| run_case(table, sel, config))
            .collect::<Result<Vec<_>>>()
    })?;
    report::write_outputs(&config.output, &results)?;
    Ok(results)
}

/// Extracts (or loads cached) features, runs every configured case and writes
/// `results.csv`, `results.json` and one confusion matrix per case to the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<CaseResult>> {
    config.validate()?;
    std::fs::create_dir_all(&config.output).map_err(|e| Error::io(&config.output, e))?;
    let pool = thread_pool(config.workers)?;
    let table = pool.install(|| load_or_extract(config))?;
    run_experiment_on_table(&table, config)
}

/// One permutation of one case at a single stage, as used by `classify`.
pub fn classify_once(
    table: &FeatureTable,
    selection: SourceSelection,
    seed: u64,
    stage: Stage,
    config: &ExperimentConfig,
) -> Result<f64> {
    let cfg = ExperimentConfig {
        stages: vec![stage],
        ..config.clone()
    };
    cfg.validate()?;
    let cols = table.columns_for(selection)?;
    let out = run_permutation(table, &cols, seed, None, &cfg)?;
    Ok(out.success[&stage])
}
