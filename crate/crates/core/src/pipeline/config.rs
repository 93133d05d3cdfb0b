use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{validate_tsallis_q, FeatureConfig, SatoParams};
use crate::filters::{FilterParams, SourceSelection};
use crate::reduce::GaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Pca,
    Ga,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Raw, Stage::Pca, Stage::Ga];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Raw => "raw",
            Stage::Pca => "pca",
            Stage::Ga => "ga",
        })
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" => Ok(Stage::Raw),
            "pca" => Ok(Stage::Pca),
            "ga" => Ok(Stage::Ga),
            other => Err(Error::Config(format!("unknown stage {other:?}"))),
        }
    }
}

/// Data the GA fitness is scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessMode {
    /// Stratified 75/25 split inside the training fold.
    Inner,
    /// The outer test fold.
    TestFold,
}

/// Whether the GA runs once per permutation or once per case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaMode {
    Experiment,
    /// The mask found on permutation 0 is reused for every permutation.
    FixedMask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    /// Explicit feature cache; loaded if present, written after extraction otherwise.
    pub cache: Option<PathBuf>,
    pub output: PathBuf,
    pub levels: u16,
    pub cases: Vec<SourceSelection>,
    pub permutations: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub pca_threshold: f64,
    pub tsallis_q: f64,
    pub filters: FilterParams,
    pub ga: GaConfig,
    pub fitness_mode: FitnessMode,
    pub ga_mode: GaMode,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            cache: None,
            output: PathBuf::from("results"),
            levels: 64,
            cases: SourceSelection::all_cases().collect(),
            permutations: 100,
            train_fraction: 0.6,
            seed: 0,
            stages: Stage::ALL.to_vec(),
            pca_threshold: 0.95,
            tsallis_q: 1.5,
            filters: FilterParams::default(),
            ga: GaConfig::default(),
            fitness_mode: FitnessMode::Inner,
            ga_mode: GaMode::Experiment,
            workers: 0,
        }
    }
}

/// Keys accepted in a config file.
pub const CONFIG_KEYS: &[&str] = &[
    "dataset",
    "cache",
    "output",
    "levels",
    "cases",
    "permutations",
    "train_fraction",
    "seed",
    "stages",
    "pca.threshold",
    "tsallis.q",
    "gaussian.sigma",
    "canny.sigma",
    "canny.low_ratio",
    "canny.high_percentile",
    "ga.population",
    "ga.mutation_rate",
    "ga.elitism",
    "ga.plateau_tol",
    "ga.max_generations",
    "ga.fitness_mode",
    "ga.mode",
    "workers",
];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

/// `"all"`, or a comma list of case numbers and `a-b` ranges.
fn parse_cases(v: &str) -> Result<Vec<SourceSelection>> {
    if v.trim() == "all" {
        return Ok(SourceSelection::all_cases().collect());
    }
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (
                parse::<u8>("cases", a.trim())?,
                parse::<u8>("cases", b.trim())?,
            ),
            None => {
                let c = parse::<u8>("cases", part)?;
                (c, c)
            }
        };
        for c in lo..=hi {
            out.push(SourceSelection::from_case(c).map_err(|e| Error::Config(e.to_string()))?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

impl ExperimentConfig {
    /// Parses flat `key = value` text. `#` starts a comment; unknown keys are
    /// rejected. Relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c = Self::default();
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "dataset" => c.dataset = Some(path(v)),
                "cache" => c.cache = Some(path(v)),
                "output" => c.output = path(v),
                "levels" => c.levels = parse(key, v)?,
                "cases" => c.cases = parse_cases(v)?,
                "permutations" => c.permutations = parse(key, v)?,
                "train_fraction" => c.train_fraction = parse(key, v)?,
                "seed" => c.seed = parse(key, v)?,
                "stages" => {
                    let mut s = v
                        .split(',')
                        .filter(|p| !p.trim().is_empty())
                        .map(Stage::from_str)
                        .collect::<Result<Vec<_>>>()?;
                    s.sort();
                    s.dedup();
                    c.stages = s;
                }
                "pca.threshold" => c.pca_threshold = parse(key, v)?,
                "tsallis.q" => c.tsallis_q = parse(key, v)?,
                "gaussian.sigma" => c.filters.gaussian_sigma = parse(key, v)?,
                "canny.sigma" => c.filters.canny_sigma = parse(key, v)?,
                "canny.low_ratio" => c.filters.canny_low_ratio = parse(key, v)?,
                "canny.high_percentile" => c.filters.canny_high_percentile = parse(key, v)?,
                "ga.population" => c.ga.population = parse(key, v)?,
                "ga.mutation_rate" => c.ga.mutation_rate = parse(key, v)?,
                "ga.elitism" => c.ga.elitism = parse(key, v)?,
                "ga.plateau_tol" => c.ga.plateau_tol = parse(key, v)?,
                "ga.max_generations" => c.ga.max_generations = parse(key, v)?,
                "ga.fitness_mode" => {
                    c.fitness_mode = match v {
                        "inner" => FitnessMode::Inner,
                        "test-fold" => FitnessMode::TestFold,
                        _ => {
                            return Err(Error::Config(format!(
                                "ga.fitness_mode: unknown mode {v:?}"
                            )))
                        }
                    }
                }
                "ga.mode" => {
                    c.ga_mode = match v {
                        "experiment" => GaMode::Experiment,
                        "fixed-mask" => GaMode::FixedMask,
                        _ => return Err(Error::Config(format!("ga.mode: unknown mode {v:?}"))),
                    }
                }
                "workers" => c.workers = parse(key, v)?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        if self.permutations == 0 {
            return Err(Error::Config("permutations must be >= 1".into()));
        }
        if self.cases.is_empty() {
            return Err(Error::Config("no cases selected".into()));
        }
        if self.stages.is_empty() {
            return Err(Error::Config("no stages selected".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if !(self.pca_threshold > 0.0 && self.pca_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "pca.threshold must be in (0, 1], got {}",
                self.pca_threshold
            )));
        }
        self.feature_config().validate().map_err(cfg)?;
        validate_tsallis_q(self.tsallis_q).map_err(cfg)?;
        if self.stages.contains(&Stage::Ga) {
            self.ga.validate().map_err(cfg)?;
        }
        Ok(())
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            levels: self.levels,
            tsallis_q: self.tsallis_q,
            filters: self.filters,
            sato: SatoParams::default(),
        }
    }

    /// The last requested stage, whose confusion matrices are reported.
    pub fn final_stage(&self) -> Stage {
        *self.stages.iter().max().expect("validated non-empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::parse("", Path::new("/x")).unwrap();
        assert_eq!(c.cases.len(), 31);
        assert_eq!(c.permutations, 100);
        assert_eq!(c.levels, 64);
        assert_eq!(c.train_fraction, 0.6);
        assert_eq!(c.stages, Stage::ALL.to_vec());
        assert_eq!(c.final_stage(), Stage::Ga);
    }

    #[test]
    fn parses_all_keys() {
        let text = "
            # desk run
            dataset = data
            output = /tmp/out
            levels = 32
            cases = 1, 16-18 ,31
            permutations = 7
            train_fraction = 0.5
            seed = 99
            stages = pca,raw
            pca.threshold = 0.9
            tsallis.q = 2
            gaussian.sigma = 1.5
            canny.sigma = 1.0
            canny.low_ratio = 0.5
            canny.high_percentile = 80
            ga.population = 10
            ga.mutation_rate = 0.05
            ga.elitism = 1
            ga.plateau_tol = 1e-4
            ga.max_generations = 12
            ga.fitness_mode = test-fold
            ga.mode = fixed-mask
            workers = 3
        ";
        let c = ExperimentConfig::parse(text, Path::new("/base")).unwrap();
        assert_eq!(c.dataset, Some(PathBuf::from("/base/data")));
        assert_eq!(c.output, PathBuf::from("/tmp/out"));
        let cases: Vec<u8> = c.cases.iter().map(|s| s.case()).collect();
        assert_eq!(cases, vec![1, 16, 17, 18, 31]);
        assert_eq!(c.stages, vec![Stage::Raw, Stage::Pca]);
        assert_eq!(c.final_stage(), Stage::Pca);
        assert_eq!(c.filters.canny_high_percentile, 80.0);
        assert_eq!(c.ga.population, 10);
        assert_eq!(c.fitness_mode, FitnessMode::TestFold);
        assert_eq!(c.ga_mode, GaMode::FixedMask);
        assert_eq!(c.workers, 3);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        let base = Path::new(".");
        for bad in [
            "colour = red",
            "levels = 1",
            "levels = abc",
            "cases = 0",
            "cases = 32",
            "permutations = 0",
            "stages = raw,svm",
            "stages = ",
            "tsallis.q = 1",
            "ga.population = 9",
            "ga.fitness_mode = outer",
            "just a line",
        ] {
            let err = ExperimentConfig::parse(bad, base).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}: {err}");
        }
    }
}
