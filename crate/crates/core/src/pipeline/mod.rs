//! Experiment orchestration: case sweeps over seeded permutations, result files and reports.

mod config;
mod experiment;
mod report;

pub use config::{ExperimentConfig, FitnessMode, GaMode, Stage, CONFIG_KEYS};
pub use experiment::{
    cache_key, classify_once, load_or_extract, permutation_seed, run_case, run_experiment,
    run_experiment_on_table, with_workers, CaseResult, StageStats, INNER_TRAIN_FRACTION,
};
pub use report::{
    confusion_file_name, filter_correlations, group_label, read_confusion, read_results_dir,
    read_results_json, read_results_table, relevance_report, write_confusion, write_outputs,
    write_results_json, write_results_table, RelevanceEntry, SourceCorrelation, TableRow,
    CONFUSION_DIR, CORRELATION_ORDER, RESULTS_CSV, RESULTS_JSON, TABLE_HEADER,
};
