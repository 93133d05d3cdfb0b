//! Dimensionality reduction: covariance PCA and genetic feature-subset selection.

mod ga;
mod pca;

pub use ga::{ga_fitness, ga_select, Chromosome, GaConfig, GaOutcome, GenerationStats, Mask};
pub use pca::{pca_fit, pca_project, PcaModel};
