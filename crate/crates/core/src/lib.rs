//! Texture classification from GLCM statistics of an image and four filtered
//! variants, with Gaussian naive Bayes, covariance PCA and GA feature selection.

pub mod bayes;
pub mod dataset;
pub mod error;
pub mod features;
pub mod filters;
pub mod glcm;
pub mod grid;
pub mod pipeline;
pub mod reduce;
pub mod rng;
pub mod synthetic;

pub use bayes::{ConfusionMatrix, NbModel};
pub use dataset::{ImageSample, Split, SplitSpec};
pub use error::{Error, Result};
pub use features::{FeatureConfig, FeatureTable, FeatureVector};
pub use filters::{FilterParams, Source, SourceSelection};
pub use glcm::{Direction, Glcm, GlcmCounts};
pub use grid::{Grid, Intensity, QuantizedImage};
pub use pipeline::{CaseResult, ExperimentConfig, Stage};
pub use reduce::{GaConfig, Mask, PcaModel};
