//! Texture descriptors: 17 statistics for each of six GLCM variants plus the
//! fractal dimension and Lyapunov exponent, 104 values per image source.

mod fractal;
mod haralick;
mod lyapunov;
mod table;

pub use fractal::{box_sizes, fractal_dimension, FractalEstimate};
pub use haralick::{
    extra_glcm_features, haralick_features, validate_tsallis_q, ExtraFeatures, GlcmFeatures,
    HaralickFeatures, GLCM_FEATURE_LABELS, GLCM_FEATURE_NAMES,
};
pub use lyapunov::{sato_estimate, sato_mle, sato_series, SatoEstimate, SatoParams, MIN_SERIES};
pub use table::{extract_table, FeatureTable};

use rayon::prelude::*;

use crate::dataset::ImageSample;
use crate::error::{Error, Result};
use crate::filters::{apply_filter_bank, FilterParams, Source, SourceSelection};
use crate::glcm::{glcm_set, marginals, Glcm};
use crate::grid::QuantizedImage;

/// Values per image source.
pub const BLOCK_LEN: usize = 104;
/// Per-GLCM statistics.
pub const GLCM_FEATURES: usize = 17;
/// Variant prefixes in block order.
pub const VARIANTS: [&str; 6] = ["d0", "d45", "d90", "d135", "avg", "rng"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub levels: u16,
    pub tsallis_q: f64,
    pub filters: FilterParams,
    pub sato: SatoParams,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            levels: 64,
            tsallis_q: 1.5,
            filters: FilterParams::default(),
            sato: SatoParams::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=256).contains(&self.levels) {
            return Err(Error::Parameter(format!(
                "levels must be in [2, 256], got {}",
                self.levels
            )));
        }
        validate_tsallis_q(self.tsallis_q)?;
        self.filters.validate()
    }
}

/// Which by-definition substitutions were made while computing a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Singularities {
    /// Some directional correlation (f3) was set to 0.
    pub correlation: bool,
    /// Some information measure (f12) was set to 0.
    pub info_measure: bool,
    /// The Lyapunov estimate had no usable neighbor pair and was set to 0.
    pub lyapunov: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageFeatureBlock {
    pub directional: [GlcmFeatures; 4],
    /// Feature-wise mean over the four directions.
    pub avg: [f64; GLCM_FEATURES],
    /// Feature-wise `max - min` over the four directions.
    pub range: [f64; GLCM_FEATURES],
    pub fd: f64,
    pub mle: f64,
    pub singular: Singularities,
}

impl ImageFeatureBlock {
    /// The 104 values in canonical order (see [`block_names`]).
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(BLOCK_LEN);
        for d in &self.directional {
            out.extend(d.to_array());
        }
        out.extend(self.avg);
        out.extend(self.range);
        out.push(self.fd);
        out.push(self.mle);
        out
    }
}

/// Names of the 104 block values: `<variant>.<feature>` then `global.fd`, `global.mle`.
pub fn block_names() -> Vec<String> {
    let mut names: Vec<String> = VARIANTS
        .iter()
        .flat_map(|v| GLCM_FEATURE_NAMES.iter().map(move |f| format!("{v}.{f}")))
        .collect();
    names.push("global.fd".into());
    names.push("global.mle".into());
    names
}

/// All 17 statistics of one GLCM.
pub fn glcm_features(g: &Glcm, tsallis_q: f64) -> Result<GlcmFeatures> {
    let m = marginals(g);
    Ok(GlcmFeatures {
        haralick: haralick_features(g, &m),
        extra: extra_glcm_features(g, &m, tsallis_q)?,
    })
}

/// Computes the 104-value block of one quantized source (offset 1).
pub fn feature_block(q: &QuantizedImage, config: &FeatureConfig) -> Result<ImageFeatureBlock> {
    let set = glcm_set(q, 1)?;
    let mut directional = [GlcmFeatures::default(); 4];
    for (slot, g) in directional.iter_mut().zip(&set.directional) {
        *slot = glcm_features(g, config.tsallis_q)?;
    }
    let arrays = directional.map(|d| d.to_array());
    let mut avg = [0.0; GLCM_FEATURES];
    let mut range = [0.0; GLCM_FEATURES];
    for k in 0..GLCM_FEATURES {
        let vals = arrays.iter().map(|a| a[k]);
        let (lo, hi) = vals
            .clone()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        avg[k] = vals.sum::<f64>() / 4.0;
        range[k] = hi - lo;
    }
    let fd = fractal_dimension(q)?.dimension;
    let sato = sato_estimate(q, config.sato)?;
    let singular = Singularities {
        correlation: directional.iter().any(|d| d.haralick.correlation_undefined),
        info_measure: directional
            .iter()
            .any(|d| d.haralick.info_measure_undefined),
        lyapunov: sato.undefined,
    };
    let block = ImageFeatureBlock {
        directional,
        avg,
        range,
        fd,
        mle: sato.lambda,
        singular,
    };
    if let Some(i) = block.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Extraction(format!(
            "non-finite feature {}",
            block_names()[i]
        )));
    }
    Ok(block)
}

/// Named values of one sample, source blocks concatenated in extraction order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Canonical names for the selected sources: `<source>.<variant>.<feature>`.
pub fn feature_names(selection: SourceSelection) -> Vec<String> {
    let block = block_names();
    selection
        .sources()
        .into_iter()
        .flat_map(|s| block.iter().map(move |n| format!("{}.{n}", s.prefix())))
        .collect()
}

pub fn feature_vector(
    sample: &ImageSample,
    selection: SourceSelection,
    config: &FeatureConfig,
) -> Result<FeatureVector> {
    config.validate()?;
    let sources = apply_filter_bank(sample, selection, config.levels, &config.filters)?;
    let blocks: Vec<ImageFeatureBlock> = sources
        .par_iter()
        .map(|(_, q)| feature_block(q, config))
        .collect::<Result<_>>()
        .map_err(|e| match e {
            Error::Extraction(m) => Error::Extraction(format!("sample {}: {m}", sample.id())),
            other => other,
        })?;
    let values = blocks.iter().flat_map(ImageFeatureBlock::values).collect();
    Ok(FeatureVector {
        names: feature_names(selection),
        values,
    })
}

/// Strips source and variant prefixes: `orig.avg.f9` -> `f9`.
pub fn feature_group(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}

/// Source of a canonical feature name.
pub fn feature_source(name: &str) -> Option<Source> {
    let prefix = name.split('.').next()?;
    Source::ALL.into_iter().find(|s| s.prefix() == prefix)
}
