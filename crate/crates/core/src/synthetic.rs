//! Procedural texture set: two sinusoidal gratings at distinct frequencies,
//! white and smoothed noise, and a checkerboard.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::ImageSample;
use crate::error::{Error, Result};
use crate::filters::gaussian_filter;
use crate::grid::Grid;
use crate::rng::{derive_seed, seeded};

pub const CLASSES: [&str; 5] = [
    "checker",
    "grating_high",
    "grating_low",
    "noise_smooth",
    "noise_white",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub images_per_class: usize,
    pub side: usize,
    /// Standard deviation of additive Gaussian noise on the `[0, 1]` scale.
    pub noise: f64,
    /// Per-image contrast is drawn uniformly from `[lo, hi]`.
    pub contrast: [f64; 2],
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            images_per_class: 40,
            side: 64,
            noise: 0.3,
            contrast: [0.8, 0.8],
            seed: 2024,
        }
    }
}

fn pattern(class: &str, side: usize, rng: &mut impl Rng) -> Grid<f64> {
    let theta = rng.gen_range(0.0..PI);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let (s, c) = theta.sin_cos();
    let along = move |r: usize, col: usize| col as f64 * c + r as f64 * s;
    let across = move |r: usize, col: usize| -(col as f64) * s + r as f64 * c;
    match class {
        "grating_low" | "grating_high" => {
            let f = if class == "grating_low" {
                rng.gen_range(0.05..0.09)
            } else {
                rng.gen_range(0.09..0.14)
            };
            Grid::from_fn(side, side, |r, col| {
                0.5 + 0.5 * (2.0 * PI * f * along(r, col) + phase).sin()
            })
        }
        "checker" => {
            let f = rng.gen_range(0.05..0.12);
            let phase2 = rng.gen_range(0.0..2.0 * PI);
            Grid::from_fn(side, side, |r, col| {
                let v = (2.0 * PI * f * along(r, col) + phase).sin()
                    * (2.0 * PI * f * across(r, col) + phase2).sin();
                if v >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
        }
        "noise_white" => Grid::from_fn(side, side, |_, _| rng.gen_range(0.0..1.0)),
        "noise_smooth" => {
            let raw = Grid::from_fn(side, side, |_, _| rng.gen_range(0.0..1.0));
            let smooth = gaussian_filter(&raw, rng.gen_range(1.0..2.0));
            let (lo, hi) = smooth
                .data()
                .iter()
                .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let span = (hi - lo).max(1e-12);
            smooth.map(|v| (v - lo) / span)
        }
        _ => unreachable!("unknown synthetic class"),
    }
}

/// Generates `images_per_class` images for each class with a random
/// orientation, phase, contrast, brightness and additive noise per image.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<ImageSample>> {
    let [lo, hi] = spec.contrast;
    if spec.images_per_class == 0
        || spec.side < crate::dataset::MIN_SIDE
        || !(spec.noise >= 0.0)
        || !(lo > 0.0 && lo <= hi)
    {
        return Err(Error::Parameter(format!("invalid synthetic spec {spec:?}")));
    }
    let mut out = Vec::with_capacity(CLASSES.len() * spec.images_per_class);
    for (k, class) in CLASSES.iter().enumerate() {
        for i in 0..spec.images_per_class {
            let mut rng = seeded(derive_seed(spec.seed, &[k as u64, i as u64]));
            let base = pattern(class, spec.side, &mut rng);
            let contrast = rng.gen_range(lo..=hi);
            let offset = rng.gen_range(-0.15..0.15);
            let img = base.map(|v| {
                let n: f64 = StandardNormal.sample(&mut rng);
                (0.5 + contrast * (v - 0.5) + offset + spec.noise * n).clamp(0.0, 1.0)
            });
            out.push(ImageSample::new(format!("{class}/{i:03}"), *class, img)?);
        }
    }
    Ok(out)
}

/// Writes samples as 8-bit PNGs under `<dir>/<label>/<n>.png`.
pub fn write_png_dataset(dir: &Path, samples: &[ImageSample]) -> Result<()> {
    for s in samples {
        let name = s.id().rsplit('/').next().unwrap_or(s.id());
        let class_dir = dir.join(s.label());
        std::fs::create_dir_all(&class_dir).map_err(|e| Error::io(&class_dir, e))?;
        let px = s.pixels();
        let bytes: Vec<u8> = px
            .data()
            .iter()
            .map(|v| (v * 255.0).round() as u8)
            .collect();
        let img = image::GrayImage::from_raw(px.width() as u32, px.height() as u32, bytes)
            .expect("buffer matches dimensions");
        let path = class_dir.join(format!("{name}.png"));
        img.save(&path).map_err(|e| Error::Decode {
            path: path.clone(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}
