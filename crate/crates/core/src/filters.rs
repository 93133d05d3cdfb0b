//! The four filtered image variants used as extra feature sources, and the
//! filter bank that turns one sample into a set of quantized sources.

use std::collections::VecDeque;
use std::fmt;

use crate::dataset::{quantize_intensity, ImageSample};
use crate::error::{Error, Result};
use crate::grid::{Grid, Intensity, QuantizedImage};

/// Side of the entropy filter window.
pub const ENTROPY_WINDOW: usize = 9;
/// Side of the variance filter window.
pub const VARIANCE_WINDOW: usize = 3;
/// Largest population variance of values in `[0, 1]`.
pub const MAX_VARIANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub gaussian_sigma: f64,
    pub canny_sigma: f64,
    /// Low hysteresis threshold as a fraction of the high threshold.
    pub canny_low_ratio: f64,
    /// Percentile (0-100) of the gradient magnitude used as high threshold.
    pub canny_high_percentile: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 2.0,
            canny_sigma: 1.4,
            canny_low_ratio: 0.4,
            canny_high_percentile: 90.0,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(Error::Parameter(format!(
                "gaussian.sigma must be positive, got {}",
                self.gaussian_sigma
            )));
        }
        if !(self.canny_sigma > 0.0 && self.canny_sigma.is_finite()) {
            return Err(Error::Parameter(format!(
                "canny.sigma must be positive, got {}",
                self.canny_sigma
            )));
        }
        if !(self.canny_low_ratio > 0.0 && self.canny_low_ratio <= 1.0) {
            return Err(Error::Parameter(format!(
                "canny.low_ratio must be in (0, 1], got {}",
                self.canny_low_ratio
            )));
        }
        if !(self.canny_high_percentile > 0.0 && self.canny_high_percentile <= 100.0) {
            return Err(Error::Parameter(format!(
                "canny.high_percentile must be in (0, 100], got {}",
                self.canny_high_percentile
            )));
        }
        Ok(())
    }
}

/// Normalized 1-D Gaussian kernel of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable convolution with edge replication.
fn convolve_separable(img: &Intensity, kernel: &[f64]) -> Intensity {
    let (h, w) = (img.height(), img.width());
    let radius = (kernel.len() / 2) as isize;
    let rows: Grid<f64> = Grid::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * img.get_clamped(r as isize, c as isize + i as isize - radius))
            .sum()
    });
    Grid::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * rows.get_clamped(r as isize + i as isize - radius, c as isize))
            .sum()
    })
}

/// Low-pass Gaussian blur, output clamped to `[0, 1]`.
pub fn gaussian_filter(img: &Intensity, sigma: f64) -> Intensity {
    convolve_separable(img, &gaussian_kernel(sigma)).map(|v| v.clamp(0.0, 1.0))
}

/// Sobel gradient magnitude and direction (radians) of `img`.
pub fn sobel(img: &Intensity) -> (Grid<f64>, Grid<f64>) {
    let (h, w) = (img.height(), img.width());
    let mut mag = Grid::filled(h, w, 0.0);
    let mut dir = Grid::filled(h, w, 0.0);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let p = |dr: isize, dc: isize| img.get_clamped(r + dr, c + dc);
            let gx = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let gy = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            mag.set(r as usize, c as usize, gx.hypot(gy));
            dir.set(r as usize, c as usize, gy.atan2(gx));
        }
    }
    (mag, dir)
}

/// Thin ridges of `mag` to one pixel along the gradient direction.
///
/// A pixel survives if it is `>=` its backward neighbor and strictly `>` its
/// forward neighbor, so a two-pixel plateau keeps exactly one pixel.
pub fn non_maximum_suppression(mag: &Grid<f64>, dir: &Grid<f64>) -> Grid<f64> {
    let (h, w) = (mag.height(), mag.width());
    Grid::from_fn(h, w, |r, c| {
        let m = mag.get(r, c);
        if m <= 0.0 {
            return 0.0;
        }
        let mut deg = dir.get(r, c).to_degrees();
        if deg < 0.0 {
            deg += 180.0;
        }
        // (dr, dc) step along the gradient, with rows growing downward.
        let (dr, dc) = if !(22.5..157.5).contains(&deg) {
            (0, 1)
        } else if deg < 67.5 {
            (1, 1)
        } else if deg < 112.5 {
            (1, 0)
        } else {
            (1, -1)
        };
        let (r, c) = (r as isize, c as isize);
        let back = mag.get_clamped(r - dr, c - dc);
        let fwd = mag.get_clamped(r + dr, c + dc);
        if m >= back && m > fwd {
            m
        } else {
            0.0
        }
    })
}

/// Double-threshold hysteresis: pixels `>= high` seed edges, which then grow
/// through 8-connected pixels `>= low`. Zero magnitudes never become edges.
pub fn hysteresis(mag: &Grid<f64>, low: f64, high: f64) -> Grid<u8> {
    let (h, w) = (mag.height(), mag.width());
    let mut out = Grid::filled(h, w, 0u8);
    let mut queue = VecDeque::new();
    for r in 0..h {
        for c in 0..w {
            let m = mag.get(r, c);
            if m > 0.0 && m >= high {
                out.set(r, c, 1);
                queue.push_back((r, c));
            }
        }
    }
    while let Some((r, c)) = queue.pop_front() {
        for dr in -1isize..=1 {
            for dc in -1isize..=1 {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                let m = mag.get(nr, nc);
                if out.get(nr, nc) == 0 && m > 0.0 && m >= low {
                    out.set(nr, nc, 1);
                    queue.push_back((nr, nc));
                }
            }
        }
    }
    out
}

/// Nearest-rank percentile (`p` in 0-100) of `values`.
fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

/// Canny edge map with cells in `{0, 1}`.
pub fn canny_filter(img: &Intensity, params: &FilterParams) -> Grid<u8> {
    let smoothed = convolve_separable(img, &gaussian_kernel(params.canny_sigma));
    let (mag, dir) = sobel(&smoothed);
    let high = percentile(mag.data(), params.canny_high_percentile);
    let low = params.canny_low_ratio * high;
    let thin = non_maximum_suppression(&mag, &dir);
    hysteresis(&thin, low, high)
}

/// Shannon entropy (bits) of a histogram with `total` entries.
/// Window histogram that also tracks how many levels hold each count, so the
/// entropy sum runs over counts rather than labels and does not depend on
/// how levels are numbered.
struct WindowHistogram {
    hist: Vec<u32>,
    multiplicity: Vec<u32>,
    terms: Vec<f64>,
}

impl WindowHistogram {
    fn new(levels: usize, total: usize) -> Self {
        let terms = (0..=total)
            .map(|n| {
                let p = n as f64 / total as f64;
                if n == 0 {
                    0.0
                } else {
                    -p * p.log2()
                }
            })
            .collect();
        Self {
            hist: vec![0; levels],
            multiplicity: vec![0; total + 1],
            terms,
        }
    }

    fn clear(&mut self) {
        self.hist.iter_mut().for_each(|n| *n = 0);
        self.multiplicity.iter_mut().for_each(|n| *n = 0);
    }

    fn shift(&mut self, level: u16, delta: i32) {
        let slot = &mut self.hist[usize::from(level)];
        let old = *slot as usize;
        *slot = (*slot as i32 + delta) as u32;
        let new = *slot as usize;
        if old > 0 {
            self.multiplicity[old] -= 1;
        }
        if new > 0 {
            self.multiplicity[new] += 1;
        }
    }

    fn entropy(&self) -> f64 {
        self.multiplicity
            .iter()
            .zip(&self.terms)
            .filter(|(&m, _)| m > 0)
            .map(|(&m, t)| f64::from(m) * t)
            .sum()
    }
}

/// Local entropy in a 9x9 window (edge-replicated), divided by `log2(levels)`.
pub fn entropy_filter(q: &QuantizedImage) -> Intensity {
    let (h, w) = (q.height(), q.width());
    let half = (ENTROPY_WINDOW / 2) as isize;
    let scale = f64::from(q.levels()).log2();
    let g = q.grid();
    let mut out = Grid::filled(h, w, 0.0);
    let mut win = WindowHistogram::new(usize::from(q.levels()), ENTROPY_WINDOW * ENTROPY_WINDOW);
    for r in 0..h as isize {
        win.clear();
        for dr in -half..=half {
            for dc in -half..=half {
                win.shift(g.get_clamped(r + dr, dc), 1);
            }
        }
        out.set(r as usize, 0, win.entropy() / scale);
        for c in 1..w as isize {
            for dr in -half..=half {
                win.shift(g.get_clamped(r + dr, c - half - 1), -1);
                win.shift(g.get_clamped(r + dr, c + half), 1);
            }
            out.set(r as usize, c as usize, win.entropy() / scale);
        }
    }
    out
}

/// Population variance in a 3x3 window (edge-replicated), divided by 0.25.
pub fn variance_filter(img: &Intensity) -> Intensity {
    let half = (VARIANCE_WINDOW / 2) as isize;
    let n = (VARIANCE_WINDOW * VARIANCE_WINDOW) as f64;
    Grid::from_fn(img.height(), img.width(), |r, c| {
        let (mut s, mut s2) = (0.0, 0.0);
        for dr in -half..=half {
            for dc in -half..=half {
                let v = img.get_clamped(r as isize + dr, c as isize + dc);
                s += v;
                s2 += v * v;
            }
        }
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0);
        (var / MAX_VARIANCE).clamp(0.0, 1.0)
    })
}

/// One of the five image sources a feature block can be computed from.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum Source {
    Original,
    Gaussian,
    Canny,
    Entropy,
    Variance,
}

impl Source {
    /// Extraction order.
    pub const ALL: [Source; 5] = [
        Source::Original,
        Source::Gaussian,
        Source::Canny,
        Source::Entropy,
        Source::Variance,
    ];

    /// Feature-name prefix.
    pub fn prefix(self) -> &'static str {
        match self {
            Source::Original => "orig",
            Source::Gaussian => "gauss",
            Source::Canny => "canny",
            Source::Entropy => "entropy",
            Source::Variance => "var",
        }
    }

    /// Bit of this source in a case number (V, E, C, G, O from high to low).
    pub fn bit(self) -> u8 {
        match self {
            Source::Original => 1,
            Source::Gaussian => 2,
            Source::Canny => 4,
            Source::Entropy => 8,
            Source::Variance => 16,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Original => "Original",
            Source::Gaussian => "Gaussian",
            Source::Canny => "Canny",
            Source::Entropy => "Entropy",
            Source::Variance => "Variance",
        })
    }
}

/// A non-empty subset of the five sources, numbered 1-31 by its bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSelection(u8);

impl SourceSelection {
    pub const ALL: SourceSelection = SourceSelection(31);
    pub const ORIGINAL: SourceSelection = SourceSelection(1);

    pub fn from_case(case: u8) -> Result<Self> {
        if (1..=31).contains(&case) {
            Ok(Self(case))
        } else {
            Err(Error::Parameter(format!(
                "case must be in 1..=31, got {case}"
            )))
        }
    }

    /// Flags ordered (Variance, Entropy, Canny, Gaussian, Original).
    pub fn from_flags(flags: [bool; 5]) -> Result<Self> {
        let case = flags.iter().fold(0u8, |acc, &f| (acc << 1) | u8::from(f));
        Self::from_case(case)
    }

    pub fn case(self) -> u8 {
        self.0
    }

    /// Flags ordered (Variance, Entropy, Canny, Gaussian, Original).
    pub fn flags(self) -> [bool; 5] {
        [16, 8, 4, 2, 1].map(|b| self.0 & b != 0)
    }

    pub fn contains(self, s: Source) -> bool {
        self.0 & s.bit() != 0
    }

    /// Selected sources in extraction order.
    pub fn sources(self) -> Vec<Source> {
        Source::ALL
            .into_iter()
            .filter(|&s| self.contains(s))
            .collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn all_cases() -> impl Iterator<Item = SourceSelection> {
        (1..=31).map(SourceSelection)
    }
}

/// Quantized image of `source` derived from `sample`.
pub fn filtered_source(
    sample: &ImageSample,
    source: Source,
    levels: u16,
    params: &FilterParams,
) -> Result<QuantizedImage> {
    let img = sample.pixels();
    match source {
        Source::Original => quantize_intensity(img, levels),
        Source::Gaussian => {
            quantize_intensity(&gaussian_filter(img, params.gaussian_sigma), levels)
        }
        Source::Canny => {
            let edges = canny_filter(img, params);
            quantize_intensity(&edges.map(f64::from), levels)
        }
        Source::Entropy => {
            let q = quantize_intensity(img, levels)?;
            quantize_intensity(&entropy_filter(&q), levels)
        }
        Source::Variance => quantize_intensity(&variance_filter(img), levels),
    }
}

/// All selected sources of `sample`, quantized to `levels`, in extraction order.
pub fn apply_filter_bank(
    sample: &ImageSample,
    selection: SourceSelection,
    levels: u16,
    params: &FilterParams,
) -> Result<Vec<(Source, QuantizedImage)>> {
    params.validate()?;
    selection
        .sources()
        .into_iter()
        .map(|s| Ok((s, filtered_source(sample, s, levels, params)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn noise(h: usize, w: usize, seed: u64) -> Intensity {
        let mut rng = crate::rng::seeded(seed);
        Grid::from_fn(h, w, |_, _| rng.gen::<f64>())
    }

    fn sample_variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn gaussian_kernel_shape() {
        let k = gaussian_kernel(2.0);
        assert_eq!(k.len(), 13);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(k[6] > k[5] && k[5] == k[7]);
    }

    #[test]
    fn gaussian_constant_is_fixed_point() {
        let img = Grid::filled(20, 20, 0.37);
        let out = gaussian_filter(&img, 2.0);
        assert!(out.data().iter().all(|v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn gaussian_impulse_matches_direct_2d_convolution() {
        let mut img = Grid::filled(9, 9, 0.0);
        img.set(4, 4, 1.0);
        let out = gaussian_filter(&img, 2.0);
        let k = gaussian_kernel(2.0);
        let radius = (k.len() / 2) as isize;
        // Direct 2-D convolution with the outer-product kernel.
        for r in 0..9isize {
            for c in 0..9isize {
                let mut acc = 0.0;
                for i in -radius..=radius {
                    for j in -radius..=radius {
                        acc += k[(i + radius) as usize]
                            * k[(j + radius) as usize]
                            * img.get_clamped(r + i, c + j);
                    }
                }
                assert!((out.get(r as usize, c as usize) - acc).abs() < 1e-14);
            }
        }
        let peak = out.get(4, 4);
        assert!((peak - k[6] * k[6]).abs() < 1e-14);
        assert!(out.data().iter().all(|&v| v <= peak));
    }

    #[test]
    fn gaussian_reduces_noise_variance() {
        let img = noise(32, 32, 5);
        let out = gaussian_filter(&img, 2.0);
        assert!(sample_variance(out.data()) < sample_variance(img.data()));
    }

    #[test]
    fn gaussian_preserves_interior_mean() {
        // Pattern with period 4 so every interior 4x4-aligned region is identical.
        let img = Grid::from_fn(48, 48, |r, c| ((r % 4) * 4 + (c % 4)) as f64 / 15.0);
        let out = gaussian_filter(&img, 2.0);
        let mean = |g: &Intensity| {
            let mut s = 0.0;
            for r in 16..32 {
                for c in 16..32 {
                    s += g.get(r, c);
                }
            }
            s / 256.0
        };
        assert!((mean(&img) - mean(&out)).abs() < 1e-6);
    }

    #[test]
    fn canny_constant_has_no_edges() {
        let edges = canny_filter(&Grid::filled(32, 32, 0.6), &FilterParams::default());
        assert!(edges.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn canny_step_edge_is_single_thin_line() {
        let img = Grid::from_fn(32, 32, |_, c| if c < 16 { 0.0 } else { 1.0 });
        let edges = canny_filter(&img, &FilterParams::default());
        let cols: Vec<usize> = (0..32).filter(|&c| edges.get(10, c) == 1).collect();
        assert_eq!(cols.len(), 1, "row 10 edge columns: {cols:?}");
        let col = cols[0];
        assert!((15..=16).contains(&col));
        for r in 0..32 {
            for c in 0..32 {
                assert_eq!(edges.get(r, c), u8::from(c == col), "({r},{c})");
            }
        }
    }

    #[test]
    fn hysteresis_keeps_connected_weak_ridge_only() {
        let mut mag = Grid::filled(12, 12, 0.0);
        // Ridge A: one strong pixel followed by weak pixels along row 2.
        mag.set(2, 1, 1.0);
        for c in 2..10 {
            mag.set(2, c, 0.5);
        }
        // Ridge B: weak pixels only, along row 8.
        for c in 2..10 {
            mag.set(8, c, 0.5);
        }
        // Sub-threshold noise.
        mag.set(5, 5, 0.1);
        let out = hysteresis(&mag, 0.4, 0.9);
        for c in 1..10 {
            assert_eq!(out.get(2, c), 1);
        }
        for c in 0..12 {
            assert_eq!(out.get(8, c), 0);
        }
        assert_eq!(out.get(5, 5), 0);
    }

    #[test]
    fn canny_output_is_binary_on_noise() {
        let edges = canny_filter(&noise(40, 40, 9), &FilterParams::default());
        assert!(edges.data().iter().all(|&v| v <= 1));
        assert!(edges.data().iter().any(|&v| v == 1));
    }

    #[test]
    fn entropy_constant_is_zero() {
        let q = quantize_intensity(&Grid::filled(20, 20, 0.3), 64).unwrap();
        assert!(entropy_filter(&q).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn entropy_spread_window_near_six_bits() {
        // 81 cells cycling through all 64 levels: 17 levels twice, 47 once.
        let grid = Grid::from_fn(9, 9, |r, c| ((r * 9 + c) % 64) as u16);
        let q = QuantizedImage::new(64, grid).unwrap();
        let bits = entropy_filter(&q).get(4, 4) * 6.0;
        let oracle = -(17.0 * (2.0 / 81.0) * (2.0f64 / 81.0).log2()
            + 47.0 * (1.0 / 81.0) * (1.0f64 / 81.0).log2());
        assert!((bits - oracle).abs() < 1e-12);
        assert!((bits - 6.0).abs() < 0.15);
    }

    #[test]
    fn entropy_checkerboard_near_one_bit() {
        let grid = Grid::from_fn(30, 30, |r, c| if (r + c) % 2 == 0 { 3 } else { 40 });
        let q = QuantizedImage::new(64, grid).unwrap();
        let out = entropy_filter(&q);
        let oracle = {
            let (a, b) = (41.0f64 / 81.0, 40.0f64 / 81.0);
            -(a * a.log2() + b * b.log2())
        };
        for r in 4..26 {
            for c in 4..26 {
                assert!((out.get(r, c) * 6.0 - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn entropy_invariant_under_level_relabeling() {
        let mut rng = crate::rng::seeded(3);
        let grid = Grid::from_fn(20, 20, |_, _| rng.gen_range(0..8u16));
        let q = QuantizedImage::new(8, grid.clone()).unwrap();
        let perm = [5u16, 2, 7, 0, 1, 6, 3, 4];
        let relabeled = QuantizedImage::new(8, grid.map(|v| perm[usize::from(v)])).unwrap();
        assert_eq!(entropy_filter(&q), entropy_filter(&relabeled));
    }

    #[test]
    fn variance_window_value() {
        // 3x3 block {0 x4, 1 x5} in the interior.
        let pattern = [[0.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 0.0]];
        let img = Grid::from_fn(5, 5, |r, c| {
            if (1..4).contains(&r) && (1..4).contains(&c) {
                pattern[r - 1][c - 1]
            } else {
                0.5
            }
        });
        let out = variance_filter(&img);
        let var = (4.0 * (5.0f64 / 9.0).powi(2) + 5.0 * (4.0f64 / 9.0).powi(2)) / 9.0;
        assert!((var - 20.0 / 81.0).abs() < 1e-15);
        assert!((out.get(2, 2) * MAX_VARIANCE - var).abs() < 1e-12);
    }

    #[test]
    fn variance_not_invariant_under_relabeling() {
        let img = Grid::from_fn(6, 6, |r, c| if (r + c) % 2 == 0 { 0.4 } else { 0.5 });
        let relabeled = img.map(|v| if v == 0.4 { 0.0 } else { 1.0 });
        assert_ne!(
            variance_filter(&img).get(3, 3),
            variance_filter(&relabeled).get(3, 3)
        );
    }

    #[test]
    fn variance_bounded() {
        let out = variance_filter(&noise(25, 25, 1));
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        let bin = Grid::from_fn(10, 10, |r, c| ((r + c) % 2) as f64);
        assert!(variance_filter(&bin)
            .data()
            .iter()
            .all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn filters_are_translation_equivariant_in_interior() {
        let img = noise(40, 40, 21);
        let shifted = Grid::from_fn(40, 40, |r, c| {
            img.get_clamped(r as isize - 1, c as isize - 1)
        });
        let a = gaussian_filter(&img, 2.0);
        let b = gaussian_filter(&shifted, 2.0);
        let va = variance_filter(&img);
        let vb = variance_filter(&shifted);
        let qa = quantize_intensity(&img, 16).unwrap();
        let qb = quantize_intensity(&shifted, 16).unwrap();
        let ea = entropy_filter(&qa);
        let eb = entropy_filter(&qb);
        for r in 12..28 {
            for c in 12..28 {
                assert!((a.get(r, c) - b.get(r + 1, c + 1)).abs() < 1e-12);
                assert!((va.get(r, c) - vb.get(r + 1, c + 1)).abs() < 1e-12);
                assert_eq!(ea.get(r, c), eb.get(r + 1, c + 1));
            }
        }
    }

    #[test]
    fn selection_encoding() {
        let s = SourceSelection::from_case(23).unwrap();
        assert_eq!(s.flags(), [true, false, true, true, true]);
        assert!(!s.contains(Source::Entropy));
        assert_eq!(
            s.sources(),
            vec![
                Source::Original,
                Source::Gaussian,
                Source::Canny,
                Source::Variance
            ]
        );
        for case in 1..=31 {
            let s = SourceSelection::from_case(case).unwrap();
            assert_eq!(SourceSelection::from_flags(s.flags()).unwrap(), s);
        }
        assert!(SourceSelection::from_case(0).is_err());
        assert!(SourceSelection::from_case(32).is_err());
        assert!(SourceSelection::from_flags([false; 5]).is_err());
    }

    #[test]
    fn filter_bank_outputs() {
        let s = ImageSample::new("x", "a", noise(24, 24, 2)).unwrap();
        let p = FilterParams::default();
        let one = apply_filter_bank(&s, SourceSelection::ORIGINAL, 64, &p).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].1, quantize_intensity(s.pixels(), 64).unwrap());

        let all = apply_filter_bank(&s, SourceSelection::ALL, 64, &p).unwrap();
        let tags: Vec<Source> = all.iter().map(|(t, _)| *t).collect();
        assert_eq!(tags, Source::ALL.to_vec());
        let canny = &all[2].1;
        assert!(canny.grid().data().iter().all(|&v| v == 0 || v == 63));

        let c23 = apply_filter_bank(&s, SourceSelection::from_case(23).unwrap(), 64, &p).unwrap();
        assert_eq!(c23.len(), 4);
        assert!(c23.iter().all(|(t, _)| *t != Source::Entropy));
    }

    #[test]
    fn invalid_params_rejected() {
        let s = ImageSample::new("x", "a", noise(16, 16, 2)).unwrap();
        let p = FilterParams {
            canny_low_ratio: 1.5,
            ..FilterParams::default()
        };
        assert!(apply_filter_bank(&s, SourceSelection::ALL, 64, &p).is_err());
    }
}
