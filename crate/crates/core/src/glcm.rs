//! Symmetric gray-level co-occurrence matrices and their marginal distributions.

use crate::error::{Error, Result};
use crate::grid::QuantizedImage;

/// Co-occurrence direction. Rows grow downward, so 45° points up and right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    D0,
    D45,
    D90,
    D135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::D0,
        Direction::D45,
        Direction::D90,
        Direction::D135,
    ];

    /// Pixel displacement `(dr, dc)` for a one-pixel offset.
    pub fn displacement(self) -> (isize, isize) {
        match self {
            Direction::D0 => (0, 1),
            Direction::D45 => (-1, 1),
            Direction::D90 => (-1, 0),
            Direction::D135 => (-1, -1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::D0 => "d0",
            Direction::D45 => "d45",
            Direction::D90 => "d90",
            Direction::D135 => "d135",
        }
    }
}

/// Raw symmetric pair counts. Each in-bounds pair adds to both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlcmCounts {
    levels: usize,
    counts: Vec<u64>,
}

impl GlcmCounts {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.levels + j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn normalize(&self) -> Glcm {
        let total = self.total() as f64;
        Glcm {
            levels: self.levels,
            p: self.counts.iter().map(|&n| n as f64 / total).collect(),
        }
    }
}

/// Normalized co-occurrence probabilities, `levels x levels`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    levels: usize,
    p: Vec<f64>,
}

impl Glcm {
    /// Builds a GLCM from explicit probabilities. Entries must be non-negative
    /// and sum to one within 1e-9.
    pub fn from_probabilities(levels: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != levels * levels {
            return Err(Error::Dimension {
                expected: levels * levels,
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Data(
                "GLCM entries must be finite and non-negative".into(),
            ));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Data(format!("GLCM mass {s} differs from 1")));
        }
        Ok(Self { levels, p })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.levels + j]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.levels).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Counts symmetric co-occurrences of `q` along `dir` at `offset` pixels.
pub fn glcm_counts(q: &QuantizedImage, dir: Direction, offset: usize) -> Result<GlcmCounts> {
    if offset == 0 {
        return Err(Error::Parameter("GLCM offset must be >= 1".into()));
    }
    let levels = usize::from(q.levels());
    let (h, w) = (q.height(), q.width());
    let (dr, dc) = dir.displacement();
    let (dr, dc) = (dr * offset as isize, dc * offset as isize);
    // Row/column ranges where both ends of the pair are inside the image.
    let r0 = (-dr).max(0) as usize;
    let r1 = (h as isize - dr.max(0)).max(0) as usize;
    let c0 = (-dc).max(0) as usize;
    let c1 = (w as isize - dc.max(0)).max(0) as usize;
    if r0 >= r1 || c0 >= c1 {
        return Err(Error::Extraction(format!(
            "{h}x{w} image has no {} pairs at offset {offset}",
            dir.name()
        )));
    }
    let mut counts = vec![0u64; levels * levels];
    let g = q.grid();
    for r in r0..r1 {
        let row = g.row(r);
        let nrow = g.row((r as isize + dr) as usize);
        for c in c0..c1 {
            let i = usize::from(row[c]);
            let j = usize::from(nrow[(c as isize + dc) as usize]);
            counts[i * levels + j] += 1;
            counts[j * levels + i] += 1;
        }
    }
    Ok(GlcmCounts { levels, counts })
}

pub fn compute_glcm(q: &QuantizedImage, dir: Direction, offset: usize) -> Result<Glcm> {
    Ok(glcm_counts(q, dir, offset)?.normalize())
}

/// The four directional GLCMs with their elementwise mean and range.
#[derive(Debug, Clone, PartialEq)]
pub struct GlcmSet {
    pub directional: [Glcm; 4],
    pub avg: Glcm,
    /// Elementwise `max - min` over the four directions.
    pub range: Vec<f64>,
}

pub fn glcm_set(q: &QuantizedImage, offset: usize) -> Result<GlcmSet> {
    let d0 = compute_glcm(q, Direction::D0, offset)?;
    let d45 = compute_glcm(q, Direction::D45, offset)?;
    let d90 = compute_glcm(q, Direction::D90, offset)?;
    let d135 = compute_glcm(q, Direction::D135, offset)?;
    let directional = [d0, d45, d90, d135];
    let levels = directional[0].levels;
    let n = levels * levels;
    let mut avg = vec![0.0; n];
    let mut range = vec![0.0; n];
    for k in 0..n {
        let vals = directional.iter().map(|g| g.p[k]);
        let (lo, hi, sum) = vals.fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), v| {
            (lo.min(v), hi.max(v), s + v)
        });
        avg[k] = sum / 4.0;
        range[k] = hi - lo;
    }
    Ok(GlcmSet {
        directional,
        avg: Glcm { levels, p: avg },
        range,
    })
}

/// Marginal distributions and entropies of a GLCM (natural log, `0 ln 0 = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct GlcmMarginals {
    pub p_x: Vec<f64>,
    pub p_y: Vec<f64>,
    /// Indexed by `i + j`, length `2L - 1`.
    pub p_sum: Vec<f64>,
    /// Indexed by `|i - j|`, length `L`.
    pub p_diff: Vec<f64>,
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub hx: f64,
    pub hy: f64,
    pub hxy: f64,
    pub hxy1: f64,
    pub hxy2: f64,
}

#[inline]
pub(crate) fn xlnx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

pub fn marginals(g: &Glcm) -> GlcmMarginals {
    let l = g.levels;
    let mut p_x = vec![0.0; l];
    let mut p_y = vec![0.0; l];
    let mut p_sum = vec![0.0; 2 * l - 1];
    let mut p_diff = vec![0.0; l];
    let mut hxy = 0.0;
    for i in 0..l {
        for j in 0..l {
            let p = g.get(i, j);
            p_x[i] += p;
            p_y[j] += p;
            p_sum[i + j] += p;
            p_diff[i.abs_diff(j)] += p;
            hxy -= xlnx(p);
        }
    }
    let moments = |m: &[f64]| {
        let mu: f64 = m.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
        let var: f64 = m
            .iter()
            .enumerate()
            .map(|(i, p)| (i as f64 - mu).powi(2) * p)
            .sum();
        (mu, var.sqrt())
    };
    let (mu_x, sigma_x) = moments(&p_x);
    let (mu_y, sigma_y) = moments(&p_y);
    let hx = -p_x.iter().map(|&p| xlnx(p)).sum::<f64>();
    let hy = -p_y.iter().map(|&p| xlnx(p)).sum::<f64>();
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..l {
        for j in 0..l {
            let pxy = p_x[i] * p_y[j];
            if pxy > 0.0 {
                let ln = pxy.ln();
                hxy1 -= g.get(i, j) * ln;
                hxy2 -= pxy * ln;
            }
        }
    }
    GlcmMarginals {
        p_x,
        p_y,
        p_sum,
        p_diff,
        mu_x,
        mu_y,
        sigma_x,
        sigma_y,
        hx,
        hy,
        hxy,
        hxy1,
        hxy2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use rand::Rng;

    fn qimg(levels: u16, h: usize, w: usize, data: Vec<u16>) -> QuantizedImage {
        QuantizedImage::new(levels, Grid::new(h, w, data).unwrap()).unwrap()
    }

    fn random_q(levels: u16, h: usize, w: usize, seed: u64) -> QuantizedImage {
        let mut rng = crate::rng::seeded(seed);
        let g = Grid::from_fn(h, w, |_, _| rng.gen_range(0..levels));
        QuantizedImage::new(levels, g).unwrap()
    }

    #[test]
    fn constant_image_single_entry() {
        let q = qimg(8, 4, 4, vec![5; 16]);
        for d in Direction::ALL {
            let g = compute_glcm(&q, d, 1).unwrap();
            assert_eq!(g.get(5, 5), 1.0);
            assert_eq!(g.probabilities().iter().filter(|&&v| v != 0.0).count(), 1);
        }
    }

    #[test]
    fn row_of_three_hand_count() {
        let q = qimg(3, 1, 3, vec![0, 1, 2]);
        let g = compute_glcm(&q, Direction::D0, 1).unwrap();
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert_eq!(g.get(i, j), 0.25);
        }
        assert_eq!(g.probabilities().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn too_small_is_error() {
        let q = qimg(3, 1, 3, vec![0, 1, 2]);
        assert!(matches!(
            compute_glcm(&q, Direction::D90, 1),
            Err(Error::Extraction(_))
        ));
        assert!(compute_glcm(&q, Direction::D0, 3).is_err());
        assert!(compute_glcm(&q, Direction::D0, 0).is_err());
    }

    #[test]
    fn symmetric_and_normalized() {
        for seed in 0..20 {
            let q = random_q(16, 12, 9, seed);
            for d in Direction::ALL {
                let g = compute_glcm(&q, d, 1).unwrap();
                assert!(g.is_symmetric());
                assert!((g.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mirror_invariance_along_scan_axis() {
        let q = random_q(8, 10, 13, 77);
        let m = q.flip_horizontal();
        assert_eq!(
            compute_glcm(&q, Direction::D0, 1).unwrap(),
            compute_glcm(&m, Direction::D0, 1).unwrap()
        );
        // Mirroring swaps the diagonals.
        assert_eq!(
            glcm_counts(&q, Direction::D45, 1).unwrap(),
            glcm_counts(&m, Direction::D135, 1).unwrap()
        );
    }

    #[test]
    fn set_of_constant_image() {
        let q = qimg(4, 5, 5, vec![2; 25]);
        let s = glcm_set(&q, 1).unwrap();
        for g in &s.directional[1..] {
            assert_eq!(g, &s.directional[0]);
        }
        assert!(s.range.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rotation_symmetric_fixture_d0_equals_d90() {
        // Concentric squares are unchanged by a 90 degree rotation.
        let n = 9usize;
        let g = Grid::from_fn(n, n, |r, c| {
            let d = r.min(c).min(n - 1 - r).min(n - 1 - c);
            d as u16
        });
        let q = QuantizedImage::new(5, g).unwrap();
        assert_eq!(q.rotate90(), q);
        let s = glcm_set(&q, 1).unwrap();
        assert_eq!(s.directional[0], s.directional[2]);
    }

    #[test]
    fn avg_rows_sum_to_one() {
        let s = glcm_set(&random_q(8, 16, 16, 4), 1).unwrap();
        let total: f64 = s.avg.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(s.range.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn marginals_single_entry() {
        let mut p = vec![0.0; 64];
        p[5 * 8 + 5] = 1.0;
        let m = marginals(&Glcm::from_probabilities(8, p).unwrap());
        assert_eq!(m.p_x[5], 1.0);
        assert_eq!(m.p_x.iter().sum::<f64>(), 1.0);
        assert_eq!(m.hxy, 0.0);
        assert_eq!(m.p_sum[10], 1.0);
        assert_eq!(m.p_diff[0], 1.0);
    }

    #[test]
    fn marginals_uniform() {
        let m = marginals(&Glcm::from_probabilities(4, vec![1.0 / 16.0; 16]).unwrap());
        assert!((m.hxy - 16f64.ln()).abs() < 1e-12);
        // Triangular sum distribution: counts 1,2,3,4,3,2,1 over 16.
        let tri = [1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0];
        for (k, t) in tri.iter().enumerate() {
            assert!((m.p_sum[k] - t / 16.0).abs() < 1e-15);
        }
        assert_eq!(m.p_x, m.p_y);
        assert!((m.hx - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn marginals_mass() {
        for seed in 0..10 {
            let q = random_q(32, 20, 20, seed);
            let m = marginals(&compute_glcm(&q, Direction::D45, 1).unwrap());
            for v in [&m.p_x, &m.p_y, &m.p_sum, &m.p_diff] {
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            assert_eq!(m.p_x, m.p_y);
        }
    }
}
