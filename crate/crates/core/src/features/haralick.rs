//! Per-GLCM statistics: thirteen Haralick measures plus maximum probability,
//! cluster shade, cluster prominence and Tsallis entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glcm::{xlnx, Glcm, GlcmMarginals};

/// Short names of the 17 per-GLCM features, in storage order.
pub const GLCM_FEATURE_NAMES: [&str; 17] = [
    "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9", "f10", "f11", "f12", "f13", "maxp",
    "cshade", "cprom", "tsq",
];

/// Human-readable labels matching [`GLCM_FEATURE_NAMES`].
pub const GLCM_FEATURE_LABELS: [&str; 17] = [
    "angular second moment",
    "contrast",
    "correlation",
    "sum of squares variance",
    "inverse difference moment (local homogeneity)",
    "sum average",
    "sum variance",
    "sum entropy",
    "entropy",
    "difference variance",
    "difference entropy",
    "information measure of correlation I",
    "information measure of correlation II",
    "maximum probability",
    "cluster shade",
    "cluster prominence",
    "Tsallis entropy",
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HaralickFeatures {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f5: f64,
    pub f6: f64,
    pub f7: f64,
    pub f8: f64,
    pub f9: f64,
    pub f10: f64,
    pub f11: f64,
    pub f12: f64,
    pub f13: f64,
    /// `f3` was set to 0 because a marginal has zero spread.
    pub correlation_undefined: bool,
    /// `f12` was set to 0 because both marginal entropies vanish.
    pub info_measure_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtraFeatures {
    pub maxp: f64,
    pub cshade: f64,
    pub cprom: f64,
    pub tsq: f64,
}

/// All 17 statistics of one GLCM.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GlcmFeatures {
    pub haralick: HaralickFeatures,
    pub extra: ExtraFeatures,
}

impl GlcmFeatures {
    pub fn to_array(&self) -> [f64; 17] {
        let h = &self.haralick;
        let e = &self.extra;
        [
            h.f1, h.f2, h.f3, h.f4, h.f5, h.f6, h.f7, h.f8, h.f9, h.f10, h.f11, h.f12, h.f13,
            e.maxp, e.cshade, e.cprom, e.tsq,
        ]
    }
}

pub fn haralick_features(g: &Glcm, m: &GlcmMarginals) -> HaralickFeatures {
    let l = g.levels();
    let mut f1 = 0.0;
    let mut f5 = 0.0;
    let mut sum_ij = 0.0;
    let mut f4 = 0.0;
    for i in 0..l {
        let di = i as f64 - m.mu_x;
        for j in 0..l {
            let p = g.get(i, j);
            if p == 0.0 {
                continue;
            }
            f1 += p * p;
            let d = i as f64 - j as f64;
            f5 += p / (1.0 + d * d);
            sum_ij += (i * j) as f64 * p;
            f4 += di * di * p;
        }
    }
    let f2: f64 = m
        .p_diff
        .iter()
        .enumerate()
        .map(|(k, p)| (k * k) as f64 * p)
        .sum();

    let sx_sy = m.sigma_x * m.sigma_y;
    let correlation_undefined = sx_sy <= 0.0;
    let f3 = if correlation_undefined {
        0.0
    } else {
        ((sum_ij - m.mu_x * m.mu_y) / sx_sy).clamp(-1.0, 1.0)
    };

    let f6: f64 = m.p_sum.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let f7: f64 = m
        .p_sum
        .iter()
        .enumerate()
        .map(|(k, p)| (k as f64 - f6).powi(2) * p)
        .sum();
    let f8 = -m.p_sum.iter().map(|&p| xlnx(p)).sum::<f64>();
    let f9 = m.hxy;

    let mu_d: f64 = m.p_diff.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let f10: f64 = m
        .p_diff
        .iter()
        .enumerate()
        .map(|(k, p)| (k as f64 - mu_d).powi(2) * p)
        .sum();
    let f11 = -m.p_diff.iter().map(|&p| xlnx(p)).sum::<f64>();

    let hmax = m.hx.max(m.hy);
    let info_measure_undefined = hmax <= 0.0;
    let f12 = if info_measure_undefined {
        0.0
    } else {
        (m.hxy - m.hxy1) / hmax
    };
    let f13 = (1.0 - (-2.0 * (m.hxy2 - m.hxy).max(0.0)).exp())
        .max(0.0)
        .sqrt();

    HaralickFeatures {
        f1,
        f2,
        f3,
        f4,
        f5,
        f6,
        f7,
        f8,
        f9,
        f10,
        f11,
        f12,
        f13,
        correlation_undefined,
        info_measure_undefined,
    }
}

pub fn validate_tsallis_q(q: f64) -> Result<()> {
    if !q.is_finite() || q <= 0.0 || q == 1.0 {
        return Err(Error::Parameter(format!(
            "Tsallis order must be positive and != 1, got {q}"
        )));
    }
    Ok(())
}

pub fn extra_glcm_features(g: &Glcm, m: &GlcmMarginals, tsallis_q: f64) -> Result<ExtraFeatures> {
    validate_tsallis_q(tsallis_q)?;
    let l = g.levels();
    let center = m.mu_x + m.mu_y;
    let mut maxp = 0.0f64;
    let mut cshade = 0.0;
    let mut cprom = 0.0;
    let mut pq = 0.0;
    for i in 0..l {
        for j in 0..l {
            let p = g.get(i, j);
            if p == 0.0 {
                continue;
            }
            maxp = maxp.max(p);
            let d = (i + j) as f64 - center;
            let d3 = d * d * d;
            cshade += d3 * p;
            cprom += d3 * d * p;
            pq += p.powf(tsallis_q);
        }
    }
    Ok(ExtraFeatures {
        maxp,
        cshade,
        cprom,
        tsq: (1.0 - pq) / (tsallis_q - 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glcm::marginals;

    fn single(levels: usize, at: usize) -> Glcm {
        let mut p = vec![0.0; levels * levels];
        p[at * levels + at] = 1.0;
        Glcm::from_probabilities(levels, p).unwrap()
    }

    #[test]
    fn degenerate_distribution() {
        let g = single(8, 5);
        let m = marginals(&g);
        let h = haralick_features(&g, &m);
        assert_eq!(
            (h.f1, h.f2, h.f3, h.f5, h.f9, h.f11),
            (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
        );
        assert!(h.correlation_undefined && h.info_measure_undefined);
        assert_eq!(h.f12, 0.0);
        let e = extra_glcm_features(&g, &m, 1.5).unwrap();
        assert_eq!((e.maxp, e.cshade, e.cprom, e.tsq), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn uniform_closed_forms() {
        let l = 4;
        let g = Glcm::from_probabilities(l, vec![1.0 / 16.0; 16]).unwrap();
        let m = marginals(&g);
        let h = haralick_features(&g, &m);
        assert!((h.f1 - 1.0 / 16.0).abs() < 1e-15);
        assert!((h.f9 - 16f64.ln()).abs() < 1e-12);
        // Independent marginals: no correlation, no mutual information.
        assert!(h.f3.abs() < 1e-12);
        assert!(h.f12.abs() < 1e-12);
        assert!(h.f13.abs() < 1e-6);
        let e = extra_glcm_features(&g, &m, 2.0).unwrap();
        assert!((e.tsq - (1.0 - 1.0 / 16.0)).abs() < 1e-15);
        // Symmetric about the center: odd moment vanishes.
        assert!(e.cshade.abs() < 1e-12);
    }

    #[test]
    fn shannon_order_rejected() {
        let g = single(4, 1);
        let m = marginals(&g);
        assert!(matches!(
            extra_glcm_features(&g, &m, 1.0),
            Err(Error::Parameter(_))
        ));
        assert!(extra_glcm_features(&g, &m, -1.0).is_err());
        assert!(extra_glcm_features(&g, &m, f64::NAN).is_err());
    }

    #[test]
    fn perfectly_correlated_diagonal() {
        let l = 4;
        let mut p = vec![0.0; 16];
        for i in 0..l {
            p[i * l + i] = 0.25;
        }
        let g = Glcm::from_probabilities(l, p).unwrap();
        let h = haralick_features(&g, &marginals(&g));
        assert!((h.f3 - 1.0).abs() < 1e-12);
        assert!(h.f3 <= 1.0);
        assert_eq!(h.f2, 0.0);
    }
}
