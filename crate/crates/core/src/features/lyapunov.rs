//! Sato's maximum Lyapunov exponent estimate for an image.
//!
//! The image is flattened row-major into a scalar series and delay-embedded.
//! Each embedded point is paired with its nearest neighbor (Euclidean,
//! excluding points closer than `dimension * delay` steps in time and exact
//! duplicates), and the estimate is
//!
//! `lambda(k) = (1 / k) * mean_j ln(d_j(k) / d_j(0))`
//!
//! where `d_j(t)` is the distance between the two trajectories `t` steps later.
//! Pairs whose separation collapses to zero after `k` steps are left out of the
//! mean. When no pair qualifies (e.g. a constant image) the estimate is 0.

use crate::error::{Error, Result};
use crate::grid::QuantizedImage;

/// Shortest flattened series accepted.
pub const MIN_SERIES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatoParams {
    pub dimension: usize,
    pub delay: usize,
    pub horizon: usize,
}

impl Default for SatoParams {
    fn default() -> Self {
        Self {
            dimension: 3,
            delay: 1,
            horizon: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatoEstimate {
    /// Exponent in nats per step.
    pub lambda: f64,
    /// Number of neighbor pairs averaged.
    pub pairs: usize,
    /// No usable pair was found and `lambda` was set to 0.
    pub undefined: bool,
}

pub fn sato_mle(q: &QuantizedImage) -> Result<f64> {
    Ok(sato_estimate(q, SatoParams::default())?.lambda)
}

pub fn sato_estimate(q: &QuantizedImage, params: SatoParams) -> Result<SatoEstimate> {
    let series: Vec<i32> = q.grid().data().iter().map(|&v| i32::from(v)).collect();
    sato_series(&series, params)
}

/// Embedded points bucketed by identical coordinates, ordered by first coordinate.
struct Cells {
    coords: Vec<Vec<i32>>,
    /// Ascending time indices of the points in each cell.
    members: Vec<Vec<usize>>,
}

impl Cells {
    fn build(points: &[Vec<i32>]) -> (Self, Vec<usize>) {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].cmp(&points[b]).then(a.cmp(&b)));
        let mut coords: Vec<Vec<i32>> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut cell_of = vec![0usize; points.len()];
        for i in order {
            if coords.last() != Some(&points[i]) {
                coords.push(points[i].clone());
                members.push(Vec::new());
            }
            let c = coords.len() - 1;
            members[c].push(i);
            cell_of[i] = c;
        }
        for m in &mut members {
            m.sort_unstable();
        }
        (Self { coords, members }, cell_of)
    }
}

fn dist2(a: &[i32], b: &[i32]) -> i64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = i64::from(x - y);
            d * d
        })
        .sum()
}

/// Sato estimate on an integer-valued series.
pub fn sato_series(series: &[i32], params: SatoParams) -> Result<SatoEstimate> {
    let SatoParams {
        dimension,
        delay,
        horizon,
    } = params;
    if dimension == 0 || delay == 0 || horizon == 0 {
        return Err(Error::Parameter(
            "embedding dimension, delay and horizon must be >= 1".into(),
        ));
    }
    if series.len() < MIN_SERIES {
        return Err(Error::Estimation(format!(
            "series of length {} is shorter than {MIN_SERIES}",
            series.len()
        )));
    }
    let span = (dimension - 1) * delay;
    let n_points = series.len() - span;
    if n_points <= horizon + dimension * delay + 1 {
        return Err(Error::Estimation(
            "series too short for the embedding".into(),
        ));
    }
    let points: Vec<Vec<i32>> = (0..n_points)
        .map(|i| (0..dimension).map(|d| series[i + d * delay]).collect())
        .collect();
    let limit = n_points - horizon;
    let exclusion = dimension * delay;
    let (cells, cell_of) = Cells::build(&points[..limit]);

    let mut sum = 0.0;
    let mut pairs = 0usize;
    for j in 0..limit {
        let own = cell_of[j];
        let x0 = cells.coords[own][0];
        let mut best: Option<(i64, usize)> = None;
        // Cells are sorted by first coordinate; sweep outward on both sides.
        let visit = |c: usize, best: &mut Option<(i64, usize)>| -> bool {
            let dx = i64::from(cells.coords[c][0] - x0);
            if let Some((bd, _)) = *best {
                if dx * dx > bd {
                    return false;
                }
            }
            if c == own {
                return true;
            }
            let d = dist2(&cells.coords[c], &cells.coords[own]);
            if best.is_some_and(|(bd, _)| d > bd) {
                return true;
            }
            if let Some(&i) = cells.members[c]
                .iter()
                .find(|&&i| i.abs_diff(j) > exclusion)
            {
                let cand = (d, i);
                if best.is_none_or(|b| cand < b) {
                    *best = Some(cand);
                }
            }
            true
        };
        let mut lo = own;
        let mut hi = own + 1;
        let (mut go_lo, mut go_hi) = (true, true);
        visit(own, &mut best);
        while go_lo || go_hi {
            if go_lo {
                if lo == 0 {
                    go_lo = false;
                } else {
                    lo -= 1;
                    go_lo = visit(lo, &mut best);
                }
            }
            if go_hi {
                if hi >= cells.coords.len() {
                    go_hi = false;
                } else {
                    go_hi = visit(hi, &mut best);
                    hi += 1;
                }
            }
        }
        let Some((d0, nn)) = best else { continue };
        let dk = dist2(&points[j + horizon], &points[nn + horizon]);
        if dk == 0 {
            continue;
        }
        sum += 0.5 * ((dk as f64).ln() - (d0 as f64).ln());
        pairs += 1;
    }
    if pairs == 0 {
        return Ok(SatoEstimate {
            lambda: 0.0,
            pairs: 0,
            undefined: true,
        });
    }
    Ok(SatoEstimate {
        lambda: sum / pairs as f64 / horizon as f64,
        pairs,
        undefined: false,
    })
}
