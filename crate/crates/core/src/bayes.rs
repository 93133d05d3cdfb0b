//! Gaussian naive Bayes evaluated in log space.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative variance floor: `floor_i = VAR_FLOOR * (global variance of feature i + 1e-12)`.
pub const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    classes: Vec<String>,
    priors: Vec<f64>,
    /// classes x features
    means: DMatrix<f64>,
    /// classes x features, already floored
    variances: DMatrix<f64>,
    /// Columns whose mean and variance agree across classes. Their term is the
    /// same for every class, so prediction skips it; otherwise a far-off value
    /// on a floored constant column swamps every other term in f64.
    shared: Vec<bool>,
}

fn shared_columns(means: &DMatrix<f64>, variances: &DMatrix<f64>) -> Vec<bool> {
    (0..means.ncols())
        .map(|j| {
            (1..means.nrows())
                .all(|k| means[(k, j)] == means[(0, j)] && variances[(k, j)] == variances[(0, j)])
        })
        .collect()
}

impl NbModel {
    /// Builds a model from explicit parameters.
    pub fn from_parameters(
        classes: Vec<String>,
        priors: Vec<f64>,
        means: DMatrix<f64>,
        variances: DMatrix<f64>,
    ) -> Result<Self> {
        let k = classes.len();
        if k < 2 || priors.len() != k || means.nrows() != k || variances.shape() != means.shape() {
            return Err(Error::Fit("inconsistent model dimensions".into()));
        }
        if priors.iter().any(|p| !(*p > 0.0)) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Fit("priors must be positive and sum to 1".into()));
        }
        if variances.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Fit("variances must be positive".into()));
        }
        Ok(Self {
            classes,
            priors,
            shared: shared_columns(&means, &variances),
            means,
            variances,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &DMatrix<f64> {
        &self.means
    }

    pub fn variances(&self) -> &DMatrix<f64> {
        &self.variances
    }

    pub fn n_features(&self) -> usize {
        self.means.ncols()
    }

    /// `log p(C_k) + sum_i log N(x_i; mu_ki, var_ki)` for every class.
    pub fn log_joint(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.scores(x, false)
    }

    fn scores(&self, x: &[f64], skip_shared: bool) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite feature value".into()));
        }
        Ok((0..self.classes.len())
            .map(|k| {
                let ll: f64 = x
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| !(skip_shared && self.shared[i]))
                    .map(|(i, &xi)| {
                        let var = self.variances[(k, i)];
                        let d = xi - self.means[(k, i)];
                        -0.5 * ((2.0 * PI * var).ln() + d * d / var)
                    })
                    .sum();
                self.priors[k].ln() + ll
            })
            .collect())
    }

    /// Index of the most probable class; ties go to the earlier class.
    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        let scores = self.scores(x, true)?;
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = k;
            }
        }
        Ok(best)
    }

    pub fn predict(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.classes[self.predict_index(x)?])
    }
}

/// Fits per-class priors, means and population variances. Classes are ordered by name.
pub fn fit<S: AsRef<str>>(x: &DMatrix<f64>, labels: &[S]) -> Result<NbModel> {
    let (n, d) = x.shape();
    if labels.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: labels.len(),
        });
    }
    if d == 0 {
        return Err(Error::Fit("no features".into()));
    }
    for j in 0..d {
        if x.column(j).iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value in feature column {j}"
            )));
        }
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.as_ref()).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 classes, got {}",
            groups.len()
        )));
    }
    if let Some((c, rows)) = groups.iter().find(|(_, r)| r.len() < 2) {
        return Err(Error::Fit(format!(
            "class {c} has {} training samples, need at least 2",
            rows.len()
        )));
    }

    let floor: Vec<f64> = (0..d)
        .map(|j| {
            let col = x.column(j);
            let m = col.mean();
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
            VAR_FLOOR * (var + 1e-12)
        })
        .collect();

    let k = groups.len();
    let mut means = DMatrix::zeros(k, d);
    let mut variances = DMatrix::zeros(k, d);
    let mut priors = Vec::with_capacity(k);
    let mut classes = Vec::with_capacity(k);
    for (ci, (name, rows)) in groups.iter().enumerate() {
        classes.push((*name).to_string());
        priors.push(rows.len() as f64 / n as f64);
        let cnt = rows.len() as f64;
        for j in 0..d {
            let m = rows.iter().map(|&r| x[(r, j)]).sum::<f64>() / cnt;
            let v = rows.iter().map(|&r| (x[(r, j)] - m).powi(2)).sum::<f64>() / cnt;
            means[(ci, j)] = m;
            variances[(ci, j)] = v.max(floor[j]);
        }
    }
    // Priors are frequencies; renormalize so they sum to 1 to rounding.
    let total: f64 = priors.iter().sum();
    priors.iter_mut().for_each(|p| *p /= total);
    // A column constant in training has equal class parameters in exact
    // arithmetic even where the per-class sums round differently.
    let mut shared = shared_columns(&means, &variances);
    for (j, s) in shared.iter_mut().enumerate() {
        *s |= x.column(j).iter().all(|&v| v == x[(0, j)]);
    }
    Ok(NbModel {
        classes,
        priors,
        shared,
        means,
        variances,
    })
}

/// Counts indexed `[true][predicted]`; averaged matrices may hold fractional counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: Vec<String>) -> Self {
        let k = classes.len();
        Self {
            classes,
            counts: vec![vec![0.0; k]; k],
        }
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Elementwise accumulation; class lists must match.
    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.classes != other.classes {
            return Err(Error::Data(
                "confusion matrices over different classes".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.counts.iter_mut().flatten().for_each(|v| *v *= factor);
    }
}

/// Success ratio and confusion matrix of `model` on a labeled test set.
pub fn evaluate<S: AsRef<str>>(
    model: &NbModel,
    x: &DMatrix<f64>,
    labels: &[S],
) -> Result<(f64, ConfusionMatrix)> {
    if x.nrows() == 0 {
        return Err(Error::Data("empty test set".into()));
    }
    if labels.len() != x.nrows() {
        return Err(Error::Dimension {
            expected: x.nrows(),
            got: labels.len(),
        });
    }
    let mut cm = ConfusionMatrix::zeros(model.classes.clone());
    let mut correct = 0usize;
    let mut row = vec![0.0; x.ncols()];
    for (r, label) in labels.iter().enumerate() {
        let truth = model
            .classes
            .iter()
            .position(|c| c == label.as_ref())
            .ok_or_else(|| {
                Error::Data(format!("test label {} unknown to model", label.as_ref()))
            })?;
        for (j, v) in row.iter_mut().enumerate() {
            *v = x[(r, j)];
        }
        let pred = model.predict_index(&row)?;
        cm.counts[truth][pred] += 1.0;
        if pred == truth {
            correct += 1;
        }
    }
    Ok((correct as f64 / x.nrows() as f64, cm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn two_gaussians(p0: f64) -> NbModel {
        NbModel::from_parameters(
            labels(&["a", "b"]),
            vec![p0, 1.0 - p0],
            DMatrix::from_row_slice(2, 1, &[0.0, 10.0]),
            DMatrix::from_element(2, 1, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn fit_floors_zero_variance() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 0.0, 1.0, 1.0]);
        let m = fit(&x, &["a", "a", "b", "b"]).unwrap();
        assert_eq!(m.means().as_slice(), &[0.0, 1.0]);
        let floor = VAR_FLOOR * (0.25 + 1e-12);
        assert!(m.variances().iter().all(|&v| v == floor));
        assert_eq!(m.priors(), &[0.5, 0.5]);
    }

    #[test]
    fn constant_column_does_not_swamp_prediction() {
        // Three copies of 0.1 average to 0.10000000000000002, two to 0.1.
        let x = DMatrix::from_row_slice(5, 2, &[0.0, 0.1, 0.2, 0.1, 0.1, 0.1, 3.0, 0.1, 3.2, 0.1]);
        let m = fit(&x, &["a", "a", "a", "b", "b"]).unwrap();
        assert_ne!(m.means()[(0, 1)], m.means()[(1, 1)]);
        assert_eq!(m.predict(&[2.9, 3.0]).unwrap(), "b");
        assert_eq!(m.predict(&[0.1, -40.0]).unwrap(), "a");
    }

    #[test]
    fn balanced_priors() {
        let x = DMatrix::from_fn(6, 2, |r, c| (r * 2 + c) as f64);
        let m = fit(&x, &["c", "a", "b", "a", "b", "c"]).unwrap();
        assert_eq!(m.classes(), &["a", "b", "c"]);
        for p in m.priors() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fit_matches_group_by_oracle() {
        let mut rng = crate::rng::seeded(50);
        let x = DMatrix::from_fn(50, 10, |_, _| rng.gen_range(-5.0..5.0));
        let y: Vec<String> = (0..50)
            .map(|i| ["p", "q", "r"][i % 3].to_string())
            .collect();
        let m = fit(&x, &y).unwrap();
        for (ci, c) in m.classes().iter().enumerate() {
            let rows: Vec<usize> = (0..50).filter(|&i| &y[i] == c).collect();
            for j in 0..10 {
                let vals: Vec<f64> = rows.iter().map(|&r| x[(r, j)]).collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let var =
                    vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
                assert!((m.means()[(ci, j)] - mean).abs() < 1e-12);
                assert!((m.variances()[(ci, j)] - var).abs() < 1e-12);
            }
            assert!((m.priors()[ci] - rows.len() as f64 / 50.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fit_errors() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        assert!(matches!(fit(&x, &["a", "a", "b"]), Err(Error::Fit(_))));
        assert!(matches!(fit(&x, &["a", "a", "a"]), Err(Error::Fit(_))));
        let bad =
            DMatrix::from_row_slice(4, 2, &[0.0, 1.0, 0.0, f64::INFINITY, 1.0, 1.0, 2.0, 2.0]);
        let err = fit(&bad, &["a", "a", "b", "b"]).unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("column 1")));
    }

    #[test]
    fn nearer_mean_wins() {
        assert_eq!(two_gaussians(0.5).predict(&[1.0]).unwrap(), "a");
    }

    #[test]
    fn prior_dominates_at_midpoint() {
        // At x = 5 both likelihoods are equal; only log priors differ.
        let m = two_gaussians(0.999);
        let s = m.log_joint(&[5.0]).unwrap();
        assert!((s[0] - s[1] - (0.999f64.ln() - 0.001f64.ln())).abs() < 1e-12);
        assert_eq!(m.predict(&[5.0]).unwrap(), "a");
        assert_eq!(two_gaussians(0.001).predict(&[5.0]).unwrap(), "b");
    }

    #[test]
    fn exact_tie_goes_to_first_class() {
        assert_eq!(two_gaussians(0.5).predict(&[5.0]).unwrap(), "a");
    }

    #[test]
    fn class_mean_with_tiny_variance() {
        let m = NbModel::from_parameters(
            labels(&["a", "b", "c"]),
            vec![0.2, 0.3, 0.5],
            DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0]),
            DMatrix::from_element(3, 2, 1e-6),
        )
        .unwrap();
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap(), "b");
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            two_gaussians(0.5).predict(&[1.0, 2.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn evaluate_perfect_and_partial() {
        let m = two_gaussians(0.5);
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 9.0, 12.0]);
        let (s, cm) = evaluate(&m, &x, &["a", "a", "b", "b"]).unwrap();
        assert_eq!(s, 1.0);
        assert_eq!(cm.counts, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);

        // Boundary at 5: 4.9 -> a, 5.1 -> b.
        let x = DMatrix::from_row_slice(5, 1, &[4.9, 5.1, 6.0, 3.0, 7.0]);
        let (s, cm) = evaluate(&m, &x, &["a", "a", "a", "b", "b"]).unwrap();
        assert!((s - 2.0 / 5.0).abs() < 1e-15);
        assert_eq!(cm.row_sums(), vec![3.0, 2.0]);
        assert_eq!(cm.trace(), 2.0);
    }

    #[test]
    fn evaluate_single_class_test_set() {
        let m = two_gaussians(0.5);
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 6.0, 1.0]);
        let (s, cm) = evaluate(&m, &x, &["a", "a", "a"]).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cm.counts[1], vec![0.0, 0.0]);
        assert!(evaluate(&m, &DMatrix::zeros(0, 1), &[] as &[&str]).is_err());
    }

    #[test]
    fn prior_shift_invariance() {
        let mut rng = crate::rng::seeded(9);
        let x = DMatrix::from_fn(40, 3, |_, _| rng.gen_range(0.0..1.0));
        let y: Vec<&str> = (0..40)
            .map(|i| if i % 4 == 0 { "a" } else { "b" })
            .collect();
        let m = fit(&x, &y).unwrap();
        for r in 0..40 {
            let row: Vec<f64> = x.row(r).iter().copied().collect();
            let s = m.log_joint(&row).unwrap();
            let shifted: Vec<f64> = s.iter().map(|v| v + 123.0).collect();
            let argmax = |v: &[f64]| (0..v.len()).fold(0, |b, k| if v[k] > v[b] { k } else { b });
            assert_eq!(argmax(&s), argmax(&shifted));
        }
    }
}
