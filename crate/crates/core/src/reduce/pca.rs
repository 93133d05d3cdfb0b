use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-12;

/// Covariance PCA fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// `k x d`, orthonormal rows in descending eigenvalue order.
    pub components: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Fraction of the total variance carried by the kept components.
    pub retained_variance: f64,
    /// Sum of all feature variances of the training data.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.components.ncols()
    }
}

/// Centers `x` by its column means and eigendecomposes the sample covariance
/// (denominator `n - 1`), keeping the fewest leading components whose
/// eigenvalues reach `threshold` of the total variance.
///
/// When there are fewer rows than columns the `n x n` Gram matrix is
/// decomposed instead; its non-zero spectrum equals the covariance spectrum
/// and the components follow as `X^T u / sqrt((n - 1) lambda)`.
pub fn pca_fit(x: &DMatrix<f64>, threshold: f64) -> Result<PcaModel> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::Fit(format!("PCA needs at least 2 rows, got {n}")));
    }
    if d == 0 {
        return Err(Error::Fit("PCA needs at least one feature".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Parameter(format!(
            "variance threshold must be in (0, 1], got {threshold}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in PCA input".into()));
    }
    let mean = DVector::from_fn(d, |j, _| x.column(j).mean());
    let mut centered = x.clone();
    for j in 0..d {
        let m = mean[j];
        centered.column_mut(j).iter_mut().for_each(|v| *v -= m);
    }
    let denom = (n - 1) as f64;
    let total_variance: f64 = (0..d)
        .map(|j| centered.column(j).norm_squared() / denom)
        .sum();
    if !(total_variance > 0.0) {
        return Err(Error::Fit("all features have zero variance".into()));
    }

    let (values, vectors) = if d <= n {
        let cov = (centered.transpose() * &centered) / denom;
        let eig = SymmetricEigen::new(cov);
        (eig.eigenvalues, eig.eigenvectors)
    } else {
        let gram = (&centered * centered.transpose()) / denom;
        let eig = SymmetricEigen::new(gram);
        let mut vecs = DMatrix::zeros(d, n);
        for k in 0..n {
            let v = centered.transpose() * eig.eigenvectors.column(k);
            let norm = v.norm();
            if norm > 0.0 {
                vecs.set_column(k, &(v / norm));
            }
        }
        (eig.eigenvalues, vecs)
    };

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let top = values[order[0]];
    let mut eigenvalues = Vec::new();
    let mut rows = Vec::new();
    let mut cumulative = 0.0;
    for &k in &order {
        let lambda = values[k];
        if lambda <= top * RANK_TOL {
            break;
        }
        eigenvalues.push(lambda);
        rows.push(k);
        cumulative += lambda;
        if cumulative / total_variance >= threshold {
            break;
        }
    }
    let components = DMatrix::from_fn(rows.len(), d, |r, c| vectors[(c, rows[r])]);
    let components = orient(components);
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        retained_variance: (cumulative / total_variance).min(1.0),
        total_variance,
    })
}

/// Flips each component so its largest-magnitude entry is positive.
fn orient(mut c: DMatrix<f64>) -> DMatrix<f64> {
    for mut row in c.row_iter_mut() {
        let pivot = row
            .iter()
            .copied()
            .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if pivot < 0.0 {
            row.neg_mut();
        }
    }
    c
}

/// Projects rows of `x` onto the model components: `(x - mean) C^T`.
pub fn pca_project(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.n_features() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            got: x.ncols(),
        });
    }
    let mut centered = x.clone();
    for j in 0..x.ncols() {
        let m = model.mean[j];
        centered.column_mut(j).iter_mut().for_each(|v| *v -= m);
    }
    Ok(centered * model.components.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Box-Muller standard normal.
    fn normal(rng: &mut impl Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn line_has_one_component() {
        let mut rng = crate::rng::seeded(1);
        let x = DMatrix::from_fn(200, 2, |r, _| r as f64 / 10.0 + 1e-3 * normal(&mut rng));
        let m = pca_fit(&x, 0.95).unwrap();
        assert_eq!(m.n_components(), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.components[(0, 0)] - s).abs() < 1e-4);
        assert!((m.components[(0, 1)] - s).abs() < 1e-4);
    }

    #[test]
    fn isotropic_keeps_all() {
        let mut rng = crate::rng::seeded(2);
        let x = DMatrix::from_fn(2000, 3, |_, _| normal(&mut rng));
        let m = pca_fit(&x, 0.95).unwrap();
        assert_eq!(m.n_components(), 3);
    }

    #[test]
    fn projected_mean_is_zero() {
        let mut rng = crate::rng::seeded(3);
        let x = DMatrix::from_fn(30, 5, |_, _| rng.gen_range(-1.0..1.0));
        let m = pca_fit(&x, 0.99).unwrap();
        let mean = DMatrix::from_row_slice(1, 5, m.mean.as_slice());
        let p = pca_project(&m, &mean).unwrap();
        assert!(p.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn gram_and_covariance_routes_agree() {
        let mut rng = crate::rng::seeded(4);
        // 12 rows, 12 columns goes through covariance; 12 x 13 through Gram.
        let x = DMatrix::from_fn(12, 13, |_, _| rng.gen_range(-1.0..1.0));
        let wide = pca_fit(&x, 1.0).unwrap();
        let mut padded = DMatrix::zeros(14, 13);
        // Same data plus two copies of the mean row leave the covariance scaled by 11/13.
        padded.view_mut((0, 0), (12, 13)).copy_from(&x);
        let mean = x.row_mean();
        padded.row_mut(12).copy_from(&mean);
        padded.row_mut(13).copy_from(&mean);
        let tall = pca_fit(&padded, 1.0).unwrap();
        assert_eq!(wide.n_components(), 11);
        assert_eq!(tall.n_components(), 11);
        for (a, b) in wide.eigenvalues.iter().zip(&tall.eigenvalues) {
            assert!((a * 11.0 / 13.0 - b).abs() < 1e-10 * a);
        }
        for k in 0..11 {
            let dot = wide.components.row(k).dot(&tall.components.row(k));
            assert!((dot.abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn errors() {
        assert!(pca_fit(&DMatrix::zeros(1, 3), 0.9).is_err());
        assert!(matches!(
            pca_fit(&DMatrix::zeros(5, 3), 0.9),
            Err(Error::Fit(_))
        ));
        let x = DMatrix::from_fn(4, 2, |r, c| (r + c) as f64);
        assert!(matches!(pca_fit(&x, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(pca_fit(&x, 1.5), Err(Error::Parameter(_))));
        let m = pca_fit(&x, 0.9).unwrap();
        assert!(matches!(
            pca_project(&m, &DMatrix::zeros(2, 3)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn truncation_never_reduces_reconstruction_error() {
        let mut rng = crate::rng::seeded(5);
        let x = DMatrix::from_fn(40, 6, |_, c| normal(&mut rng) * (c + 1) as f64);
        let m = pca_fit(&x, 1.0).unwrap();
        let p = pca_project(&m, &x).unwrap();
        let err = |k: usize| -> f64 {
            let c = m.components.rows(0, k);
            let recon = p.columns(0, k) * c;
            let mut total = 0.0;
            for r in 0..x.nrows() {
                for j in 0..x.ncols() {
                    total += (x[(r, j)] - m.mean[j] - recon[(r, j)]).powi(2);
                }
            }
            total
        };
        let errs: Vec<f64> = (1..=m.n_components()).map(err).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }
}
