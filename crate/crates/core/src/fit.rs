//! Model fitting: closed-form least squares for the linear model and
//! iteratively reweighted least squares for canonical-link GLMs.

use nalgebra::linalg::Cholesky;
use nalgebra::{DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{family_mean, family_variance, CoefficientVector, DesignMatrix, Family, ResponseVector};

/// Bound on `|eta|` beyond which a logistic fit is declared divergent.
pub const LOGISTIC_ETA_LIMIT: f64 = 35.0;
/// Bound on `eta` beyond which the Poisson mean is considered overflowed.
pub const POISSON_ETA_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrlsOptions {
    /// Convergence threshold on the max-norm of the coefficient change.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
        }
    }
}

/// A fitted model together with everything the residual and resampling
/// stages need: fitted means, variance weights, leverages and the Cholesky
/// factor of `X'VX` (`X'X` for the linear model).
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub beta_hat: CoefficientVector,
    pub eta_hat: DVector<f64>,
    pub mu_hat: DVector<f64>,
    pub v_hat: DVector<f64>,
    pub hat_diag: DVector<f64>,
    pub family: Family,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood (up to constants) after each IRLS update. Empty for OLS.
    pub log_likelihood_trace: Vec<f64>,
    gram: Cholesky<f64, Dyn>,
}

impl FittedModel {
    /// Cholesky factor of the weighted Gram matrix `X'VX` at `beta_hat`.
    pub fn gram_factor(&self) -> &Cholesky<f64, Dyn> {
        &self.gram
    }

    /// `X'VX` reassembled from its factor.
    pub fn gram(&self) -> DMatrix<f64> {
        let l = self.gram.l();
        &l * l.transpose()
    }

    /// `(X'VX)^{-1}`.
    pub fn gram_inverse(&self) -> DMatrix<f64> {
        self.gram.inverse()
    }

    /// Square roots of the variance weights.
    pub fn sqrt_weights(&self) -> DVector<f64> {
        self.v_hat.map(f64::sqrt)
    }

    pub fn n(&self) -> usize {
        self.mu_hat.len()
    }

    pub fn p(&self) -> usize {
        self.beta_hat.len()
    }
}

/// `X' diag(w) X`, formed from the row-scaled design.
pub(crate) fn weighted_gram(x: &DMatrix<f64>, weights: Option<&DVector<f64>>) -> DMatrix<f64> {
    match weights {
        None => x.tr_mul(x),
        Some(w) => {
            let scaled = scale_rows(x, &w.map(f64::sqrt));
            scaled.tr_mul(&scaled)
        }
    }
}

pub(crate) fn scale_rows(x: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        col.component_mul_assign(s);
    }
    out
}

fn factor(gram: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(gram).ok_or(Error::Singular)
}

/// Leverages from an existing factor of `X'WX`: `h_i = w_i x_i' (X'WX)^{-1} x_i`.
fn hat_from_factor(x: &DMatrix<f64>, weights: Option<&DVector<f64>>, chol: &Cholesky<f64, Dyn>) -> DVector<f64> {
    // L^{-1} X', one column per observation
    let mut u = x.transpose();
    chol.l_dirty().solve_lower_triangular_mut(&mut u);
    let mut h = DVector::zeros(x.nrows());
    for (i, col) in u.column_iter().enumerate() {
        let q = col.norm_squared();
        h[i] = match weights {
            Some(w) => w[i] * q,
            None => q,
        };
    }
    h
}

/// Diagonal of the weighted projection `W^{1/2} X (X'WX)^{-1} X' W^{1/2}`,
/// computed in `O(np^2)` without forming the `n x n` projection.
pub fn hat_diagonals(x: &DesignMatrix, weights: &DVector<f64>) -> Result<DVector<f64>> {
    if weights.len() != x.n() {
        return Err(Error::Dimension("weights length must equal n".into()));
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, &w)| !(w >= 0.0)) {
        return Err(Error::DegenerateVariance { index, value });
    }
    let chol = factor(weighted_gram(x.matrix(), Some(weights)))?;
    Ok(hat_from_factor(x.matrix(), Some(weights), &chol))
}

/// Ordinary least squares via the Cholesky factor of `X'X`.
pub fn fit_ols(x: &DesignMatrix, y: &ResponseVector) -> Result<FittedModel> {
    y.check_pair(x)?;
    let xm = x.matrix();
    let chol = factor(weighted_gram(xm, None))?;
    let beta_hat = chol.solve(&xm.tr_mul(y.values()));
    let eta_hat = xm * &beta_hat;
    let hat_diag = hat_from_factor(xm, None, &chol);
    Ok(FittedModel {
        mu_hat: eta_hat.clone(),
        eta_hat,
        v_hat: DVector::from_element(x.n(), 1.0),
        hat_diag,
        beta_hat,
        family: Family::Gaussian,
        iterations: 0,
        converged: true,
        log_likelihood_trace: Vec::new(),
        gram: chol,
    })
}

fn check_divergence(family: Family, eta: &DVector<f64>, iteration: usize) -> Result<()> {
    let bad = match family {
        Family::Gaussian => eta.iter().any(|e| !e.is_finite()),
        Family::Logistic => eta.iter().any(|e| !(e.abs() <= LOGISTIC_ETA_LIMIT)),
        Family::Poisson => eta.iter().any(|e| !(*e <= POISSON_ETA_LIMIT)),
    };
    if bad {
        Err(Error::Diverged { iteration })
    } else {
        Ok(())
    }
}

fn log_likelihood(family: Family, y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &ei)| family.log_likelihood(yi, ei))
        .sum()
}

/// IRLS for a canonical-link GLM, started from `beta = 0`.
///
/// Each step regresses the working response `z = eta + (y - mu) / v` on `X`
/// with weights `v`. Stops when the max-norm change in `beta` is at most
/// `opts.tol`; hitting `opts.max_iter` returns the last iterate with
/// `converged = false`.
pub fn fit_irls(x: &DesignMatrix, y: &ResponseVector, family: Family, opts: IrlsOptions) -> Result<FittedModel> {
    y.check_pair(x)?;
    if family != Family::Gaussian && y.kind() != family.response_kind() {
        return Err(Error::Config(format!(
            "{family} family requires a {:?} response, got {:?}",
            family.response_kind(),
            y.kind()
        )));
    }
    let xm = x.matrix();
    let yv = y.values();
    let mut beta = DVector::zeros(x.p());
    let mut converged = false;
    let mut iterations = 0;
    let mut trace = Vec::new();

    for iteration in 1..=opts.max_iter {
        let eta = xm * &beta;
        check_divergence(family, &eta, iteration)?;
        let mu = family_mean(family, &eta);
        let v = family_variance(family, &mu)?;
        let z = DVector::from_fn(eta.len(), |i, _| eta[i] + (yv[i] - mu[i]) / v[i]);
        let chol = factor(weighted_gram(xm, Some(&v)))?;
        let next = chol.solve(&xm.tr_mul(&v.component_mul(&z)));
        let change = (&next - &beta).amax();
        beta = next;
        iterations = iteration;
        trace.push(log_likelihood(family, yv, &(xm * &beta)));
        if !change.is_finite() {
            return Err(Error::Diverged { iteration });
        }
        if change <= opts.tol {
            converged = true;
            break;
        }
    }

    let eta_hat = xm * &beta;
    check_divergence(family, &eta_hat, iterations)?;
    let mu_hat = family_mean(family, &eta_hat);
    let v_hat = family_variance(family, &mu_hat)?;
    let chol = factor(weighted_gram(xm, Some(&v_hat)))?;
    let hat_diag = hat_from_factor(xm, Some(&v_hat), &chol);
    Ok(FittedModel {
        beta_hat: beta,
        eta_hat,
        mu_hat,
        v_hat,
        hat_diag,
        family,
        iterations,
        converged,
        log_likelihood_trace: trace,
        gram: chol,
    })
}

/// Fits `family`, routing the linear model to OLS and the others to IRLS.
pub fn fit(x: &DesignMatrix, y: &ResponseVector, family: Family, opts: IrlsOptions) -> Result<FittedModel> {
    match family {
        Family::Gaussian => fit_ols(x, y),
        _ => fit_irls(x, y, family, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RngStream;
    use rand::Rng;

    fn random_design(n: usize, p: usize, seed: u64) -> DesignMatrix {
        let mut rng = RngStream::new(seed, 0).rng();
        let vals: Vec<f64> = (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect();
        DesignMatrix::from_row_slice(n, p, &vals).unwrap()
    }

    /// Gauss-Jordan with partial pivoting; deliberately unrelated to Cholesky.
    fn gauss_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
        let n = a.nrows();
        let mut m = DMatrix::zeros(n, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.set_column(n, b);
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs()))
                .unwrap();
            m.swap_rows(c, piv);
            for r in 0..n {
                if r != c {
                    let f = m[(r, c)] / m[(c, c)];
                    for k in c..=n {
                        m[(r, k)] -= f * m[(c, k)];
                    }
                }
            }
        }
        DVector::from_fn(n, |i, _| m[(i, n)] / m[(i, i)])
    }

    #[test]
    fn ols_mean_model() {
        let x = DesignMatrix::from_row_slice(3, 1, &[1.0, 1.0, 1.0]).unwrap();
        let y = ResponseVector::continuous(vec![1.0, 2.0, 3.0]).unwrap();
        let f = fit_ols(&x, &y).unwrap();
        assert!((f.beta_hat[0] - 2.0).abs() < 1e-14);
        for h in f.hat_diag.iter() {
            assert!((h - 1.0 / 3.0).abs() < 1e-14);
        }
        assert!(f.converged);
        assert_eq!(f.iterations, 0);
    }

    #[test]
    fn ols_perfect_fit_orthonormal() {
        let s = 0.5f64.sqrt();
        let x = DesignMatrix::from_row_slice(4, 2, &[s, 0.0, s, 0.0, 0.0, s, 0.0, s]).unwrap();
        let c = DVector::from_vec(vec![3.0, -1.25]);
        let y = ResponseVector::new(x.matrix() * &c, crate::model::ResponseKind::Continuous).unwrap();
        let f = fit_ols(&x, &y).unwrap();
        assert!((&f.beta_hat - &c).amax() < 1e-14);
    }

    #[test]
    fn ols_matches_normal_equations_oracle() {
        let x = random_design(50, 3, 7);
        let mut rng = RngStream::new(7, 1).rng();
        let beta = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let noise = DVector::from_fn(50, |_, _| rng.random_range(-1.0..1.0));
        let y = ResponseVector::new(x.matrix() * &beta + noise, crate::model::ResponseKind::Continuous).unwrap();
        let f = fit_ols(&x, &y).unwrap();
        let xm = x.matrix();
        let oracle = gauss_solve(&xm.tr_mul(xm), &xm.tr_mul(y.values()));
        assert!((&f.beta_hat - &oracle).amax() < 1e-10);
        // residuals orthogonal to the columns
        let r = y.values() - xm * &f.beta_hat;
        assert!(xm.tr_mul(&r).amax() < 1e-8 * y.values().norm());
        assert!((f.hat_diag.sum() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn hat_diagonals_intercept_only() {
        let x = DesignMatrix::from_row_slice(5, 1, &[1.0; 5]).unwrap();
        let h = hat_diagonals(&x, &DVector::from_element(5, 1.0)).unwrap();
        for v in h.iter() {
            assert!((v - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn hat_diagonals_match_explicit_projection() {
        let x = random_design(10, 2, 3);
        let h = hat_diagonals(&x, &DVector::from_element(10, 1.0)).unwrap();
        let xm = x.matrix();
        let inv = xm.tr_mul(xm).try_inverse().unwrap();
        let proj = xm * inv * xm.transpose();
        for i in 0..10 {
            assert!((h[i] - proj[(i, i)]).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_hat_diagonals_bounds() {
        for seed in 0..20 {
            let x = random_design(30, 4, seed);
            let mut rng = RngStream::new(seed, 5).rng();
            let w = DVector::from_fn(30, |_, _| rng.random_range(0.05..3.0));
            let h = hat_diagonals(&x, &w).unwrap();
            assert!(h.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!((h.sum() - 4.0).abs() < 1e-6 * 4.0);
        }
        let x = random_design(8, 2, 1);
        assert!(hat_diagonals(&x, &DVector::from_element(8, -1.0)).is_err());
    }

    #[test]
    fn logistic_intercept_balanced() {
        let x = DesignMatrix::from_row_slice(100, 1, &[1.0; 100]).unwrap();
        let y: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let f = fit_irls(
            &x,
            &ResponseVector::binary(y).unwrap(),
            Family::Logistic,
            IrlsOptions::default(),
        )
        .unwrap();
        assert!(f.converged);
        assert!(f.beta_hat[0].abs() < 1e-8);
    }

    #[test]
    fn poisson_intercept_is_log_mean() {
        let x = DesignMatrix::from_row_slice(100, 1, &[1.0; 100]).unwrap();
        let y: Vec<f64> = (0..100).map(|i| (i % 5) as f64).collect(); // mean 2
        let f = fit_irls(
            &x,
            &ResponseVector::count(y).unwrap(),
            Family::Poisson,
            IrlsOptions::default(),
        )
        .unwrap();
        assert!(f.converged);
        assert!((f.beta_hat[0] - 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn logistic_matches_newton_oracle() {
        let n = 500;
        let x = random_design(n, 3, 11);
        let beta = DVector::from_vec(vec![0.2, 0.2, 0.0]);
        let mut rng = RngStream::new(11, 1).rng();
        let eta = x.matrix() * &beta;
        let y: Vec<f64> = eta
            .iter()
            .map(|e| {
                let p = 1.0 / (1.0 + (-e).exp());
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let yv = DVector::from_vec(y.clone());
        let f = fit_irls(
            &x,
            &ResponseVector::binary(y).unwrap(),
            Family::Logistic,
            IrlsOptions::default(),
        )
        .unwrap();

        // Newton-Raphson directly on the log-likelihood
        let xm = x.matrix();
        let mut b = DVector::zeros(3);
        for _ in 0..100 {
            let eta = xm * &b;
            let mu = eta.map(|e| 1.0 / (1.0 + (-e).exp()));
            let grad = xm.tr_mul(&(&yv - &mu));
            let mut hess = DMatrix::zeros(3, 3);
            for i in 0..n {
                let w = mu[i] * (1.0 - mu[i]);
                let r = xm.row(i);
                hess += w * r.transpose() * r;
            }
            let step = gauss_solve(&hess, &grad);
            b += &step;
            if step.amax() < 1e-14 {
                break;
            }
        }
        assert!((&f.beta_hat - &b).amax() < 1e-8, "{} vs {}", f.beta_hat, b);
        // score at the fixed point
        let score = xm.tr_mul(&(&yv - &f.mu_hat));
        assert!(score.amax() <= 10.0 * 1e-8 * n as f64);
        // log-likelihood non-decreasing over the final iterations
        let t = &f.log_likelihood_trace;
        assert!(t.len() >= 3);
        for w in t[t.len() - 3..].windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn gaussian_irls_reproduces_ols_in_one_step() {
        let x = random_design(40, 3, 5);
        let mut rng = RngStream::new(5, 2).rng();
        let y = ResponseVector::continuous((0..40).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<_>>()).unwrap();
        let ols = fit_ols(&x, &y).unwrap();
        let one = fit_irls(&x, &y, Family::Gaussian, IrlsOptions { tol: 1e-8, max_iter: 1 }).unwrap();
        assert_eq!(one.beta_hat, ols.beta_hat);
        let full = fit_irls(&x, &y, Family::Gaussian, IrlsOptions::default()).unwrap();
        assert!(full.converged);
        assert!((&full.beta_hat - &ols.beta_hat).amax() < 1e-12);
    }

    #[test]
    fn separated_logistic_diverges() {
        let x = DesignMatrix::from_row_slice(6, 2, &[1.0, -3.0, 1.0, -2.0, 1.0, -1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0])
            .unwrap();
        let y = ResponseVector::binary(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let err = fit_irls(&x, &y, Family::Logistic, IrlsOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn max_iter_reports_non_convergence() {
        let x = random_design(200, 2, 9);
        let y: Vec<f64> = (0..200).map(|i| (i % 7) as f64).collect();
        let f = fit_irls(
            &x,
            &ResponseVector::count(y).unwrap(),
            Family::Poisson,
            IrlsOptions { tol: 1e-8, max_iter: 2 },
        )
        .unwrap();
        assert!(!f.converged);
        assert_eq!(f.iterations, 2);
    }

    #[test]
    fn irls_rejects_wrong_response_kind() {
        let x = random_design(10, 1, 1);
        let y = ResponseVector::count(vec![2.0; 10]).unwrap();
        assert!(fit_irls(&x, &y, Family::Logistic, IrlsOptions::default()).is_err());
    }
}
