//! Independent reference computations shared by the integration tests.
//! Everything here is written from the definitions, without the library's
//! Cholesky-based solvers or the folded operator.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use srb::{
    centered_residuals, fit, DesignMatrix, Family, FittedModel, IrlsOptions, ResidualSet, ResponseVector, RngStream,
};

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut r = b.clone();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap();
        m.swap_rows(col, piv);
        r.swap_rows(col, piv);
        let d = m[(col, col)];
        assert!(d.abs() > 1e-300, "singular system");
        for j in 0..n {
            m[(col, j)] /= d;
        }
        for j in 0..r.ncols() {
            r[(col, j)] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = m[(i, col)];
                if f != 0.0 {
                    for j in 0..n {
                        m[(i, j)] -= f * m[(col, j)];
                    }
                    for j in 0..r.ncols() {
                        r[(i, j)] -= f * r[(col, j)];
                    }
                }
            }
        }
    }
    r
}

pub fn solve_vec(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    gauss_jordan(a, &DMatrix::from_column_slice(b.len(), 1, b.as_slice()))
        .column(0)
        .into_owned()
}

/// The `b x n` concatenation matrix: `J[j, i] = 1` iff `i mod b = j`.
pub fn j_matrix(n: usize, b: usize) -> DMatrix<f64> {
    DMatrix::from_fn(b, n, |j, i| if i % b == j { 1.0 } else { 0.0 })
}

/// Least squares by Householder QR.
pub fn ols_qr(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * y;
    qr.r().solve_upper_triangular(&qty).expect("full rank")
}

/// Replicate computed from the definition: explicit concatenated residual
/// vector, then an OLS refit of `X beta_hat + J' eps_b` (gaussian) or the
/// one-step weighted solve `beta_hat + (B'B)^{-1} B' J' eps_b` with
/// `B = V^{1/2} X` (GLM).
pub fn refit_oracle(x: &DMatrix<f64>, f: &FittedModel, eps_b: &DVector<f64>) -> DVector<f64> {
    let n = x.nrows();
    let eps = j_matrix(n, eps_b.len()).transpose() * eps_b;
    match f.family {
        Family::Gaussian => ols_qr(x, &(x * &f.beta_hat + eps)),
        _ => {
            let mut bm = x.clone();
            for i in 0..n {
                let s = f.v_hat[i].sqrt();
                bm.row_mut(i).scale_mut(s);
            }
            &f.beta_hat + solve_vec(&(bm.transpose() * &bm), &(bm.transpose() * eps))
        }
    }
}

pub struct Fixture {
    pub x: DesignMatrix,
    pub y: ResponseVector,
    pub fit: FittedModel,
    pub rs: ResidualSet,
}

/// Random fixture with an intercept and `p - 1` uniform covariates.
/// Linear responses get standard normal noise scaled by `noise`.
pub fn fixture(family: Family, n: usize, p: usize, seed: u64, noise: f64) -> Fixture {
    let mut rng = RngStream::new(seed, 99).rng();
    let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.0..1.0) });
    let beta = DVector::from_fn(p, |j, _| match family {
        Family::Gaussian => 1.0 - 0.3 * j as f64,
        _ => {
            if j < 3 {
                0.3
            } else {
                0.0
            }
        }
    });
    let eta = &x * &beta;
    let y: Vec<f64> = eta
        .iter()
        .map(|&e| match family {
            Family::Gaussian => e + noise * Distribution::<f64>::sample(&StandardNormal, &mut rng),
            Family::Logistic => f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-e).exp()))),
            Family::Poisson => Poisson::new(e.exp()).unwrap().sample(&mut rng),
        })
        .collect();
    let x = DesignMatrix::new(x).unwrap();
    let y = ResponseVector::new(DVector::from_vec(y), family.response_kind()).unwrap();
    let f = fit(&x, &y, family, IrlsOptions::default()).unwrap();
    let rs = centered_residuals(&f, &y).unwrap();
    Fixture { x, y, fit: f, rs }
}

/// Sample covariance of the rows of `m` (denominator `R - 1`).
pub fn sample_covariance(m: &DMatrix<f64>) -> DMatrix<f64> {
    let r = m.nrows() as f64;
    let mean = m.row_mean();
    let mut c = m.clone();
    for mut row in c.row_iter_mut() {
        row -= &mean;
    }
    c.transpose() * &c / (r - 1.0)
}

/// `1 / (1 - R^2)` with each auxiliary regression (plus intercept) solved
/// separately by QR.
pub fn vif_oracle(x: &DMatrix<f64>) -> Vec<f64> {
    let (n, p) = x.shape();
    (0..p)
        .map(|j| {
            let others: Vec<usize> = (0..p).filter(|&k| k != j).collect();
            let z = DMatrix::from_fn(n, p, |i, c| if c == 0 { 1.0 } else { x[(i, others[c - 1])] });
            let y = x.column(j).into_owned();
            let coef = ols_qr(&z, &y);
            let resid = &y - &z * coef;
            let mean = y.mean();
            let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
            1.0 / (resid.norm_squared() / tss)
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
