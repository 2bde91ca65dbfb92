//! Residual bootstrap (RB) and subsampled residual bootstrap (SRB).
//!
//! Both schemes write a replicate as `beta* = beta_hat + A eps`, where `A`
//! is precomputed once. For RB `A = (X'VX)^{-1} X'V^{1/2}` is `p x n` and
//! `eps` is a full resample of the centered residuals. For SRB only `b`
//! residuals are drawn; the length-`n` resample is that subsample repeated
//! end to end, so `A = (X'VX)^{-1} X'V^{1/2} J'` folds rows `i` with equal
//! `i mod b` into one column and a replicate costs `O(bp)`.
//!
//! When `b` does not divide `n` the last, partial block uses the first
//! `n mod b` entries of the subsample.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fit::FittedModel;
use crate::model::{CoefficientVector, DesignMatrix, Family, RngStream};
use crate::residuals::ResidualSet;

/// Precomputed `p x b` map from a residual subsample to a coefficient shift.
#[derive(Debug, Clone)]
pub struct BootstrapOperator {
    a: DMatrix<f64>,
    n: usize,
    b: usize,
    m_full: usize,
    r_tail: usize,
    beta_hat: CoefficientVector,
    build_time: Duration,
}

/// The `p x b` fold `X'V^{1/2}J'`: column `j` sums `sqrt(v_i) x_i` over rows `i = j mod b`.
pub fn fold_matrix(fit: &FittedModel, x: &DesignMatrix, b: usize) -> Result<DMatrix<f64>> {
    let (n, p) = (x.n(), x.p());
    if b == 0 || b > n {
        return Err(Error::Config(format!(
            "subsample size must satisfy 1 <= b <= n = {n}, got {b}"
        )));
    }
    if fit.n() != n || fit.p() != p {
        return Err(Error::Dimension("fit does not match the design".into()));
    }
    let xm = x.matrix();
    let gaussian = fit.family == Family::Gaussian;
    let sw = fit.sqrt_weights();
    // accumulate the transpose so both operands are walked column-contiguously
    let mut folded = DMatrix::<f64>::zeros(b, p);
    for k in 0..p {
        let src = xm.column(k);
        let mut dst = folded.column_mut(k);
        for start in (0..n).step_by(b) {
            let len = b.min(n - start);
            for j in 0..len {
                let i = start + j;
                let term = if gaussian { src[i] } else { sw[i] * src[i] };
                dst[j] += term;
            }
        }
    }
    Ok(folded.transpose())
}

impl BootstrapOperator {
    /// Builds `A = (X'VX)^{-1} X'V^{1/2} J'` in `O(np + bp^2)` using the
    /// fit's stored factor; `J` is never materialized.
    pub fn build(fit: &FittedModel, x: &DesignMatrix, b: usize) -> Result<Self> {
        let start = Instant::now();
        let n = x.n();
        let c = fold_matrix(fit, x, b)?;
        let a = fit.gram_factor().solve(&c);
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(Self {
            a,
            n,
            b,
            m_full: n / b,
            r_tail: n % b,
            beta_hat: fit.beta_hat.clone(),
            build_time: start.elapsed(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// Number of complete copies of the subsample in the length-`n` resample.
    pub fn m_full(&self) -> usize {
        self.m_full
    }

    /// Length of the trailing partial copy.
    pub fn r_tail(&self) -> usize {
        self.r_tail
    }

    pub fn beta_hat(&self) -> &CoefficientVector {
        &self.beta_hat
    }

    pub fn build_time(&self) -> Duration {
        self.build_time
    }

    /// `beta_hat + A eps` for a length-`b` residual draw.
    pub fn apply(&self, eps: &DVector<f64>) -> CoefficientVector {
        assert_eq!(eps.len(), self.b, "residual draw must have length b");
        let mut out = self.beta_hat.clone();
        out.gemv(1.0, &self.a, eps, 1.0);
        out
    }

    /// Exact conditional covariance of `beta*` given the data: `sigma2 A A'`,
    /// where `sigma2` is the variance of one draw from the residual set.
    pub fn replicate_covariance(&self, rs: &ResidualSet) -> DMatrix<f64> {
        let n = rs.len() as f64;
        let mean = rs.values.sum() / n;
        let var = rs.values.norm_squared() / n - mean * mean;
        (&self.a * self.a.transpose()) * var
    }
}

fn draw_into<R: Rng + ?Sized>(rs: &ResidualSet, rng: &mut R, eps: &mut DVector<f64>) {
    let n = rs.len();
    for e in eps.iter_mut() {
        *e = rs.values[rng.random_range(0..n)];
    }
}

/// Draws `len` indices uniformly from `0..n` with replacement.
pub fn draw_indices<R: Rng + ?Sized>(rng: &mut R, n: usize, len: usize) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(0..n)).collect()
}

/// One replicate built from explicit residual indices (length `b`).
pub fn replicate_from_indices(op: &BootstrapOperator, rs: &ResidualSet, indices: &[usize]) -> CoefficientVector {
    let eps = DVector::from_iterator(indices.len(), indices.iter().map(|&i| rs.values[i]));
    op.apply(&eps)
}

/// One SRB replicate: `b` residuals drawn with replacement, `O(bp)`.
pub fn srb_replicate<R: Rng + ?Sized>(op: &BootstrapOperator, rs: &ResidualSet, rng: &mut R) -> CoefficientVector {
    let mut eps = DVector::zeros(op.b);
    draw_into(rs, rng, &mut eps);
    op.apply(&eps)
}

/// One classical RB replicate: a full resample of length `n`, `O(np)`.
///
/// `op` must be the full-size operator (`b = n`).
pub fn rb_replicate<R: Rng + ?Sized>(op: &BootstrapOperator, rs: &ResidualSet, rng: &mut R) -> CoefficientVector {
    assert_eq!(op.b, op.n, "RB needs the full-size operator");
    let mut eps = DVector::zeros(op.n);
    draw_into(rs, rng, &mut eps);
    op.apply(&eps)
}

/// How many residuals each replicate draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsampleSize {
    /// `b = n`: classical residual bootstrap.
    Full,
    Fixed(usize),
    /// `b = ceil(n^gamma)`.
    Exponent(f64),
}

impl SubsampleSize {
    pub fn resolve(self, n: usize) -> Result<usize> {
        let b = match self {
            SubsampleSize::Full => n,
            SubsampleSize::Fixed(b) => b,
            SubsampleSize::Exponent(g) => {
                if !(g > 0.0 && g <= 1.0) {
                    return Err(Error::Config(format!("gamma must lie in (0, 1], got {g}")));
                }
                ((n as f64).powf(g).ceil() as usize).min(n)
            }
        };
        if b == 0 || b > n {
            return Err(Error::Config(format!(
                "subsample size must satisfy 1 <= b <= n = {n}, got {b}"
            )));
        }
        Ok(b)
    }
}

/// User-supplied root statistic.
pub type RootFn = Arc<dyn Fn(&CoefficientVector, &CoefficientVector) -> f64 + Send + Sync>;

/// Root statistic `T(beta*, beta_hat)`.
#[derive(Clone)]
pub enum Root {
    /// `||beta* - beta_hat||_2`.
    L2,
    /// `beta*_j - beta_hat_j`.
    Coefficient(usize),
    Custom {
        name: String,
        f: RootFn,
    },
}

impl Root {
    pub fn eval(&self, beta_star: &CoefficientVector, beta_hat: &CoefficientVector) -> f64 {
        match self {
            Root::L2 => (beta_star - beta_hat).norm(),
            Root::Coefficient(j) => beta_star[*j] - beta_hat[*j],
            Root::Custom { f, .. } => f(beta_star, beta_hat),
        }
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Root::L2 => f.write_str("l2"),
            Root::Coefficient(j) => write!(f, "coefficient:{j}"),
            Root::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

impl fmt::Debug for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Root {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapConfig {
    pub subsample: SubsampleSize,
    pub resamples: usize,
    pub level: f64,
    pub root: Root,
    pub seed: u64,
    /// Keep the `R x p` matrix of replicates in the result.
    pub keep_betas: bool,
}

impl BootstrapConfig {
    pub fn new(subsample: SubsampleSize, resamples: usize, level: f64, seed: u64) -> Self {
        Self {
            subsample,
            resamples,
            level,
            root: Root::L2,
            seed,
            keep_betas: false,
        }
    }

    /// Validates against `n` and returns the resolved `b` plus any warnings.
    pub fn validate(&self, n: usize) -> Result<(usize, Vec<String>)> {
        if self.resamples == 0 {
            return Err(Error::Config("at least one resample is required".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "quantile level must lie in (0, 1), got {}",
                self.level
            )));
        }
        let b = self.subsample.resolve(n)?;
        let mut warnings = Vec::new();
        if (b as f64) <= (n as f64).sqrt() {
            warnings.push(format!(
                "subsample size b = {b} is at most sqrt(n) = {:.1}; accuracy is only guaranteed for b >> sqrt(n)",
                (n as f64).sqrt()
            ));
        }
        Ok((b, warnings))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapResult {
    pub roots: Vec<f64>,
    pub q_hat: f64,
    #[serde(skip)]
    pub betas_star: Option<DMatrix<f64>>,
    pub b: usize,
    pub n: usize,
    pub overhead_secs: f64,
    pub loop_secs: f64,
    pub per_replicate_secs: f64,
    pub warnings: Vec<String>,
    pub config: BootstrapConfig,
}

/// Empirical quantile as the order statistic of rank `ceil(R * level)`.
///
/// `R * level` within `1e-9` of an integer is treated as that integer so that
/// e.g. level 0.95 with R = 100 selects rank 95 despite rounding in `0.95`.
pub fn quantile(values: &[f64], level: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[quantile_rank(values.len(), level) - 1]
}

/// 1-based rank used by [`quantile`].
pub fn quantile_rank(r: usize, level: f64) -> usize {
    let t = r as f64 * level;
    let k = if (t - t.round()).abs() < 1e-9 {
        t.round()
    } else {
        t.ceil()
    };
    (k as usize).clamp(1, r)
}

/// Runs `cfg.resamples` replicates and estimates the `cfg.level` quantile of
/// the root. Replicate `j` uses stream `j` under `cfg.seed`, so results do not
/// depend on scheduling.
pub fn run_bootstrap(
    fit: &FittedModel,
    x: &DesignMatrix,
    rs: &ResidualSet,
    cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    let n = x.n();
    if rs.len() != n {
        return Err(Error::Dimension("residual set does not match the design".into()));
    }
    let (b, warnings) = cfg.validate(n)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let t0 = Instant::now();
    let op = BootstrapOperator::build(fit, x, b)?;
    let mut result = run_with_operator(&op, rs, cfg)?;
    result.overhead_secs = t0.elapsed().as_secs_f64();
    result.warnings = warnings;
    Ok(result)
}

/// Like [`run_bootstrap`] but reuses a prebuilt operator; `cfg.subsample` is
/// ignored in favour of `op.b()` and `overhead_secs` is the operator's build time.
pub fn run_with_operator(op: &BootstrapOperator, rs: &ResidualSet, cfg: &BootstrapConfig) -> Result<BootstrapResult> {
    let (n, b) = (op.n(), op.b());
    if rs.len() != n {
        return Err(Error::Dimension("residual set does not match the operator".into()));
    }
    if cfg.resamples == 0 {
        return Err(Error::Config("at least one resample is required".into()));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::Config(format!(
            "quantile level must lie in (0, 1), got {}",
            cfg.level
        )));
    }
    let p = op.beta_hat().len();
    let t1 = Instant::now();
    let beta_hat = op.beta_hat().clone();
    let draws: Vec<(f64, Option<CoefficientVector>)> = (0..cfg.resamples)
        .into_par_iter()
        .map_init(
            || DVector::zeros(b),
            |eps, j| {
                let mut rng = RngStream::new(cfg.seed, j as u64).rng();
                draw_into(rs, &mut rng, eps);
                let beta = op.apply(eps);
                let root = cfg.root.eval(&beta, &beta_hat);
                (root, cfg.keep_betas.then_some(beta))
            },
        )
        .collect();
    let loop_time = t1.elapsed();

    let roots: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let betas_star = cfg
        .keep_betas
        .then(|| DMatrix::from_fn(cfg.resamples, p, |i, j| draws[i].1.as_ref().map_or(f64::NAN, |v| v[j])));
    let q_hat = quantile(&roots, cfg.level);
    Ok(BootstrapResult {
        q_hat,
        roots,
        betas_star,
        b,
        n,
        overhead_secs: op.build_time().as_secs_f64(),
        loop_secs: loop_time.as_secs_f64(),
        per_replicate_secs: loop_time.as_secs_f64() / cfg.resamples as f64,
        warnings: Vec::new(),
        config: cfg.clone(),
    })
}

/// Closed-form RB covariance `[(1/n) sum r^2 - ((1/n) sum r)^2] (X'VX)^{-1}`.
pub fn bootstrap_variance(fit: &FittedModel, x: &DesignMatrix, rs: &ResidualSet) -> Result<DMatrix<f64>> {
    if fit.n() != x.n() || rs.len() != x.n() {
        return Err(Error::Dimension("fit, design and residuals disagree on n".into()));
    }
    let n = rs.len() as f64;
    let mean = rs.values.sum() / n;
    let scale = rs.values.norm_squared() / n - mean * mean;
    let inv = fit.gram_inverse();
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(inv * scale)
}

/// Variance of the starred residuals `Y* - X beta*` for the linear model,
/// with `Y* = X beta_hat + J' eps_b`. `O(np)`; a diagnostic, not part of the
/// replicate loop.
pub fn starred_sigma(fit: &FittedModel, x: &DesignMatrix, op: &BootstrapOperator, eps_b: &DVector<f64>) -> Result<f64> {
    if fit.family != Family::Gaussian {
        return Err(Error::Config(
            "starred residual variance is defined for the linear model only".into(),
        ));
    }
    if eps_b.len() != op.b() {
        return Err(Error::Dimension("subsample must have length b".into()));
    }
    let n = x.n();
    let shift = op.apply(eps_b) - op.beta_hat();
    let fitted_shift = x.matrix() * shift;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..n {
        let r = eps_b[i % op.b()] - fitted_shift[i];
        sum += r;
        sum_sq += r * r;
    }
    let nf = n as f64;
    Ok(sum_sq / nf - (sum / nf).powi(2))
}

/// `K^{-1/2} (X'VX)` with `K = X'V^{1/2}J'JV^{1/2}X`, the fold Gram matrix.
///
/// Multiplying `beta* - beta_hat` by this matrix and dividing by the residual
/// scale gives a pivot whose conditional covariance is the identity.
pub fn pivot_matrix(fit: &FittedModel, x: &DesignMatrix, b: usize) -> Result<DMatrix<f64>> {
    let c = fold_matrix(fit, x, b)?;
    let k = &c * c.transpose();
    let eig = k.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Singular);
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let k_inv_sqrt = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    Ok(k_inv_sqrt * fit.gram())
}
