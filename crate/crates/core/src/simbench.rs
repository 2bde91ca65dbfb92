//! Monte Carlo comparison of SRB against RB: dataset generators, oracle
//! quantiles, error rates, the datasets-by-iterations design and the
//! pilot-based sample size rule.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Pareto, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit, IrlsOptions};
use crate::model::{CoefficientVector, DesignMatrix, Family, ResponseVector, RngStream};
use crate::resampler::{quantile, run_with_operator, BootstrapConfig, BootstrapOperator, SubsampleSize};
use crate::residuals::centered_residuals;

// top-level labels of the derived stream paths
const DATASET_STREAM: u64 = 1;
const ORACLE_STREAM: u64 = 2;
const BOOTSTRAP_STREAM: u64 = 3;

/// Oracle quantiles at or below this multiple of `max(1, |beta|)` count as zero.
pub const ORACLE_ZERO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum CovariateLaw {
    /// Pareto type I with scale 1 and shape `alpha`.
    Pareto { alpha: f64 },
    /// Uniform on (-1, 1).
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseLaw {
    /// `Z^2 - 1` with `Z` standard normal.
    ChiSquareCentered,
    /// Responses drawn from the GLM family itself.
    FamilyIntrinsic,
    /// No noise (linear only): `Y = X beta`.
    None,
}

/// One simulation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    /// Defaults to [`default_beta`] when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_true: Option<Vec<f64>>,
    pub covariate_law: CovariateLaw,
    pub noise_law: NoiseLaw,
    pub quantile_level: f64,
    pub gamma_grid: Vec<f64>,
    #[serde(alias = "R")]
    pub resamples: usize,
    /// Number of simulated datasets (`M`).
    #[serde(alias = "M")]
    pub datasets: usize,
    /// Bootstrap runs per dataset and method (`B`).
    #[serde(alias = "B")]
    pub iterations: usize,
    pub master_seed: u64,
    pub n_mc: usize,
    /// Known oracle quantile; skips the Monte Carlo step when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_q: Option<f64>,
}

/// `(1, .., 1, 0, .., 0)` with the first half ones for the linear model,
/// `(0.2, 0.2, 0, .., 0)` for the GLMs.
pub fn default_beta(family: Family, p: usize) -> CoefficientVector {
    match family {
        Family::Gaussian => DVector::from_fn(p, |j, _| if j < p / 2 { 1.0 } else { 0.0 }),
        _ => DVector::from_fn(p, |j, _| if j < 2 { 0.2 } else { 0.0 }),
    }
}

impl SimDesign {
    /// Desk-scale setting: `n = 10^4` (linear) or `5 * 10^3` (GLM), `p = 20`,
    /// 12 datasets, 10 iterations, 100 resamples, 2000 oracle draws.
    pub fn desk(family: Family) -> Self {
        let (n, covariate_law, noise_law, level) = match family {
            Family::Gaussian => (
                10_000,
                CovariateLaw::Pareto { alpha: 3.0 },
                NoiseLaw::ChiSquareCentered,
                0.99,
            ),
            _ => (5_000, CovariateLaw::Uniform, NoiseLaw::FamilyIntrinsic, 0.95),
        };
        Self {
            family,
            n,
            p: 20,
            beta_true: None,
            covariate_law,
            noise_law,
            quantile_level: level,
            gamma_grid: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            resamples: 100,
            datasets: 12,
            iterations: 10,
            master_seed: 2024,
            n_mc: 2000,
            oracle_q: None,
        }
    }

    /// Full-scale setting of the original study: `p = 200`, 48 datasets,
    /// 25 iterations; hours of compute.
    pub fn full_scale(family: Family) -> Self {
        let mut d = Self::desk(family);
        d.n = if family == Family::Gaussian { 100_000 } else { 50_000 };
        d.p = 200;
        d.datasets = 48;
        d.iterations = 25;
        d.n_mc = if family == Family::Gaussian { 5000 } else { 3000 };
        d
    }

    pub fn beta(&self) -> CoefficientVector {
        match &self.beta_true {
            Some(b) => DVector::from_column_slice(b),
            None => default_beta(self.family, self.p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n <= self.p {
            return Err(Error::Config(format!(
                "need n > p >= 1, got n = {}, p = {}",
                self.n, self.p
            )));
        }
        if let Some(b) = &self.beta_true {
            if b.len() != self.p {
                return Err(Error::Config(format!(
                    "beta_true has length {}, expected p = {}",
                    b.len(),
                    self.p
                )));
            }
        }
        if let Some(&g) = self.gamma_grid.iter().find(|&&g| !(g > 0.0 && g <= 1.0)) {
            return Err(Error::Config(format!("gamma values must lie in (0, 1], got {g}")));
        }
        if !(self.quantile_level > 0.0 && self.quantile_level < 1.0) {
            return Err(Error::Config("quantile level must lie in (0, 1)".into()));
        }
        if self.resamples == 0 || self.datasets == 0 || self.iterations == 0 {
            return Err(Error::Config(
                "resamples, datasets and iterations must be positive".into(),
            ));
        }
        if let CovariateLaw::Pareto { alpha } = self.covariate_law {
            if !(alpha > 0.0) {
                return Err(Error::Config("Pareto shape must be positive".into()));
            }
        }
        match (self.family, self.noise_law) {
            (Family::Gaussian, NoiseLaw::FamilyIntrinsic) => {
                Err(Error::Config("the linear model needs an explicit noise law".into()))
            }
            (Family::Logistic | Family::Poisson, NoiseLaw::ChiSquareCentered | NoiseLaw::None) => {
                Err(Error::Config("GLM responses are drawn from the family".into()))
            }
            _ => Ok(()),
        }
    }
}

fn covariates<R: Rng>(design: &SimDesign, rng: &mut R) -> Result<DesignMatrix> {
    let (n, p) = (design.n, design.p);
    let values: Vec<f64> = match design.covariate_law {
        CovariateLaw::Pareto { alpha } => {
            let law = Pareto::new(1.0, alpha).map_err(|e| Error::Config(e.to_string()))?;
            (0..n * p).map(|_| law.sample(rng)).collect()
        }
        CovariateLaw::Uniform => (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    DesignMatrix::from_row_slice(n, p, &values)
}

/// Linear dataset: covariates from the design's law, `Y = X beta + eps` with
/// `eps = Z^2 - 1` (or zero).
pub fn gen_linear_dataset(design: &SimDesign, seed: u64) -> Result<(DesignMatrix, ResponseVector, CoefficientVector)> {
    if design.family != Family::Gaussian {
        return Err(Error::Config("gen_linear_dataset needs the gaussian family".into()));
    }
    let mut rng = RngStream::new(seed, 0).rng();
    let x = covariates(design, &mut rng)?;
    let beta = design.beta();
    let mut y = x.matrix() * &beta;
    if design.noise_law == NoiseLaw::ChiSquareCentered {
        for v in y.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += z * z - 1.0;
        }
    }
    Ok((x, ResponseVector::continuous(y.as_slice())?, beta))
}

/// Logistic or Poisson dataset with linear predictor `X beta`.
pub fn gen_glm_dataset(design: &SimDesign, seed: u64) -> Result<(DesignMatrix, ResponseVector, CoefficientVector)> {
    let mut rng = RngStream::new(seed, 0).rng();
    let x = covariates(design, &mut rng)?;
    let beta = design.beta();
    let eta = x.matrix() * &beta;
    let y: Vec<f64> = match design.family {
        Family::Logistic => eta
            .iter()
            .map(|&e| {
                if rng.random::<f64>() < Family::Logistic.mean(e) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        Family::Poisson => eta
            .iter()
            .map(|&e| {
                let law = Poisson::new(e.exp()).map_err(|err| Error::Config(err.to_string()))?;
                Ok(law.sample(&mut rng))
            })
            .collect::<Result<_>>()?,
        Family::Gaussian => return Err(Error::Config("gen_glm_dataset needs logistic or poisson".into())),
    };
    let y = ResponseVector::new(DVector::from_vec(y), design.family.response_kind())?;
    Ok((x, y, beta))
}

/// Dispatches to the generator for the design's family.
pub fn gen_dataset(design: &SimDesign, seed: u64) -> Result<(DesignMatrix, ResponseVector, CoefficientVector)> {
    match design.family {
        Family::Gaussian => gen_linear_dataset(design, seed),
        _ => gen_glm_dataset(design, seed),
    }
}

fn oracle_seed(master: u64, i: usize) -> u64 {
    RngStream::derive(master, &[ORACLE_STREAM, i as u64]).rng().random()
}

/// Seed of dataset `m` in an experiment.
pub fn dataset_seed(master: u64, m: usize) -> u64 {
    RngStream::derive(master, &[DATASET_STREAM, m as u64]).rng().random()
}

/// `||beta_hat - beta_true||_2` over `n_mc` independent datasets, unsorted.
pub fn oracle_roots(design: &SimDesign, n_mc: usize, seed: u64) -> Result<Vec<f64>> {
    design.validate()?;
    if n_mc < 100 {
        return Err(Error::Config(format!(
            "the oracle needs at least 100 draws, got {n_mc}"
        )));
    }
    (0..n_mc)
        .into_par_iter()
        .map(|i| {
            let s = oracle_seed(seed, i);
            let wrap = |e: Error| Error::DatasetFit {
                seed: s,
                source: Box::new(e),
            };
            let (x, y, beta) = gen_dataset(design, s).map_err(wrap)?;
            let f = fit(&x, &y, design.family, IrlsOptions::default()).map_err(wrap)?;
            Ok((f.beta_hat - beta).norm())
        })
        .collect()
}

/// Monte Carlo approximation of the `design.quantile_level` quantile of the
/// estimator's l2 error.
pub fn oracle_quantile(design: &SimDesign, n_mc: usize, seed: u64) -> Result<f64> {
    Ok(quantile(&oracle_roots(design, n_mc, seed)?, design.quantile_level))
}

/// `|q_hat / q - 1|`.
pub fn error_rate(q_hat: f64, q: f64) -> Result<f64> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::ZeroOracle);
    }
    Ok((q_hat / q - 1.0).abs())
}

/// Smallest `M * B` for which the standard error of the average error rate is
/// at most `d`, with the variance of the error rate estimated from a pilot
/// (rows are datasets, columns iterations) as the mean within-dataset
/// variance plus the variance of the dataset means.
pub fn required_mb(pilot: &DMatrix<f64>, d: f64) -> Result<usize> {
    let (m, b) = pilot.shape();
    if m < 2 || b < 2 {
        return Err(Error::Config(
            "the pilot needs at least two datasets and two iterations".into(),
        ));
    }
    if !(d > 0.0) {
        return Err(Error::Config("target standard error must be positive".into()));
    }
    let means: Vec<f64> = pilot.row_iter().map(|r| r.mean()).collect();
    let within = pilot
        .row_iter()
        .zip(&means)
        .map(|(r, &mu)| r.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (b - 1) as f64)
        .sum::<f64>()
        / m as f64;
    let grand = means.iter().sum::<f64>() / m as f64;
    let between = means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>() / m as f64;
    let var = within + between;
    if var == 0.0 {
        return Ok(1);
    }
    let t = var / (d * d);
    // absorb representation error in e.g. 0.04 / 0.01^2
    let k = if (t - t.round()).abs() <= 1e-9 * t.max(1.0) {
        t.round()
    } else {
        t.ceil()
    };
    Ok((k as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "RB")]
    Rb,
    #[serde(rename = "SRB")]
    Srb,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Rb => "RB",
            Method::Srb => "SRB",
        }
    }
}

/// One bootstrap run inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub method: Method,
    /// 1 for RB.
    pub gamma: f64,
    pub dataset: usize,
    pub iteration: usize,
    pub b: usize,
    pub q_hat: f64,
    pub error: f64,
    /// Replicate loop wall time.
    pub time_sec: f64,
}

/// Aggregate over the `M * B` runs of one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub gamma: f64,
    pub b: usize,
    pub avg_error_pct: f64,
    pub sd_error_pct: f64,
    pub avg_time_sec: f64,
    /// Operator build time per dataset, reported apart from the loop.
    pub avg_overhead_sec: f64,
    pub ci95_error_pct: (f64, f64),
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub version: String,
    pub threads: usize,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: rayon::current_num_threads(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub design: SimDesign,
    pub oracle_q: f64,
    /// 0 when the oracle was supplied.
    pub oracle_n_mc: usize,
    pub rows: Vec<MethodSummary>,
    #[serde(skip)]
    pub records: Vec<IterationRecord>,
    pub oracle_secs: f64,
    pub total_secs: f64,
    pub environment: Environment,
}

fn methods(design: &SimDesign) -> Vec<(Method, f64)> {
    std::iter::once((Method::Rb, 1.0))
        .chain(design.gamma_grid.iter().map(|&g| (Method::Srb, g)))
        .collect()
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the experiment, computing the oracle first if the design has none.
pub fn run_experiment(design: &SimDesign) -> Result<ExperimentReport> {
    run_experiment_with(design, |_| Ok(()))
}

/// [`run_experiment`] that hands every finished run to `sink` as it completes,
/// so partial results survive a later failure.
pub fn run_experiment_with<F>(design: &SimDesign, mut sink: F) -> Result<ExperimentReport>
where
    F: FnMut(&IterationRecord) -> Result<()>,
{
    design.validate()?;
    let start = Instant::now();
    let (q, n_mc) = match design.oracle_q {
        Some(q) => (q, 0),
        None => (oracle_quantile(design, design.n_mc, design.master_seed)?, design.n_mc),
    };
    let oracle_secs = start.elapsed().as_secs_f64();
    // a noiseless design leaves only round-off in the oracle
    if q <= ORACLE_ZERO * design.beta().norm().max(1.0) || !q.is_finite() {
        return Err(Error::ZeroOracle);
    }
    log::info!("oracle quantile {q:.6} from {n_mc} draws in {oracle_secs:.1}s");

    let methods = methods(design);
    let mut records = Vec::with_capacity(methods.len() * design.datasets * design.iterations);
    let mut overhead = vec![0.0; methods.len()];
    let mut sizes = vec![0; methods.len()];
    for m in 0..design.datasets {
        let seed = dataset_seed(design.master_seed, m);
        let wrap = |e: Error| Error::DatasetFit {
            seed,
            source: Box::new(e),
        };
        let (x, y, _) = gen_dataset(design, seed).map_err(wrap)?;
        let f = fit(&x, &y, design.family, IrlsOptions::default()).map_err(wrap)?;
        let rs = centered_residuals(&f, &y).map_err(wrap)?;
        for (k, &(method, gamma)) in methods.iter().enumerate() {
            let size = match method {
                Method::Rb => SubsampleSize::Full,
                Method::Srb => SubsampleSize::Exponent(gamma),
            };
            let b = size.resolve(design.n)?;
            let op = BootstrapOperator::build(&f, &x, b)?;
            overhead[k] += op.build_time().as_secs_f64();
            sizes[k] = b;
            for t in 0..design.iterations {
                let stream = RngStream::derive(design.master_seed, &[BOOTSTRAP_STREAM, m as u64, t as u64, k as u64]);
                let cfg = BootstrapConfig::new(size, design.resamples, design.quantile_level, stream.rng().random());
                let res = run_with_operator(&op, &rs, &cfg)?;
                let rec = IterationRecord {
                    method,
                    gamma,
                    dataset: m,
                    iteration: t,
                    b,
                    q_hat: res.q_hat,
                    error: error_rate(res.q_hat, q)?,
                    time_sec: res.loop_secs,
                };
                sink(&rec)?;
                records.push(rec);
            }
        }
        log::debug!("dataset {m} done");
    }

    let rows = methods
        .iter()
        .enumerate()
        .map(|(k, &(method, gamma))| {
            let cell: Vec<&IterationRecord> = records
                .iter()
                .filter(|r| r.method == method && r.gamma == gamma)
                .collect();
            let errors: Vec<f64> = cell.iter().map(|r| 100.0 * r.error).collect();
            let (avg, sd) = mean_sd(&errors);
            let half = 1.96 * sd / (errors.len() as f64).sqrt();
            MethodSummary {
                method,
                gamma,
                b: sizes[k],
                avg_error_pct: avg,
                sd_error_pct: sd,
                avg_time_sec: cell.iter().map(|r| r.time_sec).sum::<f64>() / cell.len() as f64,
                avg_overhead_sec: overhead[k] / design.datasets as f64,
                ci95_error_pct: (avg - half, avg + half),
                count: cell.len(),
            }
        })
        .collect();
    Ok(ExperimentReport {
        design: design.clone(),
        oracle_q: q,
        oracle_n_mc: n_mc,
        rows,
        records,
        oracle_secs,
        total_secs: start.elapsed().as_secs_f64(),
        environment: Environment::current(),
    })
}

impl ExperimentReport {
    pub fn row(&self, method: Method, gamma: f64) -> Option<&MethodSummary> {
        self.rows
            .iter()
            .find(|r| r.method == method && (method == Method::Rb || r.gamma == gamma))
    }

    /// One row per method.
    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "method",
            "gamma",
            "b",
            "avg_error_pct",
            "sd_error_pct",
            "avg_time_sec",
            "avg_overhead_sec",
            "ci95_low_pct",
            "ci95_high_pct",
            "count",
        ])?;
        for r in &self.rows {
            out.write_record([
                r.method.label().to_string(),
                r.gamma.to_string(),
                r.b.to_string(),
                r.avg_error_pct.to_string(),
                r.sd_error_pct.to_string(),
                r.avg_time_sec.to_string(),
                r.avg_overhead_sec.to_string(),
                r.ci95_error_pct.0.to_string(),
                r.ci95_error_pct.1.to_string(),
                r.count.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Every run, one per line, for error-versus-time plots.
    pub fn write_long_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = LongCsvWriter::new(w)?;
        for r in &self.records {
            out.write(r)?;
        }
        out.flush()
    }
}

/// Incremental writer for the per-run CSV.
pub struct LongCsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> LongCsvWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record([
            "method",
            "gamma",
            "dataset",
            "iteration",
            "b",
            "q_hat",
            "error",
            "time_sec",
        ])?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &IterationRecord) -> Result<()> {
        self.inner.write_record([
            r.method.label().to_string(),
            r.gamma.to_string(),
            r.dataset.to_string(),
            r.iteration.to_string(),
            r.b.to_string(),
            r.q_hat.to_string(),
            r.error.to_string(),
            r.time_sec.to_string(),
        ])?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Per-replicate cost of SRB against RB on one synthetic linear dataset.
#[derive(Debug, Clone, Serialize)]
pub struct SpeedReport {
    pub n: usize,
    pub p: usize,
    pub gamma: f64,
    pub b: usize,
    pub resamples: usize,
    pub seed: u64,
    pub rb_per_replicate_secs: f64,
    pub srb_per_replicate_secs: f64,
    pub rb_loop_secs: f64,
    pub srb_loop_secs: f64,
    pub rb_overhead_secs: f64,
    pub srb_overhead_secs: f64,
    /// `srb_per_replicate_secs / rb_per_replicate_secs`.
    pub time_ratio: f64,
    pub environment: Environment,
}

/// Times `resamples` RB and SRB (`b = ceil(n^gamma)`) replicates on a linear
/// dataset with uniform covariates and centered chi-square noise.
pub fn speed_benchmark(n: usize, p: usize, gamma: f64, resamples: usize, seed: u64) -> Result<SpeedReport> {
    let mut design = SimDesign::desk(Family::Gaussian);
    design.n = n;
    design.p = p;
    design.covariate_law = CovariateLaw::Uniform;
    design.master_seed = seed;
    design.resamples = resamples;
    design.gamma_grid = vec![gamma];
    design.validate()?;
    let (x, y, _) = gen_linear_dataset(&design, dataset_seed(seed, 0))?;
    let f = fit(&x, &y, Family::Gaussian, IrlsOptions::default())?;
    let rs = centered_residuals(&f, &y)?;
    let b = SubsampleSize::Exponent(gamma).resolve(n)?;
    let rb_op = BootstrapOperator::build(&f, &x, n)?;
    let srb_op = BootstrapOperator::build(&f, &x, b)?;
    let cfg = BootstrapConfig::new(SubsampleSize::Full, resamples, 0.95, seed);
    let rb = run_with_operator(&rb_op, &rs, &cfg)?;
    let srb = run_with_operator(&srb_op, &rs, &cfg)?;
    Ok(SpeedReport {
        n,
        p,
        gamma,
        b,
        resamples,
        seed,
        rb_per_replicate_secs: rb.per_replicate_secs,
        srb_per_replicate_secs: srb.per_replicate_secs,
        rb_loop_secs: rb.loop_secs,
        srb_loop_secs: srb.loop_secs,
        rb_overhead_secs: rb.overhead_secs,
        srb_overhead_secs: srb.overhead_secs,
        time_ratio: srb.per_replicate_secs / rb.per_replicate_secs,
        environment: Environment::current(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(family: Family) -> SimDesign {
        let mut d = SimDesign::desk(family);
        d.n = 400;
        d.p = 4;
        d.datasets = 2;
        d.iterations = 2;
        d.resamples = 50;
        d.n_mc = 100;
        d.gamma_grid = vec![0.6, 0.9];
        d
    }

    #[test]
    fn default_betas() {
        assert_eq!(default_beta(Family::Gaussian, 4).as_slice(), &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(default_beta(Family::Poisson, 4).as_slice(), &[0.2, 0.2, 0.0, 0.0]);
    }

    #[test]
    fn linear_noise_moments() {
        let mut d = small(Family::Gaussian);
        d.n = 20_000;
        d.p = 1;
        d.beta_true = Some(vec![0.0]);
        let (x, y, _) = gen_linear_dataset(&d, 3).unwrap();
        let n = d.n as f64;
        assert!(y.values().mean().abs() < 4.0 * (2.0 / n).sqrt());
        assert!(x.matrix().min() >= 1.0);
        assert_eq!(gen_linear_dataset(&d, 3).unwrap().1, y);
    }

    #[test]
    fn glm_null_means() {
        let mut d = small(Family::Logistic);
        d.n = 20_000;
        d.p = 2;
        d.beta_true = Some(vec![0.0, 0.0]);
        let (x, y, _) = gen_glm_dataset(&d, 4).unwrap();
        assert!(x.matrix().amax() < 1.0);
        assert!((y.values().mean() - 0.5).abs() < 4.0 / (4.0 * d.n as f64).sqrt());
        d.family = Family::Poisson;
        let (_, y, _) = gen_glm_dataset(&d, 4).unwrap();
        assert!((y.values().mean() - 1.0).abs() < 4.0 / (d.n as f64).sqrt());
    }

    #[test]
    fn error_rate_examples() {
        assert_eq!(error_rate(2.0, 2.0).unwrap(), 0.0);
        assert!((error_rate(1.098, 1.0).unwrap() - 0.098).abs() < 1e-12);
        assert_eq!(error_rate(0.5, 2.0).unwrap(), 0.75);
        assert!(matches!(error_rate(1.0, 0.0), Err(Error::ZeroOracle)));
    }

    #[test]
    fn required_mb_examples() {
        assert_eq!(required_mb(&DMatrix::from_element(3, 4, 0.1), 0.01).unwrap(), 1);
        // within-dataset variance 2 * 0.1^2 = 0.02, between h^2 = 0.02
        let s = 0.1;
        let h = 0.02f64.sqrt();
        let pilot = DMatrix::from_row_slice(2, 2, &[0.5 - h - s, 0.5 - h + s, 0.5 + h - s, 0.5 + h + s]);
        assert_eq!(required_mb(&pilot, 0.01).unwrap(), 400);
        assert!(required_mb(&DMatrix::zeros(1, 4), 0.01).is_err());
    }

    #[test]
    fn zero_noise_oracle_is_zero() {
        let mut d = small(Family::Gaussian);
        d.noise_law = NoiseLaw::None;
        assert!(oracle_quantile(&d, 100, 1).unwrap() < 1e-10);
        d.datasets = 1;
        d.iterations = 1;
        d.oracle_q = Some(0.0);
        assert!(matches!(run_experiment(&d), Err(Error::ZeroOracle)));
    }

    #[test]
    fn oracle_monotone_in_level() {
        let d = small(Family::Poisson);
        let roots = oracle_roots(&d, 200, 5).unwrap();
        assert!(quantile(&roots, 0.95) <= quantile(&roots, 0.99));
        assert!(oracle_roots(&d, 50, 5).is_err());
    }

    #[test]
    fn smoke_experiment_is_deterministic() {
        let d = small(Family::Logistic);
        let a = run_experiment(&d).unwrap();
        let b = run_experiment(&d).unwrap();
        assert_eq!(a.rows.len(), 3);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.count, 4);
            assert_eq!(ra.avg_error_pct, rb.avg_error_pct);
            assert!(ra.avg_error_pct >= 0.0);
        }
        let mut buf = Vec::new();
        a.write_summary_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,gamma,b,avg_error_pct,sd_error_pct,avg_time_sec"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn speed_benchmark_small() {
        let r = speed_benchmark(2000, 5, 0.6, 20, 1).unwrap();
        assert_eq!(r.b, 96);
        assert!(r.rb_loop_secs > 0.0 && r.srb_loop_secs > 0.0);
    }

    #[test]
    fn design_validation_and_json() {
        let mut d = small(Family::Gaussian);
        d.beta_true = Some(vec![1.0]);
        assert!(d.validate().is_err());
        let mut d = small(Family::Poisson);
        d.gamma_grid = vec![1.5];
        assert!(d.validate().is_err());
        let json = r#"{"family":"poisson","n":300,"p":3,"covariate_law":{"law":"uniform"},
            "noise_law":"family-intrinsic","quantile_level":0.95,"gamma_grid":[0.7],
            "R":20,"M":1,"B":1,"master_seed":1,"n_mc":100}"#;
        let d: SimDesign = serde_json::from_str(json).unwrap();
        assert_eq!((d.resamples, d.datasets, d.iterations), (20, 1, 1));
        d.validate().unwrap();
    }
}
