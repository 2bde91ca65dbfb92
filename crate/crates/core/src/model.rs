//! Shared numerical data model: design matrices, responses, GLM families and
//! seeded random streams.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient vector of length `p`.
pub type CoefficientVector = DVector<f64>;

/// Smallest allowed ratio of the smallest to the largest singular value.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Fitted Bernoulli probabilities are clamped to `[BERNOULLI_CLAMP, 1 - BERNOULLI_CLAMP]`.
pub const BERNOULLI_CLAMP: f64 = 1e-10;

/// Dense `n x p` design with full column rank and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    data: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let (n, p) = data.shape();
        if p == 0 || n <= p {
            return Err(Error::Dimension(format!(
                "design must satisfy n > p >= 1, got n = {n}, p = {p}"
            )));
        }
        for col in 0..p {
            for row in 0..n {
                if !data[(row, col)].is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        let sv = data.singular_values();
        let max = sv.max();
        let min = sv.min();
        let ratio = if max > 0.0 { min / max } else { 0.0 };
        if !(ratio >= RANK_TOLERANCE) {
            return Err(Error::RankDeficient { ratio });
        }
        Ok(Self { data })
    }

    /// Builds a design from row-major values.
    pub fn from_row_slice(n: usize, p: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * p {
            return Err(Error::Dimension(format!(
                "expected {} values for a {n} x {p} design, got {}",
                n * p,
                values.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, p, values))
    }

    /// Prepends a column of ones to `features`.
    pub fn with_intercept(features: &DMatrix<f64>) -> Result<Self> {
        let n = features.nrows();
        let mut data = DMatrix::from_element(n, features.ncols() + 1, 1.0);
        data.columns_mut(1, features.ncols()).copy_from(features);
        Self::new(data)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Returns a design with the columns reordered by `order`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.p() {
            return Err(Error::Dimension("permutation length must equal p".into()));
        }
        let cols: Vec<_> = order.iter().map(|&j| self.data.column(j)).collect();
        Self::new(DMatrix::from_columns(&cols))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseKind {
    Continuous,
    Binary,
    Count,
}

impl ResponseKind {
    fn name(self) -> &'static str {
        match self {
            ResponseKind::Continuous => "continuous",
            ResponseKind::Binary => "binary",
            ResponseKind::Count => "count",
        }
    }
}

/// Observed responses together with the support they were validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector {
    values: DVector<f64>,
    kind: ResponseKind,
}

impl ResponseVector {
    pub fn new(values: DVector<f64>, kind: ResponseKind) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            let ok = match kind {
                ResponseKind::Continuous => value.is_finite(),
                ResponseKind::Binary => value == 0.0 || value == 1.0,
                ResponseKind::Count => value >= 0.0 && value.fract() == 0.0 && value.is_finite(),
            };
            if !ok {
                return Err(Error::InvalidResponse {
                    index,
                    value,
                    kind: kind.name(),
                });
            }
        }
        Ok(Self { values, kind })
    }

    pub fn continuous(values: impl Into<Vec<f64>>) -> Result<Self> {
        Self::new(DVector::from_vec(values.into()), ResponseKind::Continuous)
    }

    pub fn binary(values: impl Into<Vec<f64>>) -> Result<Self> {
        Self::new(DVector::from_vec(values.into()), ResponseKind::Binary)
    }

    pub fn count(values: impl Into<Vec<f64>>) -> Result<Self> {
        Self::new(DVector::from_vec(values.into()), ResponseKind::Count)
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn kind(&self) -> ResponseKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check_pair(&self, x: &DesignMatrix) -> Result<()> {
        if self.len() != x.n() {
            return Err(Error::Dimension(format!(
                "response length {} does not match design rows {}",
                self.len(),
                x.n()
            )));
        }
        Ok(())
    }
}

/// Exponential-family models with their canonical links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Normal errors, identity link.
    Gaussian,
    /// Bernoulli responses, logit link.
    #[serde(alias = "bernoulli-logit", alias = "bernoulli")]
    Logistic,
    /// Poisson counts, log link.
    #[serde(alias = "poisson-log")]
    Poisson,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::Logistic, Family::Poisson];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Logistic => "logistic",
            Family::Poisson => "poisson",
        }
    }

    pub fn response_kind(self) -> ResponseKind {
        match self {
            Family::Gaussian => ResponseKind::Continuous,
            Family::Logistic => ResponseKind::Binary,
            Family::Poisson => ResponseKind::Count,
        }
    }

    /// Inverse link `b'(eta)`.
    pub fn mean(self, eta: f64) -> f64 {
        match self {
            Family::Gaussian => eta,
            Family::Logistic => {
                let mu = if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                };
                mu.clamp(BERNOULLI_CLAMP, 1.0 - BERNOULLI_CLAMP)
            }
            Family::Poisson => eta.exp(),
        }
    }

    /// Variance function `b''` as a function of the mean. Gaussian weights are
    /// unit; the error variance is carried by the residual scale instead.
    pub fn variance(self, mu: f64) -> f64 {
        match self {
            Family::Gaussian => 1.0,
            Family::Logistic => mu * (1.0 - mu),
            Family::Poisson => mu,
        }
    }

    /// Canonical link `g(mu)`.
    pub fn link(self, mu: f64) -> f64 {
        match self {
            Family::Gaussian => mu,
            Family::Logistic => (mu / (1.0 - mu)).ln(),
            Family::Poisson => mu.ln(),
        }
    }

    /// Log-likelihood contribution of one observation, up to terms free of `eta`.
    pub fn log_likelihood(self, y: f64, eta: f64) -> f64 {
        match self {
            Family::Gaussian => -0.5 * (y - eta) * (y - eta),
            Family::Logistic => {
                // y * eta - log(1 + e^eta), evaluated stably
                let softplus = if eta > 0.0 {
                    eta + (-eta).exp().ln_1p()
                } else {
                    eta.exp().ln_1p()
                };
                y * eta - softplus
            }
            Family::Poisson => y * eta - eta.exp(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "linear" | "normal" => Ok(Family::Gaussian),
            "logistic" | "bernoulli" | "bernoulli-logit" | "binomial" => Ok(Family::Logistic),
            "poisson" | "poisson-log" => Ok(Family::Poisson),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }
}

/// Elementwise `mu = g^{-1}(eta)`.
pub fn family_mean(family: Family, eta: &DVector<f64>) -> DVector<f64> {
    eta.map(|e| family.mean(e))
}

/// Elementwise variance weights. Fails if any weight is not strictly positive.
pub fn family_variance(family: Family, mu: &DVector<f64>) -> Result<DVector<f64>> {
    let v = mu.map(|m| family.variance(m));
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
        return Err(Error::DegenerateVariance { index, value });
    }
    Ok(v)
}

/// A reproducible random stream: one master seed, many independent streams.
///
/// Streams are ChaCha8 keyed by the master seed with the stream id selecting
/// the ChaCha stream, so replicate `j` of a run is reproducible on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// Stream whose id is a hash of a path of indices, e.g. `(dataset, iteration, method)`.
    pub fn derive(master_seed: u64, path: &[u64]) -> Self {
        let mut h = 0x6a09_e667_f3bc_c909_u64;
        for &k in path {
            h = splitmix64(h ^ splitmix64(k.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        Self::new(master_seed, h)
    }

    /// A sibling stream under the same master seed.
    pub fn with_stream(self, stream_id: u64) -> Self {
        Self::new(self.master_seed, stream_id)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
