//! Bootstrap-ready residuals.
//!
//! Linear model: raw residuals are inflated by `1 / sqrt(1 - h_i)` so their
//! variance matches the error variance, then centered. GLMs: raw residuals
//! are standardized by `sqrt(v_i (1 - h_i))` (Pearson), then centered.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FittedModel;
use crate::model::{Family, ResponseVector};

/// Observations with leverage at or above this bound are rejected.
pub const LEVERAGE_LIMIT: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualKind {
    LinearModified,
    GlmPearson,
}

/// Centered, rescaled residuals and their second moment `sigma2_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub values: DVector<f64>,
    pub sigma2_hat: f64,
    pub kind: ResidualKind,
}

impl ResidualSet {
    fn centered(mut values: DVector<f64>, kind: ResidualKind) -> Self {
        let mean = values.mean();
        values.add_scalar_mut(-mean);
        let sigma2_hat = values.norm_squared() / values.len() as f64;
        Self {
            values,
            sigma2_hat,
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_leverage(h: &DVector<f64>) -> Result<()> {
    match h.iter().enumerate().find(|(_, &v)| !(v < LEVERAGE_LIMIT)) {
        Some((index, &leverage)) => Err(Error::Leverage { index, leverage }),
        None => Ok(()),
    }
}

/// `e_i / sqrt(1 - h_i)` with `e = Y - X beta_hat`, then mean-centered.
pub fn centered_modified_residuals(fit: &FittedModel, y: &ResponseVector) -> Result<ResidualSet> {
    if fit.family != Family::Gaussian {
        return Err(Error::Config("modified residuals require a gaussian fit".into()));
    }
    if y.len() != fit.n() {
        return Err(Error::Dimension("response length does not match the fit".into()));
    }
    check_leverage(&fit.hat_diag)?;
    let yv = y.values();
    let raw = DVector::from_fn(yv.len(), |i, _| {
        (yv[i] - fit.mu_hat[i]) / (1.0 - fit.hat_diag[i]).sqrt()
    });
    Ok(ResidualSet::centered(raw, ResidualKind::LinearModified))
}

/// `(Y_i - mu_i) / sqrt(v_i (1 - h_i))`, then mean-centered.
pub fn centered_pearson_residuals(fit: &FittedModel, y: &ResponseVector) -> Result<ResidualSet> {
    if fit.family == Family::Gaussian {
        return Err(Error::Config(
            "Pearson residuals require a logistic or poisson fit".into(),
        ));
    }
    if y.len() != fit.n() {
        return Err(Error::Dimension("response length does not match the fit".into()));
    }
    if let Some((index, &value)) = fit.v_hat.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::DegenerateVariance { index, value });
    }
    check_leverage(&fit.hat_diag)?;
    let yv = y.values();
    let raw = DVector::from_fn(yv.len(), |i, _| {
        (yv[i] - fit.mu_hat[i]) / (fit.v_hat[i] * (1.0 - fit.hat_diag[i])).sqrt()
    });
    Ok(ResidualSet::centered(raw, ResidualKind::GlmPearson))
}

/// Modified residuals for the linear model, Pearson residuals otherwise.
pub fn centered_residuals(fit: &FittedModel, y: &ResponseVector) -> Result<ResidualSet> {
    match fit.family {
        Family::Gaussian => centered_modified_residuals(fit, y),
        _ => centered_pearson_residuals(fit, y),
    }
}

/// `(1/n) sum r_i^2`.
pub fn residual_scale(rs: &ResidualSet) -> f64 {
    rs.sigma2_hat
}
