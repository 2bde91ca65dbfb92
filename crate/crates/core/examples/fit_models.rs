//! Fits the linear, logistic and Poisson models to simulated data and prints
//! the estimates next to the truth.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use srb::{fit, DesignMatrix, Family, IrlsOptions, ResponseVector, RngStream};

fn main() -> srb::Result<()> {
    let n = 2000;
    let mut rng = RngStream::new(1, 0).rng();
    let features = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
    let x = DesignMatrix::with_intercept(&features)?;
    let truth = DVector::from_column_slice(&[0.5, 1.0, -0.7]);
    let eta = x.matrix() * &truth;

    for family in Family::ALL {
        let y: Vec<f64> = eta
            .iter()
            .map(|&e| match family {
                Family::Gaussian => e + rng.random_range(-1.0..1.0),
                Family::Logistic => f64::from(u8::from(rng.random::<f64>() < family.mean(e))),
                Family::Poisson => Poisson::new(e.exp()).unwrap().sample(&mut rng),
            })
            .collect();
        let y = ResponseVector::new(DVector::from_vec(y), family.response_kind())?;
        let f = fit(&x, &y, family, IrlsOptions::default())?;
        println!(
            "{:<9} beta_hat = {:.3?}  truth = {:.3?}  iterations = {}  max leverage = {:.4}",
            family.name(),
            f.beta_hat.as_slice(),
            truth.as_slice(),
            f.iterations,
            f.hat_diag.max()
        );
    }
    Ok(())
}
