//! Centered residuals used for resampling: leverage-corrected residuals for
//! the linear model and standardized Pearson residuals for a GLM.

use srb::{centered_residuals, fit, DesignMatrix, Family, IrlsOptions, ResponseVector};

fn main() -> srb::Result<()> {
    let x = DesignMatrix::from_row_slice(6, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0, 4.0, 1.0, 10.0])?;

    let y = ResponseVector::continuous(vec![0.1, 1.2, 1.9, 3.2, 3.8, 10.5])?;
    let f = fit(&x, &y, Family::Gaussian, IrlsOptions::default())?;
    let rs = centered_residuals(&f, &y)?;
    println!("linear: leverage {:.3?}", f.hat_diag.as_slice());
    println!(
        "        residuals {:.3?}  sigma2_hat {:.4}",
        rs.values.as_slice(),
        rs.sigma2_hat
    );

    let y = ResponseVector::count(vec![1.0, 0.0, 3.0, 2.0, 6.0, 30.0])?;
    let f = fit(&x, &y, Family::Poisson, IrlsOptions::default())?;
    let rs = centered_residuals(&f, &y)?;
    println!("poisson: fitted means {:.3?}", f.mu_hat.as_slice());
    println!(
        "         residuals {:.3?}  sigma2_hat {:.4}",
        rs.values.as_slice(),
        rs.sigma2_hat
    );
    Ok(())
}
