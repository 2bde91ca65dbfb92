//! One dataset, one quantile: classical residual bootstrap against the
//! subsampled version at several subsample sizes.

use srb::simbench::{gen_glm_dataset, SimDesign};
use srb::{centered_residuals, fit, run_bootstrap, BootstrapConfig, Family, IrlsOptions, SubsampleSize};

fn main() -> srb::Result<()> {
    let mut design = SimDesign::desk(Family::Logistic);
    design.n = 20_000;
    let (x, y, _) = gen_glm_dataset(&design, 42)?;
    let f = fit(&x, &y, Family::Logistic, IrlsOptions::default())?;
    let rs = centered_residuals(&f, &y)?;

    println!(
        "{:<10} {:>6} {:>10} {:>12} {:>12}",
        "method", "b", "q95", "build s", "per rep s"
    );
    for (label, size) in [
        ("RB", SubsampleSize::Full),
        ("SRB 0.6", SubsampleSize::Exponent(0.6)),
        ("SRB 0.7", SubsampleSize::Exponent(0.7)),
        ("SRB 0.8", SubsampleSize::Exponent(0.8)),
        ("SRB b=500", SubsampleSize::Fixed(500)),
    ] {
        let res = run_bootstrap(&f, &x, &rs, &BootstrapConfig::new(size, 500, 0.95, 7))?;
        println!(
            "{label:<10} {:>6} {:>10.5} {:>12.2e} {:>12.2e}",
            res.b, res.q_hat, res.overhead_secs, res.per_replicate_secs
        );
    }
    Ok(())
}
