//! Two-class subset of synthetic cover-type data, VIF pruning, a logistic fit
//! and repeated RB / SRB estimates of the 95% quantile of the l2 root.
//!
//! cargo run --release --example covertype_pipeline -- [rows] [replications]

use srb::pipeline::{preprocess, synthetic_covertype};
use srb::resampler::quantile;
use srb::{centered_residuals, fit, run_bootstrap, BootstrapConfig, Family, IrlsOptions, ResponseKind, SubsampleSize};

fn main() -> srb::Result<()> {
    let mut args = std::env::args().skip(1);
    let rows: usize = args.next().map_or(1000, |s| s.parse().expect("rows"));
    let reps: usize = args.next().map_or(50, |s| s.parse().expect("replications"));

    let raw = synthetic_covertype(rows, 7);
    let pre = preprocess(&raw, Some((1.0, 2.0)), 2.0)?;
    println!(
        "{} rows -> {} rows, {} features",
        raw.nrows(),
        pre.dataset.nrows(),
        pre.dataset.feature_names().len()
    );
    for e in &pre.log.entries {
        match e.vif_at_removal {
            Some(v) => println!("  removed {:<36} vif {v:.3}", e.column),
            None => println!("  removed {:<36} constant", e.column),
        }
    }

    let x = pre.dataset.design(true)?;
    let y = pre.dataset.response_vector(ResponseKind::Binary)?;
    let f = fit(&x, &y, Family::Logistic, IrlsOptions::default())?;
    let rs = centered_residuals(&f, &y)?;
    println!(
        "logistic fit: {} iterations, n = {}, p = {}",
        f.iterations,
        x.n(),
        x.p()
    );

    let mut rb_mean = 0.0;
    for (label, size) in [
        ("RB", SubsampleSize::Full),
        ("SRB 0.6", SubsampleSize::Exponent(0.6)),
        ("SRB 0.8", SubsampleSize::Exponent(0.8)),
    ] {
        let mut q = Vec::with_capacity(reps);
        let mut secs = 0.0;
        for r in 0..reps {
            let cfg = BootstrapConfig::new(size, 100, 0.95, 1000 + r as u64);
            let res = run_bootstrap(&f, &x, &rs, &cfg)?;
            secs += res.loop_secs;
            q.push(res.q_hat);
        }
        let mean = q.iter().sum::<f64>() / reps as f64;
        if label == "RB" {
            rb_mean = mean;
        }
        println!(
            "{label:<8} b = {:>4}  mean q95 = {mean:.4}  interval [{:.4}, {:.4}]  loop {:.4}s  RB mean inside: {}",
            size.resolve(x.n())?,
            quantile(&q, 0.025),
            quantile(&q, 0.975),
            secs / reps as f64,
            quantile(&q, 0.025) <= rb_mean && rb_mean <= quantile(&q, 0.975)
        );
    }
    Ok(())
}
