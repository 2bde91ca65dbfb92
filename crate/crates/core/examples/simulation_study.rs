//! Desk-scale comparison of RB and SRB over a grid of subsample exponents.
//!
//! cargo run --release --example simulation_study -- [gaussian|logistic|poisson] [datasets] [iterations]

use srb::simbench::{run_experiment, SimDesign};
use srb::Family;

fn main() -> srb::Result<()> {
    let mut args = std::env::args().skip(1);
    let family: Family = args.next().as_deref().unwrap_or("gaussian").parse()?;
    let mut design = SimDesign::desk(family);
    if let Some(m) = args.next() {
        design.datasets = m.parse().expect("datasets");
    }
    if let Some(b) = args.next() {
        design.iterations = b.parse().expect("iterations");
    }
    let report = run_experiment(&design)?;
    println!(
        "{family}: n = {}, p = {}, oracle q = {:.5} ({} draws, {:.1}s)",
        design.n, design.p, report.oracle_q, report.oracle_n_mc, report.oracle_secs
    );
    println!(
        "{:<6} {:>5} {:>6} {:>10} {:>9} {:>12}",
        "method", "gamma", "b", "avg err %", "sd err %", "loop time s"
    );
    for r in &report.rows {
        println!(
            "{:<6} {:>5} {:>6} {:>10.2} {:>9.2} {:>12.6}",
            r.method.label(),
            r.gamma,
            r.b,
            r.avg_error_pct,
            r.sd_error_pct,
            r.avg_time_sec
        );
    }
    println!("total {:.1}s", report.total_secs);
    Ok(())
}
