//! Per-replicate cost of SRB against RB on a large linear problem.
//!
//! cargo run --release --example speedup -- [n] [p]

use srb::simbench::speed_benchmark;

fn main() -> srb::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(100_000, |s| s.parse().expect("n"));
    let p: usize = args.next().map_or(50, |s| s.parse().expect("p"));
    for gamma in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let r = speed_benchmark(n, p, gamma, 200, 1)?;
        println!(
            "gamma {gamma}: b = {:>6}  SRB {:.2e}s  RB {:.2e}s per replicate  ratio {:.4}  SRB build {:.3}s",
            r.b, r.srb_per_replicate_secs, r.rb_per_replicate_secs, r.time_ratio, r.srb_overhead_secs
        );
    }
    Ok(())
}
