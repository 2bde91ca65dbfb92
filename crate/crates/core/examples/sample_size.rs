//! Chooses the number of datasets times iterations from a small pilot study
//! so that the average error rate has standard error at most 0.01.

use nalgebra::DMatrix;
use srb::simbench::{required_mb, run_experiment, Method, SimDesign};
use srb::Family;

fn main() -> srb::Result<()> {
    let mut pilot = SimDesign::desk(Family::Poisson);
    pilot.n = 2000;
    pilot.p = 10;
    pilot.datasets = 4;
    pilot.iterations = 5;
    pilot.n_mc = 500;
    pilot.gamma_grid = vec![0.7];
    let report = run_experiment(&pilot)?;
    for method in [Method::Rb, Method::Srb] {
        let errors = DMatrix::from_fn(pilot.datasets, pilot.iterations, |m, t| {
            report
                .records
                .iter()
                .find(|r| r.method == method && r.dataset == m && r.iteration == t)
                .map_or(f64::NAN, |r| r.error)
        });
        let mb = required_mb(&errors, 0.01)?;
        println!("{}: datasets x iterations needed for SE 0.01: {mb}", method.label());
    }
    Ok(())
}
