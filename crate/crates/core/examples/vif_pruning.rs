//! Iterative VIF pruning on features with two planted collinear pairs.

use nalgebra::DMatrix;
use rand::Rng;
use srb::pipeline::{iterative_vif_prune, vif};
use srb::RngStream;

fn main() -> srb::Result<()> {
    let mut rng = RngStream::new(5, 0).rng();
    let n = 400;
    let mut x = DMatrix::from_fn(n, 6, |_, _| rng.random_range(-1.0..1.0));
    for i in 0..n {
        x[(i, 4)] = x[(i, 0)] + 0.2 * rng.random_range(-1.0..1.0);
        x[(i, 5)] = 0.5 * x[(i, 1)] - x[(i, 2)] + 0.2 * rng.random_range(-1.0..1.0);
    }
    let names: Vec<String> = ["a", "b", "c", "d", "a_like", "bc_mix"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    println!("initial VIF: {:.2?}", vif(&x)?);
    let out = iterative_vif_prune(&x, &names, 2.0)?;
    println!("{}", serde_json::to_string_pretty(&out.log)?);
    let kept: Vec<&str> = out.kept.iter().map(|&j| names[j].as_str()).collect();
    println!("kept {kept:?} with VIF {:.2?}", out.final_vifs);
    Ok(())
}
