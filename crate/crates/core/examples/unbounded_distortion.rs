//! Runs the distortion experiment for a non-Dini perturbation and compares
//! the measured log-derivative gap with the predicted lower bound.

use lebesgue_circle::perturbation::{unbounded_demo, PerturbationConfig};
use lebesgue_circle::{FullBranchMap, Modulus, Result};

fn main() -> Result<()> {
    let doubling = FullBranchMap::doubling();
    let cfg = PerturbationConfig::for_domain(doubling.branch(1).domain(), 0.05, Modulus::log_reciprocal(2.0)?);
    let demo = unbounded_demo(&doubling, &cfg, 30)?;
    println!("{:>3} {:>12} {:>12} {:>12}", "k", "measured", "leftmost d_k", "predicted");
    for r in &demo.rows {
        println!(
            "{:>3} {:>12.6} {:>12.6} {:>12.6}",
            r.k, r.measured_pair_bound, r.leftmost_cylinder_dk, r.predicted_lower_bound
        );
    }
    println!("classification: {}", demo.report.classification.as_str());
    Ok(())
}
