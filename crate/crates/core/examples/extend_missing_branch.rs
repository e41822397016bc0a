//! Completes a degree-3 map whose middle branch is unknown, then checks
//! that the result preserves Lebesgue measure and reports the C¹ matching.
//!
//! ```bash
//! cargo run --example extend_missing_branch
//! ```

use lebesgue_circle::extension::{self, condition_one_margin, DEFAULT_CONDITION_GRID, TAU_MATCH};
use lebesgue_circle::{transfer, Branch, Interval, PartialMapSpec, Result};

fn main() -> Result<()> {
    let first = Branch::sine_perturbed(Interval::new(0.0, 0.3)?, 1.0 / 0.3, 0.08, 1.0 / 0.6);
    let last = Branch::affine_onto(Interval::new(0.7, 1.0)?);
    let spec = PartialMapSpec::new(vec![0.0, 0.3, 0.7, 1.0], 2, vec![first, last])?;

    let margin = condition_one_margin(&spec, DEFAULT_CONDITION_GRID)?;
    println!("condition margin   {margin:.10}");

    let map = extension::assemble_circle_map(&spec, 1e-3)?;
    let middle = map.branch(2);
    for x in [0.3, 0.4, 0.5, 0.6, 0.7] {
        let (y, dy) = middle.eval_with_deriv(x)?;
        println!("f2({x:.1}) = {y:.10}   f2' = {dy:.10}");
    }

    println!("invariance defect  {:.3e}", transfer::invariance_defect(&map, 4096)?);

    let report = extension::c1_matching_report(&map, Some(2), TAU_MATCH)?;
    for b in &report.boundaries {
        println!("at {:.1}: left {:.8} right {:.8} gap {:.2e}", b.point, b.left_derivative, b.right_derivative, b.gap);
    }
    println!("circle C1: {}", report.flag().as_str());
    Ok(())
}
