//! Enumerates cylinders of a smooth expanding map and prints the sampled
//! distortion profile, which levels off.

use lebesgue_circle::distortion::{self, itinerary_string, DistortionOptions};
use lebesgue_circle::{extension, Branch, Interval, PartialMapSpec, Result};

fn main() -> Result<()> {
    let known = Branch::sine_perturbed(Interval::new(0.0, 0.5)?, 2.0, 0.1, 1.0);
    let spec = PartialMapSpec::new(vec![0.0, 0.5, 1.0], 2, vec![known])?;
    let map = extension::assemble_circle_map(&spec, 1e-3)?;

    for c in &distortion::cylinders(&map, 3)?.cylinders {
        println!("{}  [{:.6}, {:.6}]", itinerary_string(&c.itinerary), c.interval.lo(), c.interval.hi());
    }

    let report = distortion::distortion_profile(&map, 12, 32)?;
    for (k, d) in report.d.iter().enumerate() {
        println!("d_{:<2} = {:.6}  worst {}", k + 1, d, itinerary_string(&report.argmax[k]));
    }
    println!("{}", report.classification.as_str());

    // a prefix restricts the search and lets deeper levels stay in budget
    let opts = DistortionOptions::default();
    let deep = distortion::distortion_level_with(&map, 18, &[1; 8], &opts)?;
    println!("d_18 over 11111111*: {:.6}", deep.value);
    Ok(())
}
