//! Applies the transfer operator to the constant density for a measure
//! preserving map and for one that is not.

use lebesgue_circle::transfer::{self, DensityGrid};
use lebesgue_circle::{Branch, FullBranchMap, Interval, Result};

fn main() -> Result<()> {
    let uniform = FullBranchMap::affine_uniform(3)?;
    println!("uniform degree 3: defect {:.3e}", transfer::invariance_defect(&uniform, 4096)?);

    // slopes 2 and 2.5: 1/2 + 1/2.5 = 0.9, so P1 is 0.9 everywhere
    let leaky = FullBranchMap::new(vec![
        Branch::affine(Interval::new(0.0, 0.5)?, 2.0, 0.0),
        Branch::affine(Interval::new(0.5, 0.9)?, 2.5, -1.25),
    ])?;
    let p1 = transfer::transfer_of_constant(&leaky, 9)?;
    println!("unequal slopes: P1 = {:?}", p1.values());
    println!("unequal slopes: defect {:.3}", transfer::invariance_defect(&leaky, 4096)?);

    let h = DensityGrid::from_fn(513, |x| 1.0 + (2.0 * std::f64::consts::PI * x).cos())?;
    let ph = transfer::transfer_apply(&uniform, &h)?;
    println!("mass before {:.12}  after {:.12}", h.trapezoid(), ph.trapezoid());

    let cells: Vec<Interval> = (0..8).map(|j| Interval::new(j as f64 / 8.0, (j + 1) as f64 / 8.0)).collect::<Result<_>>()?;
    println!("pullback defect on eighths {:.3e}", transfer::pullback_measure_defect(&uniform, &cells)?);
    Ok(())
}
