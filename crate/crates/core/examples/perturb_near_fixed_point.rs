//! Perturbs the doubling map near its fixed point and shows the perturbed
//! map stays Lebesgue preserving and C¹-close for shrinking epsilon.

use lebesgue_circle::perturbation::{perturb_map, PerturbationConfig};
use lebesgue_circle::{transfer, FullBranchMap, Modulus, Result};

fn main() -> Result<()> {
    let doubling = FullBranchMap::doubling();
    let modulus = Modulus::log_reciprocal(2.0)?;
    for eps in [0.1, 0.05, 0.01, 0.001] {
        let cfg = PerturbationConfig::for_domain(doubling.branch(1).domain(), eps, modulus);
        let p = perturb_map(&doubling, &cfg, 1e-3)?;
        let defect = transfer::invariance_defect(&p.map, 4096)?;
        println!(
            "eps {eps:<6} kappa {:.6}  C1 distance {:.6}  defect {defect:.2e}  f'(0) {:.6}",
            p.kappa,
            p.c1_distance,
            p.map.deriv(0.0)?
        );
    }
    Ok(())
}
