//! Dini tails of the three moduli of continuity: finite for Holder,
//! divergent for the logarithmic ones as the cutoff shrinks.

use lebesgue_circle::{Modulus, Result};

fn main() -> Result<()> {
    let moduli = [Modulus::holder(0.5)?, Modulus::log_reciprocal(2.0)?, Modulus::log_squared(2.0)?];
    for w in &moduli {
        println!("{:?}", w.kind());
        for t in [1e-1, 1e-4, 1e-8] {
            println!("  omega({t:e}) = {:.6}", w.eval(t));
        }
        for delta in [1e-2, 1e-4, 1e-8, 1e-16] {
            println!("  tail from {delta:e}: {:.6}", w.dini_tail(delta)?);
        }
    }
    Ok(())
}
