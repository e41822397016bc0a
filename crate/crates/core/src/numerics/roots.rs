use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// A root from [`solve_increasing_from`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `f'` at the last Newton iterate, which agrees with `x` to round-off.
    /// `None` when the target was clamped to an endpoint.
    pub deriv: Option<f64>,
}

/// Solves `f(x) = target` for a strictly increasing `f` on `[a, b]`.
///
/// `f` returns the pair `(f(x), f'(x))`. Newton steps are taken while they stay
/// inside the current bracket; otherwise the bracket is bisected. Targets below
/// `f(a)` or above `f(b)` clamp to the corresponding endpoint.
///
/// Termination is on a relative step size, so roots close to zero are resolved
/// to full relative precision.
pub fn solve_increasing<F>(mut f: F, a: f64, b: f64, target: f64, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let fa = f(a).0;
    let fb = f(b).0;
    Ok(solve_increasing_from(f, (a, fa), (b, fb), target, what)?.x)
}

/// [`solve_increasing`] with the endpoint values supplied by the caller.
pub fn solve_increasing_from<F>(
    mut f: F,
    (a, fa): (f64, f64),
    (b, fb): (f64, f64),
    target: f64,
    what: &'static str,
) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    if target <= fa {
        return Ok(Root { x: a, deriv: None });
    }
    if target >= fb {
        return Ok(Root { x: b, deriv: None });
    }
    let (mut lo, mut hi) = (a, b);
    let mut x = a + (target - fa) / (fb - fa) * (b - a);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f(x);
        let r = fx - target;
        if r == 0.0 {
            return Ok(Root { x, deriv: Some(dfx) });
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = r / dfx;
        let scale = x.abs().max(f64::MIN_POSITIVE);
        // A step at round-off level means x is already the root; checked before
        // the bracket test so residual noise cannot trigger a bisection.
        if step.abs() <= 4.0 * f64::EPSILON * scale {
            return Ok(Root { x: (x - step).clamp(lo, hi), deriv: Some(dfx) });
        }
        let mut next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) || next == lo || next == hi {
            return Ok(Root { x: next, deriv: Some(dfx) });
        }
        x = next;
    }
    Err(Error::Numeric { what, iterations: MAX_ITER })
}
