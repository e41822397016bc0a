//! Expanding branches `f: [lo, hi] -> [0, 1]` and their representations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::ExtendedInverse;
use crate::numerics::{solve_increasing_from, MonotoneCubic};
use crate::perturbation::PerturbedDerivative;

/// Minimum number of samples for a tabulated branch.
pub const MIN_TABULATED_SAMPLES: usize = 129;

/// A non-trivial closed interval `[lo, hi]`, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidMap(format!("interval [{lo}, {hi}] is empty or not finite")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain { x, lo: self.lo, hi: self.hi })
        }
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

/// How a branch is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// `slope * x + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// `slope * (x - lo) + amplitude * sin(2 pi frequency (x - lo))`.
    SinePerturbed { slope: f64, amplitude: f64, frequency: f64 },
    /// Monotone cubic Hermite interpolation of `(x, f(x), f'(x))` samples.
    Tabulated(MonotoneCubic),
    /// Missing branch stored through its closed-form inverse.
    Extended(ExtendedInverse),
    /// A base branch whose derivative carries a modulus-shaped bump near `lo`.
    Perturbed(PerturbedDerivative),
}

/// One orientation-preserving expanding branch onto `[0, 1]`.
///
/// Branches are immutable; clones share nothing mutable and may be
/// evaluated from any thread.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    domain: Interval,
    repr: Representation,
}

impl Branch {
    pub fn affine(domain: Interval, slope: f64, intercept: f64) -> Self {
        Self { domain, repr: Representation::Affine { slope, intercept } }
    }

    /// The affine branch mapping `domain` onto `[0, 1]`.
    pub fn affine_onto(domain: Interval) -> Self {
        let slope = 1.0 / domain.width();
        Self::affine(domain, slope, -domain.lo() * slope)
    }

    pub fn sine_perturbed(domain: Interval, slope: f64, amplitude: f64, frequency: f64) -> Self {
        Self { domain, repr: Representation::SinePerturbed { slope, amplitude, frequency } }
    }

    pub fn tabulated(x: Vec<f64>, y: Vec<f64>, dy: Option<Vec<f64>>) -> Result<Self> {
        if x.len() < MIN_TABULATED_SAMPLES {
            return Err(Error::InvalidMap(format!(
                "tabulated branch needs at least {MIN_TABULATED_SAMPLES} samples, got {}",
                x.len()
            )));
        }
        let domain = Interval::new(x[0], x[x.len() - 1])?;
        Ok(Self { domain, repr: Representation::Tabulated(MonotoneCubic::new(x, y, dy)?) })
    }

    pub(crate) fn from_parts(domain: Interval, repr: Representation) -> Self {
        Self { domain, repr }
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn kind_name(&self) -> &'static str {
        match self.repr {
            Representation::Affine { .. } => "affine",
            Representation::SinePerturbed { .. } => "sine_perturbed",
            Representation::Tabulated(_) => "tabulated",
            Representation::Extended(_) => "extended",
            Representation::Perturbed(_) => "perturbed",
        }
    }

    /// Value and derivative without the domain check. Analytic forms extend
    /// naturally past the endpoints; the others clamp.
    pub(crate) fn value_deriv_raw(&self, x: f64) -> Result<(f64, f64)> {
        let lo = self.domain.lo();
        Ok(match &self.repr {
            Representation::Affine { slope, intercept } => (slope * x + intercept, *slope),
            Representation::SinePerturbed { slope, amplitude, frequency } => {
                let w = 2.0 * PI * frequency;
                let phase = w * (x - lo);
                (slope * (x - lo) + amplitude * phase.sin(), slope + amplitude * w * phase.cos())
            }
            Representation::Tabulated(c) => c.eval_with_deriv(x),
            Representation::Extended(e) => e.eval_with_deriv(x.clamp(lo, self.domain.hi()))?,
            Representation::Perturbed(p) => p.eval_with_deriv(x.clamp(lo, self.domain.hi()))?,
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_with_deriv(x)?.0)
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        Ok(self.eval_with_deriv(x)?.1)
    }

    pub fn eval_with_deriv(&self, x: f64) -> Result<(f64, f64)> {
        self.domain.check(x)?;
        self.value_deriv_raw(x)
    }

    /// The preimage of `u` in the domain.
    pub fn inverse(&self, u: f64) -> Result<f64> {
        Ok(self.inverse_with_deriv(u)?.0)
    }

    /// The preimage `x` of `u` together with `f'(x)`.
    pub fn inverse_with_deriv(&self, u: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain { x: u, lo: 0.0, hi: 1.0 });
        }
        match &self.repr {
            Representation::Affine { slope, intercept } => Ok(((u - intercept) / slope, *slope)),
            Representation::Extended(e) => e.inverse_with_deriv(u),
            _ => {
                let f = |x: f64| self.value_deriv_raw(x).unwrap_or((f64::NAN, f64::NAN));
                let (lo, hi) = (self.domain.lo(), self.domain.hi());
                let root = solve_increasing_from(f, (lo, f(lo).0), (hi, f(hi).0), u, "branch inverse")?;
                match root.deriv {
                    Some(d) => Ok((root.x, d)),
                    None => Ok((root.x, self.value_deriv_raw(root.x)?.1)),
                }
            }
        }
    }
}
