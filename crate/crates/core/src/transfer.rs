//! The transfer operator `Ph(x) = sum_{y in f^{-1}(x)} h(y) / f'(y)` on uniform grids.

use rayon::prelude::*;

use crate::branch::Interval;
use crate::error::{Error, Result};
use crate::io::format_sig;
use crate::map::FullBranchMap;

pub const DEFAULT_DENSITY_NODES: usize = 4096;

/// A nonnegative density sampled at `N` uniform nodes `j / (N - 1)`, read by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Precondition("a density grid needs at least 2 nodes".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Precondition(format!("density values must be finite and nonnegative, found {v}")));
        }
        Ok(Self { values })
    }

    pub fn from_fn(nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = nodes.max(2);
        Self::new((0..n).map(|j| f(node(j, n))).collect())
    }

    pub fn constant(nodes: usize, c: f64) -> Result<Self> {
        Self::from_fn(nodes, |_| c)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, j: usize) -> f64 {
        node(j, self.len())
    }

    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.len();
        let s = x.clamp(0.0, 1.0) * (n - 1) as f64;
        let j = (s.floor() as usize).min(n - 2);
        let t = s - j as f64;
        if t == 0.0 {
            return self.values[j];
        }
        self.values[j] * (1.0 - t) + self.values[j + 1] * t
    }

    pub fn trapezoid(&self) -> f64 {
        let h = 1.0 / (self.len() - 1) as f64;
        let inner: f64 = self.values[1..self.len() - 1].iter().sum();
        h * (inner + 0.5 * (self.values[0] + self.values[self.len() - 1]))
    }

    /// `x,value` rows with 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (j, v) in self.values.iter().enumerate() {
            out.push_str(&format_sig(self.node(j), 15));
            out.push(',');
            out.push_str(&format_sig(*v, 15));
            out.push('\n');
        }
        out
    }
}

fn node(j: usize, n: usize) -> f64 {
    if j == n - 1 {
        1.0
    } else {
        j as f64 / (n - 1) as f64
    }
}

fn apply_at(m: &FullBranchMap, h: &DensityGrid, x: f64) -> Result<f64> {
    let mut acc = 0.0;
    for b in m.branches() {
        let (y, d) = b.inverse_with_deriv(x)?;
        acc += h.interpolate(y) / d;
    }
    Ok(acc)
}

/// `Ph` at the nodes of `h`, with `h` read by linear interpolation at the preimages.
pub fn transfer_apply(m: &FullBranchMap, h: &DensityGrid) -> Result<DensityGrid> {
    let values = (0..h.len()).into_par_iter().map(|j| apply_at(m, h, h.node(j))).collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid { values })
}

/// `P1` on `nodes` uniform nodes.
pub fn transfer_of_constant(m: &FullBranchMap, nodes: usize) -> Result<DensityGrid> {
    let one = DensityGrid::constant(nodes, 1.0)?;
    transfer_apply(m, &one)
}

/// `max_j |P1(x_j) - 1|` over `nodes` uniform nodes.
pub fn invariance_defect(m: &FullBranchMap, nodes: usize) -> Result<f64> {
    let p1 = transfer_of_constant(m, nodes)?;
    Ok(p1.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max))
}

/// `max_I |lambda(f^{-1}(I)) - lambda(I)|` over the given intervals.
pub fn pullback_measure_defect(m: &FullBranchMap, intervals: &[Interval]) -> Result<f64> {
    let mut worst = 0.0f64;
    for iv in intervals {
        let mut pulled = 0.0;
        for b in m.branches() {
            pulled += b.inverse(iv.hi())? - b.inverse(iv.lo())?;
        }
        worst = worst.max((pulled - iv.width()).abs());
    }
    Ok(worst)
}
