//! Full-branch maps of the unit interval and their structural validation.

use serde::Serialize;

use crate::branch::{Branch, Interval};
use crate::error::{Error, Result};

/// Endpoint tolerance for `f(lo) = 0`, `f(hi) = 1`.
pub const TAU_BRANCH: f64 = 1e-9;
/// Round-trip tolerance for branch inverses.
pub const TAU_INV: f64 = 1e-12;
/// Default lower bound demanded of every derivative.
pub const DEFAULT_SIGMA_MIN: f64 = 1.01;

/// Whether the map has been checked to be C¹ as a circle map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CircleC1 {
    #[default]
    Unchecked,
    Verified,
    Failed,
}

impl CircleC1 {
    pub fn as_str(&self) -> &'static str {
        match self {
            CircleC1::Unchecked => "unchecked",
            CircleC1::Verified => "verified",
            CircleC1::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "unchecked" => Ok(CircleC1::Unchecked),
            "verified" => Ok(CircleC1::Verified),
            "failed" => Ok(CircleC1::Failed),
            other => Err(Error::Parse(format!("unknown circle_c1 flag `{other}`"))),
        }
    }
}

/// An ordered tuple of adjacent expanding branches.
///
/// Construction only checks ordering and `n >= 2`; tiling, endpoint and
/// expansion defects are reported by [`FullBranchMap::validate`] so that
/// deliberately broken fixtures can still be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct FullBranchMap {
    branches: Vec<Branch>,
    sigma: Option<f64>,
    circle_c1: CircleC1,
}

impl FullBranchMap {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.len() < 2 {
            return Err(Error::InvalidMap(format!("a full-branch map needs at least 2 branches, got {}", branches.len())));
        }
        if branches.windows(2).any(|w| !(w[0].domain().lo() < w[1].domain().lo())) {
            return Err(Error::InvalidMap("branch domains must be listed left to right".into()));
        }
        Ok(Self { branches, sigma: None, circle_c1: CircleC1::Unchecked })
    }

    /// `x -> n x mod 1` as `n` affine branches.
    pub fn affine_uniform(n: usize) -> Result<Self> {
        let nf = n as f64;
        let branches = (0..n)
            .map(|i| {
                let domain = Interval::new(i as f64 / nf, (i + 1) as f64 / nf)?;
                Ok(Branch::affine(domain, nf, -(i as f64)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(branches)
    }

    /// The doubling map `x -> 2x mod 1`.
    pub fn doubling() -> Self {
        Self::affine_uniform(2).expect("doubling map is valid")
    }

    pub fn with_sigma(mut self, sigma: Option<f64>) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_circle_c1(mut self, flag: CircleC1) -> Self {
        self.circle_c1 = flag;
        self
    }

    pub fn degree(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Branch with 1-based `label`.
    pub fn branch(&self, label: usize) -> &Branch {
        &self.branches[label - 1]
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    pub fn circle_c1(&self) -> CircleC1 {
        self.circle_c1
    }

    /// The `n + 1` partition points: every `lo` followed by the last `hi`.
    pub fn partition(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.branches.iter().map(|b| b.domain().lo()).collect();
        p.push(self.branches[self.degree() - 1].domain().hi());
        p
    }

    /// 1-based label of the branch containing `x`. Shared endpoints go to the left branch.
    pub fn locate(&self, x: f64) -> Result<usize> {
        let idx = self.branches.partition_point(|b| b.domain().hi() < x);
        match self.branches.get(idx) {
            Some(b) if b.domain().contains(x) => Ok(idx + 1),
            _ => {
                let p = self.partition();
                Err(Error::Domain { x, lo: p[0], hi: p[p.len() - 1] })
            }
        }
    }

    /// `(f(x), label)`.
    pub fn eval(&self, x: f64) -> Result<(f64, usize)> {
        let label = self.locate(x)?;
        Ok((self.branch(label).eval(x)?, label))
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        self.branch(self.locate(x)?).deriv(x)
    }

    /// `(f(x), f'(x), label)`.
    pub fn eval_with_deriv(&self, x: f64) -> Result<(f64, f64, usize)> {
        let label = self.locate(x)?;
        let (y, d) = self.branch(label).eval_with_deriv(x)?;
        Ok((y, d, label))
    }

    pub fn validate(&self, opts: &ValidationOptions) -> ValidationReport {
        validate_full_branch_map(self, opts)
    }

    /// Validates and, if the map passes, records the observed minimum derivative as `sigma`.
    pub fn certified(self, opts: &ValidationOptions) -> Result<Self> {
        let report = self.validate(opts);
        if !report.passed {
            return Err(Error::InvalidMap(report.failures.join("; ")));
        }
        Ok(self.with_sigma(Some(report.min_derivative)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Grid points per branch, endpoints included.
    pub grid_size: usize,
    pub sigma_min: f64,
    pub tau_branch: f64,
    /// Largest tolerated isolated jump of `f'` between adjacent grid points
    /// (see [`ValidationReport::max_derivative_jump`]).
    pub derivative_jump_slack: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { grid_size: 10_000, sigma_min: DEFAULT_SIGMA_MIN, tau_branch: TAU_BRANCH, derivative_jump_slack: 0.1 }
    }
}

impl ValidationOptions {
    pub fn with_grid(grid_size: usize) -> Self {
        Self { grid_size, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Largest gap or overlap between adjacent domains, including `0` and `1` at the ends.
    pub tiling_defect: f64,
    pub min_derivative: f64,
    pub max_endpoint_defect: f64,
    /// Largest amount by which a change of `f'` between adjacent grid points
    /// exceeds the changes on either side of it, relative to `|f'|` there.
    ///
    /// A smooth derivative changes by similar amounts over neighbouring steps,
    /// however steep it is; a discontinuity stands out as a single spike.
    pub max_derivative_jump: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

pub fn validate_full_branch_map(m: &FullBranchMap, opts: &ValidationOptions) -> ValidationReport {
    let grid = opts.grid_size.max(2);
    let mut failures = Vec::new();

    let p = m.partition();
    let mut tiling = p[0].abs().max((p[p.len() - 1] - 1.0).abs());
    for w in m.branches().windows(2) {
        tiling = tiling.max((w[1].domain().lo() - w[0].domain().hi()).abs());
    }
    if tiling > opts.tau_branch {
        failures.push(format!("domains do not tile [0,1] (defect {tiling:e})"));
    }

    let mut min_d = f64::INFINITY;
    let mut endpoint = 0.0f64;
    let mut jump = 0.0f64;
    for (i, b) in m.branches().iter().enumerate() {
        let dom = b.domain();
        let mut derivs = Vec::with_capacity(grid);
        for j in 0..grid {
            let x = if j == grid - 1 { dom.hi() } else { dom.lo() + dom.width() * j as f64 / (grid - 1) as f64 };
            match b.eval_with_deriv(x) {
                Ok((y, d)) => {
                    if j == 0 {
                        endpoint = endpoint.max(y.abs());
                    }
                    if j == grid - 1 {
                        endpoint = endpoint.max((y - 1.0).abs());
                    }
                    min_d = min_d.min(d);
                    derivs.push(d);
                }
                Err(e) => {
                    failures.push(format!("branch {} failed to evaluate at {x}: {e}", i + 1));
                    min_d = f64::NAN;
                    break;
                }
            }
        }
        jump = jump.max(isolated_jump(&derivs));
    }
    if endpoint > opts.tau_branch {
        failures.push(format!("branch does not map onto [0,1] (endpoint defect {endpoint:e})"));
    }
    if !(min_d >= opts.sigma_min) {
        failures.push(format!("expansion violated: minimum derivative {min_d} < {}", opts.sigma_min));
    }
    if jump > opts.derivative_jump_slack {
        failures.push(format!("derivative discontinuous: relative jump {jump:e} between grid points"));
    }
    ValidationReport {
        tiling_defect: tiling,
        min_derivative: min_d,
        max_endpoint_defect: endpoint,
        max_derivative_jump: jump,
        passed: failures.is_empty(),
        failures,
    }
}

fn isolated_jump(derivs: &[f64]) -> f64 {
    let diffs: Vec<f64> = derivs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut worst = 0.0f64;
    for (j, &dj) in diffs.iter().enumerate() {
        let before = if j > 0 { diffs[j - 1] } else { 0.0 };
        let after = diffs.get(j + 1).copied().unwrap_or(0.0);
        let scale = derivs[j].abs().max(derivs[j + 1].abs());
        worst = worst.max((dj - before.max(after)).max(0.0) / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_eval_examples() {
        let d = FullBranchMap::doubling();
        assert_eq!(d.eval(0.75).unwrap(), (0.5, 2));
        assert_eq!(d.eval(0.5).unwrap(), (1.0, 1));
        let t = FullBranchMap::affine_uniform(3).unwrap();
        let (y, label) = t.eval(0.5).unwrap();
        assert!((y - 0.5).abs() < 1e-15);
        assert_eq!(label, 2);
        assert!(d.eval(1.2).is_err());
    }

    #[test]
    fn doubling_validates() {
        let r = FullBranchMap::doubling().validate(&ValidationOptions::default());
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.min_derivative, 2.0);
        assert_eq!(r.tiling_defect, 0.0);
        assert_eq!(r.max_endpoint_defect, 0.0);
    }

    #[test]
    fn contracting_branch_fails() {
        let b1 = Branch::affine(Interval::new(0.0, 0.5).unwrap(), 0.9, 0.0);
        let b2 = Branch::affine(Interval::new(0.5, 1.0).unwrap(), 2.0, -1.0);
        let r = FullBranchMap::new(vec![b1, b2]).unwrap().validate(&ValidationOptions::default());
        assert!(!r.passed);
        assert!(r.failures.iter().any(|f| f.contains("expansion violated")));
    }

    #[test]
    fn isolated_jumps_stand_out() {
        let smooth: Vec<f64> = (0..100).map(|j| 2.0 + (j as f64 / 10.0).powi(2)).collect();
        assert!(isolated_jump(&smooth) < 1e-2);
        let mut broken = vec![2.0; 50];
        broken.extend(vec![2.5; 50]);
        assert!((isolated_jump(&broken) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_maps() {
        let b = Branch::affine_onto(Interval::new(0.0, 1.0).unwrap());
        assert!(FullBranchMap::new(vec![b]).is_err());
    }
}
