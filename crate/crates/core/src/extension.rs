//! Construction of the unique missing branch that makes a full-branch map
//! Lebesgue-preserving, and the C¹ matching check at the partition points.
//!
//! Given branches `f_i` for `i != i0`, the missing branch is stored through
//! its inverse
//!
//! ```text
//! g(u) = lo_{i0} + u - sum_{i != i0} (f_i^{-1}(u) - lo_i)
//! ```
//!
//! whose derivative `1 - sum 1/f_i'(f_i^{-1}(u))` is exactly the reciprocal
//! of the derivative the transfer-operator identity `P1 = 1` forces on the
//! missing branch. `g(0) = lo_{i0}` and `g(1) = hi_{i0}` hold identically.

use rayon::prelude::*;
use serde::Serialize;

use crate::branch::{Branch, Interval, Representation};
use crate::error::{Error, Result};
use crate::map::{CircleC1, FullBranchMap, ValidationOptions};
use crate::numerics::solve_increasing_from;

/// Default grid for the missing-branch condition sweep.
pub const DEFAULT_CONDITION_GRID: usize = 10_000;
/// Default safety margin demanded of the condition.
pub const DEFAULT_DELTA_UNIFORM: f64 = 1e-3;
/// Default tolerance on derivative gaps at partition points.
pub const TAU_MATCH: f64 = 1e-8;

/// `n - 1` known branches plus the domain of the missing one.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialMapSpec {
    partition: Vec<f64>,
    missing_index: usize,
    branches: Vec<Branch>,
}

impl PartialMapSpec {
    /// `missing_index` is 1-based; `branches` lists the known branches left to right.
    pub fn new(partition: Vec<f64>, missing_index: usize, branches: Vec<Branch>) -> Result<Self> {
        let n = partition.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::InvalidMap("partition must have at least 3 points".into()));
        }
        if partition.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMap("partition must be strictly increasing".into()));
        }
        if partition[0] != 0.0 || partition[n] != 1.0 {
            return Err(Error::InvalidMap("partition must start at 0 and end at 1".into()));
        }
        if missing_index == 0 || missing_index > n {
            return Err(Error::InvalidMap(format!("missing index {missing_index} outside 1..={n}")));
        }
        if branches.len() != n - 1 {
            return Err(Error::InvalidMap(format!("expected {} known branches, got {}", n - 1, branches.len())));
        }
        for (b, label) in branches.iter().zip((1..=n).filter(|&l| l != missing_index)) {
            let (lo, hi) = (partition[label - 1], partition[label]);
            let dom = b.domain();
            if (dom.lo() - lo).abs() > 1e-12 || (dom.hi() - hi).abs() > 1e-12 {
                return Err(Error::InvalidMap(format!(
                    "branch {label} has domain [{}, {}] but the partition gives [{lo}, {hi}]",
                    dom.lo(),
                    dom.hi()
                )));
            }
        }
        Ok(Self { partition, missing_index, branches })
    }

    /// The spec obtained by deleting branch `label` from a map.
    pub fn from_map(m: &FullBranchMap, label: usize) -> Result<Self> {
        let branches = m
            .branches()
            .iter()
            .enumerate()
            .filter(|(i, _)| i + 1 != label)
            .map(|(_, b)| b.clone())
            .collect();
        Self::new(m.partition(), label, branches)
    }

    pub fn degree(&self) -> usize {
        self.partition.len() - 1
    }

    pub fn partition(&self) -> &[f64] {
        &self.partition
    }

    pub fn missing_index(&self) -> usize {
        self.missing_index
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn missing_domain(&self) -> Interval {
        Interval::new(self.partition[self.missing_index - 1], self.partition[self.missing_index])
            .expect("partition is strictly increasing")
    }

    /// `sum_{i != i0} 1 / f_i'(f_i^{-1}(u))` and `sum_{i != i0} (f_i^{-1}(u) - lo_i)`.
    fn inverse_sums(&self, u: f64) -> Result<(f64, f64)> {
        let mut recip = 0.0;
        let mut length = 0.0;
        for b in &self.branches {
            let (x, d) = b.inverse_with_deriv(u)?;
            recip += 1.0 / d;
            length += x - b.domain().lo();
        }
        Ok((recip, length))
    }

    /// `sum_{i != i0} 1 / f_i'(f_i^{-1}(u))`.
    pub fn reciprocal_sum(&self, u: f64) -> Result<f64> {
        Ok(self.inverse_sums(u)?.0)
    }
}

/// `1 - max_u sum_{i != i0} 1/f_i'(f_i^{-1}(u))` over a uniform grid of `grid_size` points on `[0, 1]`.
///
/// A positive value means the missing branch exists, with that margin on the grid.
pub fn condition_one_margin(spec: &PartialMapSpec, grid_size: usize) -> Result<f64> {
    let grid = grid_size.max(2);
    let sums = (0..grid)
        .into_par_iter()
        .map(|j| spec.reciprocal_sum(if j == grid - 1 { 1.0 } else { j as f64 / (grid - 1) as f64 }))
        .collect::<Result<Vec<f64>>>()?;
    Ok(1.0 - sums.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// The missing branch, stored through its closed-form inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedInverse {
    spec: PartialMapSpec,
    domain: Interval,
}

impl ExtendedInverse {
    pub fn new(spec: PartialMapSpec) -> Self {
        let domain = spec.missing_domain();
        Self { spec, domain }
    }

    pub fn spec(&self) -> &PartialMapSpec {
        &self.spec
    }

    /// `(g(u), g'(u))` for the inverse `g` of the missing branch.
    pub fn inverse_map(&self, u: f64) -> Result<(f64, f64)> {
        let (recip, length) = self.spec.inverse_sums(u)?;
        Ok((self.domain.lo() + u - length, 1.0 - recip))
    }

    /// `g(1) - hi`; zero up to round-off for every valid spec.
    pub fn surjectivity_defect(&self) -> Result<f64> {
        Ok(self.inverse_map(1.0)?.0 - self.domain.hi())
    }

    pub(crate) fn inverse_with_deriv(&self, u: f64) -> Result<(f64, f64)> {
        let (x, dg) = self.inverse_map(u)?;
        Ok((x, 1.0 / dg))
    }

    pub(crate) fn eval_with_deriv(&self, x: f64) -> Result<(f64, f64)> {
        // g(0) = lo and g(1) = hi by construction, so the bracket needs no evaluation.
        let root = solve_increasing_from(
            |u| self.inverse_map(u).unwrap_or((f64::NAN, f64::NAN)),
            (0.0, self.domain.lo()),
            (1.0, self.domain.hi()),
            x,
            "extended branch evaluation",
        )?;
        let dg = match root.deriv {
            Some(dg) => dg,
            None => self.inverse_map(root.x)?.1,
        };
        Ok((root.x, 1.0 / dg))
    }
}

/// Builds the unique branch on the missing domain that makes the map preserve Lebesgue measure.
///
/// Fails with [`Error::ConditionFails`] when the reciprocal-derivative sum of the
/// known branches comes within `delta_uniform` of 1 somewhere on the grid.
pub fn extend_missing_branch(spec: &PartialMapSpec, delta_uniform: f64) -> Result<Branch> {
    if !(delta_uniform > 0.0) {
        return Err(Error::Precondition(format!("delta_uniform must be positive, got {delta_uniform}")));
    }
    let margin = condition_one_margin(spec, DEFAULT_CONDITION_GRID)?;
    if !(margin >= delta_uniform) {
        return Err(Error::ConditionFails { margin, required: delta_uniform });
    }
    // With affine known branches the inverse is affine in u and pinned by
    // g(0) = lo, g(1) = hi, so the branch is the affine map onto [0, 1].
    if spec.branches.iter().all(|b| matches!(b.representation(), Representation::Affine { .. })) {
        return Ok(Branch::affine_onto(spec.missing_domain()));
    }
    let ext = ExtendedInverse::new(spec.clone());
    Ok(Branch::from_parts(ext.domain, Representation::Extended(ext)))
}

/// One-sided derivative limits at a partition point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryMatch {
    /// Partition point; the wrap-around point is reported as `0`.
    pub point: f64,
    pub left_derivative: f64,
    pub right_derivative: f64,
    pub gap: f64,
}

/// Endpoint derivatives of the extended branch from the other branches' endpoint data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedEndpoints {
    pub label: usize,
    /// `1 / (1 - sum_{i != i0} 1 / f_i'(lo_i))`, the limit at the left end.
    pub left: f64,
    /// `1 / (1 - sum_{i != i0} 1 / f_i'(hi_i))`, the limit at the right end.
    pub right: f64,
    /// `1 / (1 - sum_{i != i0} f_i'(lo_i))`: the non-reciprocal variant, reported for comparison only.
    pub left_unreciprocated: f64,
    /// `1 / (1 - sum_{i != i0} f_i'(hi_i))`, likewise.
    pub right_unreciprocated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingReport {
    /// All interior partition points followed by the wrap-around point.
    pub boundaries: Vec<BoundaryMatch>,
    /// The boundaries whose gap exceeds `tolerance`.
    pub mismatches: Vec<BoundaryMatch>,
    pub worst_gap: f64,
    pub tolerance: f64,
    pub extended: Option<ExtendedEndpoints>,
}

impl MatchingReport {
    pub fn verified(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn flag(&self) -> CircleC1 {
        if self.verified() {
            CircleC1::Verified
        } else {
            CircleC1::Failed
        }
    }

    /// The boundary entry at `point`, if any.
    pub fn at(&self, point: f64) -> Option<&BoundaryMatch> {
        self.boundaries.iter().find(|b| (b.point - point).abs() < 1e-12)
    }
}

/// Compares one-sided derivative limits at every partition point, including `0 ~ 1`.
///
/// When `i0` names an extended branch its endpoint limits come from the
/// other branches' endpoint derivatives rather than from evaluating it.
pub fn c1_matching_report(m: &FullBranchMap, i0: Option<usize>, tolerance: f64) -> Result<MatchingReport> {
    let n = m.degree();
    let extended = match i0 {
        Some(label) if (1..=n).contains(&label) => {
            let others = m.branches().iter().enumerate().filter(|(i, _)| i + 1 != label).map(|(_, b)| b);
            let (mut rl, mut rr, mut pl, mut pr) = (0.0, 0.0, 0.0, 0.0);
            for b in others {
                let dl = b.deriv(b.domain().lo())?;
                let dr = b.deriv(b.domain().hi())?;
                rl += 1.0 / dl;
                rr += 1.0 / dr;
                pl += dl;
                pr += dr;
            }
            Some(ExtendedEndpoints {
                label,
                left: 1.0 / (1.0 - rl),
                right: 1.0 / (1.0 - rr),
                left_unreciprocated: 1.0 / (1.0 - pl),
                right_unreciprocated: 1.0 / (1.0 - pr),
            })
        }
        Some(label) => return Err(Error::Precondition(format!("branch label {label} outside 1..={n}"))),
        None => None,
    };
    let end_deriv = |label: usize, right_end: bool| -> Result<f64> {
        let is_extended = matches!(m.branch(label).representation(), Representation::Extended(_));
        if let Some(e) = extended.filter(|e| e.label == label && is_extended) {
            return Ok(if right_end { e.right } else { e.left });
        }
        let b = m.branch(label);
        b.deriv(if right_end { b.domain().hi() } else { b.domain().lo() })
    };
    let mut boundaries = Vec::with_capacity(n);
    for label in 1..=n {
        let next = label % n + 1;
        let left = end_deriv(label, true)?;
        let right = end_deriv(next, false)?;
        let point = if next == 1 { 0.0 } else { m.branch(next).domain().lo() };
        boundaries.push(BoundaryMatch { point, left_derivative: left, right_derivative: right, gap: (left - right).abs() });
    }
    let worst_gap = boundaries.iter().map(|b| b.gap).fold(0.0, f64::max);
    let mismatches = boundaries.iter().filter(|b| !(b.gap <= tolerance)).copied().collect();
    Ok(MatchingReport { boundaries, mismatches, worst_gap, tolerance, extended })
}

/// Extends `spec`, validates the assembled map and records its C¹ status.
pub fn assemble_circle_map(spec: &PartialMapSpec, delta_uniform: f64) -> Result<FullBranchMap> {
    assemble_circle_map_with(spec, delta_uniform, &ValidationOptions::default(), TAU_MATCH)
}

pub fn assemble_circle_map_with(
    spec: &PartialMapSpec,
    delta_uniform: f64,
    opts: &ValidationOptions,
    tau_match: f64,
) -> Result<FullBranchMap> {
    let missing = extend_missing_branch(spec, delta_uniform)?;
    let mut branches = spec.branches().to_vec();
    branches.insert(spec.missing_index() - 1, missing);
    let m = FullBranchMap::new(branches)?.certified(opts)?;
    let report = c1_matching_report(&m, Some(spec.missing_index()), tau_match)?;
    Ok(m.with_circle_c1(report.flag()))
}
