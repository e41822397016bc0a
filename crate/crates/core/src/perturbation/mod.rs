//! Modulus-of-continuity perturbations of the first branch near its fixed
//! point at 0, Lebesgue-preserving re-extension of the last branch, and the
//! distortion experiment built on top.

mod demo;
mod modulus;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::branch::{Branch, Interval, Representation};
use crate::error::{Error, Result};
use crate::extension::{assemble_circle_map, PartialMapSpec};
use crate::map::{FullBranchMap, DEFAULT_SIGMA_MIN, TAU_BRANCH};
use crate::numerics::{gauss_kronrod_15, integrate_adaptive};
use crate::transfer::invariance_defect;

pub use demo::{unbounded_demo, unbounded_demo_with, DemoOptions, DemoRow, ExperimentConfig, UnboundedDemo};
pub use modulus::{Modulus, ModulusKind};

/// Invariance defect a map must meet before it is perturbed.
pub const TAU_INVARIANCE: f64 = 1e-8;
/// Grid used for the admissible-epsilon scan and for C¹ distances.
pub const DISTANCE_GRID: usize = 10_000;

/// Where and how strongly the first branch is perturbed.
///
/// `V0 = [lo, lo + v0_radius]`, followed by a cosine blend of width
/// `blend_width`; the compensating bump lives on `compensation_window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub epsilon: f64,
    pub modulus: Modulus,
    pub v0_radius: f64,
    pub blend_width: f64,
    pub compensation_window: Interval,
}

impl PerturbationConfig {
    /// Default windows for a branch on `domain`: `V0` of a fifth of the width,
    /// a tenth for the blend, compensation over `[lo + w/2, lo + 9w/10]`.
    pub fn for_domain(domain: Interval, epsilon: f64, modulus: Modulus) -> Self {
        let (lo, w) = (domain.lo(), domain.width());
        PerturbationConfig {
            epsilon,
            modulus,
            v0_radius: w / 5.0,
            blend_width: w / 10.0,
            compensation_window: Interval::new(lo + 0.5 * w, lo + 0.9 * w).expect("non-empty window"),
        }
    }

    /// Checks the windows are disjoint and inside `domain`.
    pub fn check(&self, domain: Interval) -> Result<()> {
        let (lo, hi, w) = (domain.lo(), domain.hi(), domain.width());
        let fail = |msg: String| Err(Error::Precondition(msg));
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must be finite and nonnegative, got {}", self.epsilon));
        }
        if !(self.v0_radius > 0.0 && self.v0_radius < w / 4.0) {
            return fail(format!("v0_radius {} must lie in (0, {})", self.v0_radius, w / 4.0));
        }
        if !(self.blend_width > 0.0) {
            return fail(format!("blend_width must be positive, got {}", self.blend_width));
        }
        let win = self.compensation_window;
        if !(win.lo() >= lo + self.v0_radius + self.blend_width) {
            return fail("compensation window overlaps the perturbation and blend zones".into());
        }
        if !(win.hi() < hi) {
            return fail("compensation window must end strictly inside the branch".into());
        }
        Ok(())
    }
}

/// Cumulative integral of `omega(t) * blend(t)` tabulated on geometric and uniform panels.
#[derive(Debug)]
struct OmegaTable {
    modulus: Modulus,
    radius: f64,
    blend: f64,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

const GEOMETRIC_LEVELS: i32 = 90;
const BLEND_PANELS: usize = 32;

impl OmegaTable {
    fn new(modulus: Modulus, radius: f64, blend: f64) -> Self {
        let mut nodes = vec![0.0];
        for j in (1..=GEOMETRIC_LEVELS).rev() {
            nodes.push(radius * 2f64.powi(-j));
        }
        for i in 0..=BLEND_PANELS {
            nodes.push(radius + blend * i as f64 / BLEND_PANELS as f64);
        }
        let mut table = OmegaTable { modulus, radius, blend, nodes, cumulative: Vec::new() };
        let mut acc = 0.0;
        let mut cumulative = vec![0.0];
        for w in table.nodes.windows(2) {
            acc += integrate_adaptive(|t| table.density(t), w[0], w[1], 1e-300, 1e-15, 200).value;
            cumulative.push(acc);
        }
        table.cumulative = cumulative;
        table
    }

    /// `omega(t)` faded to zero over the blend zone.
    fn density(&self, t: f64) -> f64 {
        if t <= self.radius {
            self.modulus.eval(t)
        } else if t < self.radius + self.blend {
            0.5 * (1.0 + (PI * (t - self.radius) / self.blend).cos()) * self.modulus.eval(t)
        } else {
            0.0
        }
    }

    fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.nodes[self.nodes.len() - 1] {
            return self.total();
        }
        let i = self.nodes.partition_point(|&n| n <= t) - 1;
        self.cumulative[i] + gauss_kronrod_15(&|s| self.density(s), self.nodes[i], t).value
    }
}

/// A branch whose derivative is `base' + epsilon * omega(x - lo)` near `lo`,
/// minus a `sin^2` bump on the compensation window sized so the branch
/// still maps onto `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PerturbedDerivative {
    base: Box<Branch>,
    config: PerturbationConfig,
    kappa: f64,
    table: Arc<OmegaTable>,
}

impl PartialEq for PerturbedDerivative {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.config == other.config && self.kappa == other.kappa
    }
}

impl PerturbedDerivative {
    pub fn base(&self) -> &Branch {
        &self.base
    }

    pub fn config(&self) -> &PerturbationConfig {
        &self.config
    }

    /// Height of the compensating bump.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn bump(&self, x: f64) -> (f64, f64) {
        let win = self.config.compensation_window;
        let len = win.width();
        if x <= win.lo() {
            (0.0, 0.0)
        } else if x >= win.hi() {
            (0.5 * len, 0.0)
        } else {
            let s = (x - win.lo()) / len;
            let integral = 0.5 * (x - win.lo()) - len / (4.0 * PI) * (2.0 * PI * s).sin();
            let height = (PI * s).sin().powi(2);
            (integral, height)
        }
    }

    pub(crate) fn eval_with_deriv(&self, x: f64) -> Result<(f64, f64)> {
        let lo = self.base.domain().lo();
        let (bv, bd) = self.base.value_deriv_raw(x)?;
        let base_lo = self.base.value_deriv_raw(lo)?.0;
        let t = x - lo;
        let (bump_int, bump) = self.bump(x);
        let eps = self.config.epsilon;
        let value = (bv - base_lo) + eps * self.table.integral(t) - self.kappa * bump_int;
        let deriv = bd + eps * self.table.density(t) - self.kappa * bump;
        Ok((value, deriv))
    }
}

fn perturbed_parts(base: &Branch, cfg: &PerturbationConfig) -> Result<(Arc<OmegaTable>, f64)> {
    cfg.check(base.domain())?;
    let table = Arc::new(OmegaTable::new(cfg.modulus, cfg.v0_radius, cfg.blend_width));
    let dom = base.domain();
    let rise = base.value_deriv_raw(dom.hi())?.0 - base.value_deriv_raw(dom.lo())?.0;
    let kappa = 2.0 * (rise + cfg.epsilon * table.total() - 1.0) / cfg.compensation_window.width();
    Ok((table, kappa))
}

/// Rebuilds a perturbed branch without the fixed-point and expansion checks (used when loading files).
pub(crate) fn build_perturbed_branch_unchecked(base: &Branch, cfg: &PerturbationConfig) -> Result<Branch> {
    let (table, kappa) = perturbed_parts(base, cfg)?;
    let p = PerturbedDerivative { base: Box::new(base.clone()), config: *cfg, kappa, table };
    Ok(Branch::from_parts(base.domain(), Representation::Perturbed(p)))
}

/// Perturbs the derivative of `b1` by `epsilon * omega` near its fixed point at 0.
///
/// Fails with [`Error::EpsilonTooLarge`] (carrying the largest admissible
/// epsilon) if the compensating bump would push the derivative below `sigma_min`.
pub fn build_perturbed_branch(b1: &Branch, cfg: &PerturbationConfig, sigma_min: f64) -> Result<Branch> {
    let dom = b1.domain();
    if dom.lo() != 0.0 || b1.eval(0.0)?.abs() > TAU_BRANCH {
        return Err(Error::Precondition("the branch to perturb must fix 0 at its left endpoint".into()));
    }
    let (table, kappa) = perturbed_parts(b1, cfg)?;
    let win = cfg.compensation_window;
    let kappa_per_eps = 2.0 * table.total() / win.width();
    let mut admissible = f64::INFINITY;
    let mut lowest = f64::INFINITY;
    for j in 0..=1000 {
        let x = win.lo() + win.width() * j as f64 / 1000.0;
        let bump = (PI * (x - win.lo()) / win.width()).sin().powi(2);
        let d = b1.deriv(x)?;
        lowest = lowest.min(d - kappa * bump);
        if bump > 0.0 {
            admissible = admissible.min((d - sigma_min) / (kappa_per_eps * bump));
        }
    }
    if lowest < sigma_min {
        return Err(Error::EpsilonTooLarge { epsilon: cfg.epsilon, max_admissible: admissible.max(0.0) });
    }
    let p = PerturbedDerivative { base: Box::new(b1.clone()), config: *cfg, kappa, table };
    Ok(Branch::from_parts(dom, Representation::Perturbed(p)))
}

/// `sup |a - b| + sup |a' - b'|` on a uniform grid of the common domain.
pub fn branch_c1_distance(a: &Branch, b: &Branch, grid: usize) -> Result<f64> {
    let dom = a.domain();
    if (dom.lo() - b.domain().lo()).abs() > 1e-12 || (dom.hi() - b.domain().hi()).abs() > 1e-12 {
        return Err(Error::Precondition("C1 distance needs branches on the same domain".into()));
    }
    let grid = grid.max(2);
    let (mut dv, mut dd) = (0.0f64, 0.0f64);
    for j in 0..grid {
        let x = if j == grid - 1 { dom.hi() } else { dom.lo() + dom.width() * j as f64 / (grid - 1) as f64 };
        let (va, da) = a.eval_with_deriv(x.clamp(dom.lo(), dom.hi()))?;
        let (vb, db) = b.eval_with_deriv(x.clamp(b.domain().lo(), b.domain().hi()))?;
        dv = dv.max((va - vb).abs());
        dd = dd.max((da - db).abs());
    }
    Ok(dv + dd)
}

/// Largest branchwise C¹ distance between two maps of the same degree.
pub fn c1_distance(a: &FullBranchMap, b: &FullBranchMap, grid: usize) -> Result<f64> {
    if a.degree() != b.degree() {
        return Err(Error::Precondition("C1 distance needs maps of equal degree".into()));
    }
    let mut worst = 0.0f64;
    for (x, y) in a.branches().iter().zip(b.branches()) {
        worst = worst.max(branch_c1_distance(x, y, grid)?);
    }
    Ok(worst)
}

/// A perturbed, re-extended map together with its measured distance to the original.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub map: FullBranchMap,
    pub c1_distance: f64,
    pub kappa: f64,
}

/// Perturbs branch 1 of `m`, keeps branches `2..n-1`, and rebuilds branch `n`
/// so the result preserves Lebesgue measure.
pub fn perturb_map(m: &FullBranchMap, cfg: &PerturbationConfig, delta_uniform: f64) -> Result<Perturbation> {
    let defect = invariance_defect(m, 1000)?;
    if !(defect <= TAU_INVARIANCE) {
        return Err(Error::Precondition(format!("input map does not preserve Lebesgue measure (defect {defect:e})")));
    }
    let n = m.degree();
    let b1 = build_perturbed_branch(m.branch(1), cfg, DEFAULT_SIGMA_MIN)?;
    let kappa = match b1.representation() {
        Representation::Perturbed(p) => p.kappa(),
        _ => unreachable!("build_perturbed_branch returns a perturbed branch"),
    };
    let mut known = vec![b1];
    known.extend(m.branches()[1..n - 1].iter().cloned());
    let spec = PartialMapSpec::new(m.partition(), n, known)?;
    let map = assemble_circle_map(&spec, delta_uniform).map_err(|e| match e {
        Error::ConditionFails { margin, required } => Error::Precondition(format!(
            "epsilon {} too large: missing-branch margin {margin} below {required} after perturbation",
            cfg.epsilon
        )),
        other => other,
    })?;
    let c1_distance = c1_distance(m, &map, DISTANCE_GRID)?;
    Ok(Perturbation { map, c1_distance, kappa })
}

/// Expansion bound and orbit constant for [`predicted_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundParams {
    pub sigma_hat: f64,
    pub c: f64,
}

impl LowerBoundParams {
    pub fn new(sigma_hat: f64, c: f64) -> Result<Self> {
        if !(sigma_hat > 1.0) || !(c > 0.0 && c <= 1.0) {
            return Err(Error::Precondition(format!("need sigma_hat > 1 and c in (0, 1], got {sigma_hat}, {c}")));
        }
        Ok(Self { sigma_hat, c })
    }
}

/// `(1/sigma) * sum_{i=0}^{k-1} omega(C sigma^{i-k})`, the modulus part of the
/// lower bound for the log-derivative gap along the orbit approaching 0.
pub fn predicted_lower_bound(params: &LowerBoundParams, w: &Modulus, k: usize) -> f64 {
    let s = params.sigma_hat;
    let sum: f64 = (0..k).map(|i| w.eval(params.c * s.powi(i as i32 - k as i32))).sum();
    sum / s
}
