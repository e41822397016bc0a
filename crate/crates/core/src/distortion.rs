//! Cylinder partitions and the distortion statistic
//! `d_k = max_cylinders sup_{x,y} |log (f^k)'(x) - log (f^k)'(y)|`.
//!
//! `d_k` is estimated from samples, so every reported value is a lower bound
//! for the true supremum. Sample positions come from a fixed nested sequence
//! (both endpoints, then van der Corput points), so adding samples never
//! decreases the estimate.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::branch::Interval;
use crate::error::{Error, Result};
use crate::io::format_sig;
use crate::map::{FullBranchMap, TAU_INV};

pub const DEFAULT_BUDGET: u64 = 1 << 20;
pub const DEFAULT_SAMPLES: usize = 32;
/// Relative rise over the last third of the levels above which a profile is
/// labelled growing.
pub const DEFAULT_TAU_GROWTH: f64 = 0.05;

/// A word over the 1-based branch labels.
pub type Itinerary = Vec<usize>;

pub fn itinerary_string(word: &[usize]) -> String {
    let sep = if word.iter().any(|&a| a > 9) { "." } else { "" };
    word.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(sep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub interval: Interval,
    pub itinerary: Itinerary,
}

impl Cylinder {
    /// `f_{a_k} o ... o f_{a_1}` applied to both endpoints; `(0, 1)` up to round-off.
    pub fn image_endpoints(&self, m: &FullBranchMap) -> Result<(f64, f64)> {
        let mut lo = self.interval.lo();
        let mut hi = self.interval.hi();
        for &a in &self.itinerary {
            let b = m.branch(a);
            let dom = b.domain();
            lo = b.eval(lo.clamp(dom.lo(), dom.hi()))?;
            hi = b.eval(hi.clamp(dom.lo(), dom.hi()))?;
        }
        Ok((lo, hi))
    }
}

/// The level-`k` cylinders in lexicographic (equivalently spatial) order.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSet {
    pub level: usize,
    pub cylinders: Vec<Cylinder>,
}

fn check_labels(m: &FullBranchMap, word: &[usize]) -> Result<()> {
    match word.iter().find(|&&a| a == 0 || a > m.degree()) {
        Some(a) => Err(Error::Precondition(format!("itinerary symbol {a} outside 1..={}", m.degree()))),
        None => Ok(()),
    }
}

fn check_budget(n: usize, free: usize, budget: u64) -> Result<()> {
    let needed = (n as u128).checked_pow(free as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::Budget { needed, budget });
    }
    Ok(())
}

/// All level-`k` cylinders, within the default budget.
pub fn cylinders(m: &FullBranchMap, k: usize) -> Result<CylinderSet> {
    cylinders_with_prefix(m, k, &[], DEFAULT_BUDGET)
}

/// Level-`k` cylinders whose itinerary starts with `prefix`.
///
/// Endpoints come from composing inverse branches, which contract.
pub fn cylinders_with_prefix(m: &FullBranchMap, k: usize, prefix: &[usize], budget: u64) -> Result<CylinderSet> {
    if k == 0 || prefix.len() > k {
        return Err(Error::Precondition(format!("need 1 <= level and prefix length <= level (k = {k})")));
    }
    check_labels(m, prefix)?;
    let n = m.degree();
    let free = k - prefix.len();
    check_budget(n, free, budget)?;
    // (lo, hi, suffix word)
    let mut level: Vec<(f64, f64, Vec<usize>)> = vec![(0.0, 1.0, Vec::new())];
    for _ in 0..free {
        let mut next = Vec::with_capacity(level.len() * n);
        for a in 1..=n {
            let b = m.branch(a);
            for (lo, hi, word) in &level {
                let mut w = Vec::with_capacity(word.len() + 1);
                w.push(a);
                w.extend_from_slice(word);
                next.push((b.inverse(*lo)?, b.inverse(*hi)?, w));
            }
        }
        level = next;
    }
    let cylinders = level
        .into_par_iter()
        .map(|(mut lo, mut hi, word)| {
            for &a in prefix.iter().rev() {
                let b = m.branch(a);
                lo = b.inverse(lo)?;
                hi = b.inverse(hi)?;
            }
            let mut itinerary = prefix.to_vec();
            itinerary.extend(word);
            Ok(Cylinder { interval: Interval::new(lo, hi)?, itinerary })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CylinderSet { level: k, cylinders })
}

/// `sum_{i<k} log f'(f^i(x))` along the forward orbit of `x`.
pub fn birkhoff_log_deriv(m: &FullBranchMap, x: f64, k: usize) -> Result<f64> {
    let mut x = x;
    let mut acc = 0.0;
    for _ in 0..k {
        let (y, d, _) = m.eval_with_deriv(x)?;
        acc += d.ln();
        x = y.clamp(0.0, 1.0);
    }
    Ok(acc)
}

/// Same sum, but step `i` uses branch `word[i]` (clamping round-off back into its domain).
fn log_deriv_along(m: &FullBranchMap, x: f64, word: &[usize]) -> Result<f64> {
    let mut x = x;
    let mut acc = 0.0;
    for &a in word {
        let b = m.branch(a);
        let dom = b.domain();
        let (y, d) = b.eval_with_deriv(x.clamp(dom.lo(), dom.hi()))?;
        acc += d.ln();
        x = y;
    }
    Ok(acc)
}

/// Position in `[0, 1]` of sample `j`: the two endpoints, then base-2 van der Corput points.
fn sample_fraction(j: usize) -> f64 {
    match j {
        0 => 0.0,
        1 => 1.0,
        _ => {
            let mut i = j - 1;
            let (mut r, mut base) = (0.0, 0.5);
            while i > 0 {
                if i & 1 == 1 {
                    r += base;
                }
                i >>= 1;
                base *= 0.5;
            }
            r
        }
    }
}

/// Oscillation of `log (f^k)'` over `samples` points of one cylinder.
pub fn cylinder_oscillation(m: &FullBranchMap, c: &Cylinder, samples: usize) -> Result<f64> {
    let (lo, hi) = (c.interval.lo(), c.interval.hi());
    let shrink = TAU_INV.min(1e-6 * (hi - lo));
    let (a, b) = (lo + shrink, hi - shrink);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..samples.max(2) {
        let x = a + (b - a) * sample_fraction(j);
        let v = log_deriv_along(m, x, &c.itinerary)?;
        min = min.min(v);
        max = max.max(v);
    }
    Ok(max - min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionOptions {
    pub samples: usize,
    pub budget: u64,
}

impl Default for DistortionOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, budget: DEFAULT_BUDGET }
    }
}

/// `d_k` over the cylinders starting with `prefix`, with the maximizing itinerary.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDistortion {
    pub value: f64,
    pub argmax: Itinerary,
}

pub fn distortion_level_with(
    m: &FullBranchMap,
    k: usize,
    prefix: &[usize],
    opts: &DistortionOptions,
) -> Result<LevelDistortion> {
    if opts.samples < 2 {
        return Err(Error::Precondition("distortion needs at least 2 samples per cylinder".into()));
    }
    let set = cylinders_with_prefix(m, k, prefix, opts.budget)?;
    let osc = set
        .cylinders
        .par_iter()
        .map(|c| cylinder_oscillation(m, c, opts.samples))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, v) in osc.iter().enumerate() {
        if *v > osc[best] {
            best = i;
        }
    }
    Ok(LevelDistortion { value: osc[best], argmax: set.cylinders[best].itinerary.clone() })
}

/// Sampled `d_k` over all level-`k` cylinders.
pub fn distortion_level(m: &FullBranchMap, k: usize, samples: usize) -> Result<f64> {
    Ok(distortion_level_with(m, k, &[], &DistortionOptions { samples, ..Default::default() })?.value)
}

/// Heuristic label for a finite distortion profile; not a proof of either behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    BoundedSoFar,
    Growing,
}

impl Growth {
    pub fn as_str(&self) -> &'static str {
        match self {
            Growth::BoundedSoFar => "bounded-so-far",
            Growth::Growing => "growing",
        }
    }

    /// Growing if `d` rose by more than `tau * d_last` over its last
    /// `ceil(len/3)` levels.
    ///
    /// The rise is relative: a smooth map's profile converges geometrically but
    /// may still move by more in absolute terms than a slowly diverging one.
    pub fn classify(d: &[f64], tau: f64) -> Growth {
        let Some(&last) = d.last() else {
            return Growth::BoundedSoFar;
        };
        if last <= 0.0 {
            return Growth::BoundedSoFar;
        }
        let window = d.len().div_ceil(3);
        let before = if d.len() > window { d[d.len() - 1 - window] } else { 0.0 };
        if last - before > tau * last {
            Growth::Growing
        } else {
            Growth::BoundedSoFar
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    /// `d_1 ..= d_kmax`.
    pub d: Vec<f64>,
    pub samples_per_cylinder: usize,
    pub argmax: Vec<Itinerary>,
    pub classification: Growth,
    pub predicted_lower_bounds: Option<Vec<f64>>,
}

impl DistortionReport {
    /// Rows `k,d_k,argmax_itinerary,predicted_lower_bound` (the last column empty when absent).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,d_k,argmax_itinerary,predicted_lower_bound\n");
        for (i, d) in self.d.iter().enumerate() {
            let pred = self
                .predicted_lower_bounds
                .as_ref()
                .and_then(|p| p.get(i))
                .map(|v| format_sig(*v, 15))
                .unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", i + 1, format_sig(*d, 15), itinerary_string(&self.argmax[i]), pred);
        }
        out
    }
}

pub fn distortion_profile(m: &FullBranchMap, k_max: usize, samples: usize) -> Result<DistortionReport> {
    distortion_profile_with(m, k_max, &[], &DistortionOptions { samples, ..Default::default() }, DEFAULT_TAU_GROWTH)
}

/// `d_1 ..= d_kmax`; levels shorter than `prefix` use the matching prefix of `prefix`.
pub fn distortion_profile_with(
    m: &FullBranchMap,
    k_max: usize,
    prefix: &[usize],
    opts: &DistortionOptions,
    tau_growth: f64,
) -> Result<DistortionReport> {
    // fail before doing any work when the deepest level is out of budget
    check_budget(m.degree(), k_max.saturating_sub(prefix.len()), opts.budget)?;
    let mut d = Vec::with_capacity(k_max);
    let mut argmax = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let p = &prefix[..prefix.len().min(k)];
        let level = distortion_level_with(m, k, p, opts)?;
        d.push(level.value);
        argmax.push(level.argmax);
    }
    let classification = Growth::classify(&d, tau_growth);
    Ok(DistortionReport { d, samples_per_cylinder: opts.samples, argmax, classification, predicted_lower_bounds: None })
}
