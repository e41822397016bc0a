use std::fmt::Write as _;

use serde::Serialize;

use super::{perturb_map, predicted_lower_bound, LowerBoundParams, Modulus, Perturbation, PerturbationConfig};
use crate::branch::Interval;
use crate::distortion::{birkhoff_log_deriv, distortion_level_with, DistortionOptions, DistortionReport, Growth};
use crate::distortion::{DEFAULT_SAMPLES, DEFAULT_TAU_GROWTH};
use crate::error::{Error, Result};
use crate::extension::DEFAULT_DELTA_UNIFORM;
use crate::io::format_sig;
use crate::map::FullBranchMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoOptions {
    pub samples: usize,
    pub delta_uniform: f64,
    pub tau_growth: f64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, delta_uniform: DEFAULT_DELTA_UNIFORM, tau_growth: DEFAULT_TAU_GROWTH }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoRow {
    pub k: usize,
    /// `|log (f^k)'(x_k) - log (f^k)'(0)|` with `x_k` the `k`-th first-branch preimage of `x0`.
    pub measured_pair_bound: f64,
    /// Sampled `d_k` over the leftmost cylinder `[0, r_k]`.
    pub leftmost_cylinder_dk: f64,
    pub predicted_lower_bound: f64,
}

/// Everything needed to rerun an experiment, written next to its CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub epsilon: f64,
    pub modulus: Modulus,
    pub v0_radius: f64,
    pub blend_width: f64,
    pub compensation_window: Interval,
    pub k_max: usize,
    pub samples: usize,
    pub delta_uniform: f64,
    pub x0: f64,
    pub sigma_hat: f64,
    pub orbit_constant: f64,
}

#[derive(Debug, Clone)]
pub struct UnboundedDemo {
    pub rows: Vec<DemoRow>,
    /// Leftmost-cylinder distortion with the predicted bounds attached.
    pub report: DistortionReport,
    pub perturbation: Perturbation,
    pub config: ExperimentConfig,
}

impl UnboundedDemo {
    /// Rows `k,measured_pair_bound,leftmost_cylinder_dk,predicted_lower_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,measured_pair_bound,leftmost_cylinder_dk,predicted_lower_bound\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.k,
                format_sig(r.measured_pair_bound, 15),
                format_sig(r.leftmost_cylinder_dk, 15),
                format_sig(r.predicted_lower_bound, 15)
            );
        }
        out
    }

    pub fn measured(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.measured_pair_bound).collect()
    }

    pub fn predicted(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.predicted_lower_bound).collect()
    }
}

pub fn unbounded_demo(m: &FullBranchMap, cfg: &PerturbationConfig, k_max: usize) -> Result<UnboundedDemo> {
    unbounded_demo_with(m, cfg, k_max, &DemoOptions::default())
}

/// Perturbs `m` and follows the orbit `x_k = f_1^{-k}(x0)` into the fixed point,
/// recording the log-derivative gap to the fixed point for `k = 1..=k_max`.
///
/// `x0` is the midpoint of `V0`; the lower-bound constants are the certified
/// expansion of the perturbed map and `C = v0_radius`.
pub fn unbounded_demo_with(
    m: &FullBranchMap,
    cfg: &PerturbationConfig,
    k_max: usize,
    opts: &DemoOptions,
) -> Result<UnboundedDemo> {
    if k_max == 0 {
        return Err(Error::Precondition("k_max must be at least 1".into()));
    }
    let perturbation = perturb_map(m, cfg, opts.delta_uniform)?;
    let map = &perturbation.map;
    let sigma_hat = map.sigma().expect("assembled maps are certified");
    let params = LowerBoundParams::new(sigma_hat, cfg.v0_radius.min(1.0))?;
    let first = map.branch(1);
    let x0 = first.domain().lo() + 0.5 * cfg.v0_radius;
    let dist_opts = DistortionOptions { samples: opts.samples, ..Default::default() };

    let mut rows = Vec::with_capacity(k_max);
    let mut argmax = Vec::with_capacity(k_max);
    let mut xk = x0;
    for k in 1..=k_max {
        xk = first.inverse(xk)?;
        let measured = (birkhoff_log_deriv(map, xk, k)? - birkhoff_log_deriv(map, 0.0, k)?).abs();
        let leftmost = distortion_level_with(map, k, &vec![1; k], &dist_opts)?;
        rows.push(DemoRow {
            k,
            measured_pair_bound: measured,
            leftmost_cylinder_dk: leftmost.value,
            predicted_lower_bound: predicted_lower_bound(&params, &cfg.modulus, k),
        });
        argmax.push(leftmost.argmax);
    }
    let d: Vec<f64> = rows.iter().map(|r| r.leftmost_cylinder_dk).collect();
    let report = DistortionReport {
        classification: Growth::classify(&d, opts.tau_growth),
        d,
        samples_per_cylinder: opts.samples,
        argmax,
        predicted_lower_bounds: Some(rows.iter().map(|r| r.predicted_lower_bound).collect()),
    };
    let config = ExperimentConfig {
        epsilon: cfg.epsilon,
        modulus: cfg.modulus,
        v0_radius: cfg.v0_radius,
        blend_width: cfg.blend_width,
        compensation_window: cfg.compensation_window,
        k_max,
        samples: opts.samples,
        delta_uniform: opts.delta_uniform,
        x0,
        sigma_hat,
        orbit_constant: params.c,
    };
    Ok(UnboundedDemo { rows, report, perturbation, config })
}
