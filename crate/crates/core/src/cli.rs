//! The `circlemap` command line front end.
//!
//! Exit codes: 0 on success, 1 on validation or precondition failure, 2 when
//! input cannot be read or parsed, 3 when a cylinder budget is exceeded.
//! Failures print a JSON error object on standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::branch::Interval;
use crate::distortion::{distortion_profile_with, DistortionOptions, DEFAULT_BUDGET, DEFAULT_SAMPLES, DEFAULT_TAU_GROWTH};
use crate::error::{Error, Result};
use crate::extension::{assemble_circle_map, c1_matching_report, condition_one_margin, DEFAULT_CONDITION_GRID};
use crate::extension::{DEFAULT_DELTA_UNIFORM, TAU_MATCH};
use crate::io::{map_from_json, map_to_json, spec_from_json, to_json_string, write_json};
use crate::map::{FullBranchMap, ValidationOptions, DEFAULT_SIGMA_MIN, TAU_BRANCH};
use crate::perturbation::{perturb_map, unbounded_demo_with, DemoOptions, Modulus, PerturbationConfig};
use crate::transfer::{invariance_defect, pullback_measure_defect, transfer_of_constant, DEFAULT_DENSITY_NODES};

#[derive(Debug, Parser)]
#[command(name = "circlemap", version, about = "Lebesgue-preserving expanding circle maps")]
pub struct Cli {
    /// Accepted for scripts that ask for it; every command is deterministic regardless.
    #[arg(long, global = true)]
    pub seedless: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check tiling, endpoints, expansion and derivative continuity of a map.
    Validate(ValidateArgs),
    /// Build the missing branch of a partial map and write the assembled map.
    Extend(ExtendArgs),
    /// Report the transfer-operator and pullback invariance defects of a map.
    CheckInvariance(InvarianceArgs),
    /// Write the distortion profile d_1..d_kmax as CSV.
    Distortion(DistortionArgs),
    /// Perturb the first branch near 0 and re-extend the last branch.
    Perturb(PerturbArgs),
    /// Run the distortion-growth experiment on a perturbed map.
    DemoUnbounded(DemoArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (standard output when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Map JSON file.
    pub input: PathBuf,
    /// Grid points per branch.
    #[arg(long, default_value_t = 10_000)]
    pub grid: usize,
    /// Required lower bound on every derivative.
    #[arg(long, default_value_t = DEFAULT_SIGMA_MIN)]
    pub sigma_min: f64,
    /// Endpoint and tiling tolerance.
    #[arg(long, default_value_t = TAU_BRANCH)]
    pub tau_branch: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    /// Partial map JSON file (`degree`, `partition`, `missing_index`, `branches`).
    pub input: PathBuf,
    /// Required margin of the missing-branch condition.
    #[arg(long, default_value_t = DEFAULT_DELTA_UNIFORM)]
    pub delta: f64,
    /// Optional JSON report with the margin and the matching check.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct InvarianceArgs {
    /// Map JSON file.
    pub input: PathBuf,
    /// Density grid nodes.
    #[arg(long, default_value_t = DEFAULT_DENSITY_NODES)]
    pub nodes: usize,
    /// Number of intervals [j/K, (j+1)/K] and [0, j/K] for the pullback check.
    #[arg(long, default_value_t = 64)]
    pub intervals: usize,
    /// Also write P1 as `x,value` CSV.
    #[arg(long)]
    pub density_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct DistortionArgs {
    /// Map JSON file.
    pub input: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
    /// Samples per cylinder, endpoints included.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Only cylinders whose itinerary starts with this comma-separated word.
    #[arg(long, value_delimiter = ',')]
    pub prefix: Vec<usize>,
    /// Largest number of cylinders per level.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Relative rise over the last third of the levels that counts as growing.
    #[arg(long, default_value_t = DEFAULT_TAU_GROWTH)]
    pub tau_growth: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct PerturbationArgs {
    #[arg(long)]
    pub epsilon: f64,
    /// `holder:<alpha>`, `log:<c>` or `logsq:<c>`.
    #[arg(long, default_value = "log:2")]
    pub modulus: Modulus,
    /// Radius of V0 (default: a fifth of the first branch).
    #[arg(long)]
    pub v0_radius: Option<f64>,
    /// Width of the blend after V0 (default: a tenth of the first branch).
    #[arg(long)]
    pub blend_width: Option<f64>,
    /// Compensation window `a,b` (default: 50% to 90% of the first branch).
    #[arg(long, value_delimiter = ',', value_name = "A,B")]
    pub window: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_DELTA_UNIFORM)]
    pub delta: f64,
}

impl PerturbationArgs {
    fn config(&self, m: &FullBranchMap) -> Result<PerturbationConfig> {
        let mut cfg = PerturbationConfig::for_domain(m.branch(1).domain(), self.epsilon, self.modulus);
        if let Some(r) = self.v0_radius {
            cfg.v0_radius = r;
        }
        if let Some(b) = self.blend_width {
            cfg.blend_width = b;
        }
        if let Some(w) = &self.window {
            let [a, b] = w[..] else {
                return Err(Error::Precondition(format!("--window takes two values a,b, got {}", w.len())));
            };
            cfg.compensation_window = Interval::new(a, b)?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Map JSON file.
    pub input: PathBuf,
    #[command(flatten)]
    pub perturbation: PerturbationArgs,
    /// Optional JSON report with the measured C¹ distance.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Map JSON file.
    pub input: PathBuf,
    #[command(flatten)]
    pub perturbation: PerturbationArgs,
    #[arg(long, default_value_t = 40)]
    pub kmax: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Experiment config JSON (default: next to `--output` with a `.json` extension).
    #[arg(long)]
    pub config_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: Output,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(stdout, "{e}");
            } else {
                let _ = write!(stderr, "{e}");
            }
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e, stderr);
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => 2,
        Error::Budget { .. } => 3,
        _ => 1,
    }
}

fn report_error(e: &Error, stderr: &mut dyn Write) {
    let body = json!({ "error": e.kind(), "message": e.to_string() });
    let _ = stderr.write_all(write_json(&body).as_bytes());
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn load_map(path: &Path) -> Result<FullBranchMap> {
    map_from_json(&read(path)?)
}

fn emit(out: &Output, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &out.output {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct InvarianceReport {
    nodes: usize,
    invariance_defect: f64,
    pullback_intervals: usize,
    pullback_measure_defect: f64,
}

#[derive(Serialize)]
struct ExtendReport {
    condition_margin: f64,
    matching: crate::extension::MatchingReport,
}

#[derive(Serialize)]
struct PerturbReport {
    epsilon: f64,
    c1_distance: f64,
    kappa: f64,
    invariance_defect: f64,
    sigma: Option<f64>,
}

fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Validate(a) => {
            let m = load_map(&a.input)?;
            let opts = ValidationOptions {
                grid_size: a.grid,
                sigma_min: a.sigma_min,
                tau_branch: a.tau_branch,
                ..ValidationOptions::default()
            };
            let report = m.validate(&opts);
            emit(&a.out, &to_json_string(&report)?, stdout)?;
            if !report.passed {
                return Err(Error::InvalidMap(report.failures.join("; ")));
            }
            Ok(0)
        }
        Command::Extend(a) => {
            let spec = spec_from_json(&read(&a.input)?)?;
            let m = assemble_circle_map(&spec, a.delta)?;
            emit(&a.out, &map_to_json(&m)?, stdout)?;
            if let Some(path) = &a.report {
                let report = ExtendReport {
                    condition_margin: condition_one_margin(&spec, DEFAULT_CONDITION_GRID)?,
                    matching: c1_matching_report(&m, Some(spec.missing_index()), TAU_MATCH)?,
                };
                fs::write(path, to_json_string(&report)?)?;
            }
            Ok(0)
        }
        Command::CheckInvariance(a) => {
            let m = load_map(&a.input)?;
            let k = a.intervals.max(1);
            let mut intervals = Vec::with_capacity(2 * k);
            for j in 0..k {
                intervals.push(Interval::new(j as f64 / k as f64, (j + 1) as f64 / k as f64)?);
                intervals.push(Interval::new(0.0, (j + 1) as f64 / k as f64)?);
            }
            let report = InvarianceReport {
                nodes: a.nodes,
                invariance_defect: invariance_defect(&m, a.nodes)?,
                pullback_intervals: intervals.len(),
                pullback_measure_defect: pullback_measure_defect(&m, &intervals)?,
            };
            if let Some(path) = &a.density_out {
                fs::write(path, transfer_of_constant(&m, a.nodes)?.to_csv())?;
            }
            emit(&a.out, &to_json_string(&report)?, stdout)?;
            Ok(0)
        }
        Command::Distortion(a) => {
            let m = load_map(&a.input)?;
            let opts = DistortionOptions { samples: a.samples, budget: a.budget };
            let report = distortion_profile_with(&m, a.kmax, &a.prefix, &opts, a.tau_growth)?;
            emit(&a.out, &report.to_csv(), stdout)?;
            Ok(0)
        }
        Command::Perturb(a) => {
            let m = load_map(&a.input)?;
            let cfg = a.perturbation.config(&m)?;
            let p = perturb_map(&m, &cfg, a.perturbation.delta)?;
            emit(&a.out, &map_to_json(&p.map)?, stdout)?;
            if let Some(path) = &a.report {
                let report = PerturbReport {
                    epsilon: cfg.epsilon,
                    c1_distance: p.c1_distance,
                    kappa: p.kappa,
                    invariance_defect: invariance_defect(&p.map, DEFAULT_DENSITY_NODES)?,
                    sigma: p.map.sigma(),
                };
                fs::write(path, to_json_string(&report)?)?;
            }
            Ok(0)
        }
        Command::DemoUnbounded(a) => {
            let m = load_map(&a.input)?;
            let cfg = a.perturbation.config(&m)?;
            let opts = DemoOptions { samples: a.samples, delta_uniform: a.perturbation.delta, ..DemoOptions::default() };
            let demo = unbounded_demo_with(&m, &cfg, a.kmax, &opts)?;
            emit(&a.out, &demo.to_csv(), stdout)?;
            let config_path = a.config_out.clone().or_else(|| a.out.output.as_ref().map(|p| p.with_extension("json")));
            if let Some(path) = config_path {
                fs::write(path, to_json_string(&demo.config)?)?;
            }
            Ok(0)
        }
    }
}
