//! JSON map documents, number formatting and the JSON writer used for every output file.
//!
//! Floats are written with 17 significant digits so that every document
//! re-loads to the same bits and re-serializes to the same bytes.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::branch::{Branch, Interval, Representation};
use crate::error::{Error, Result};
use crate::extension::{ExtendedInverse, PartialMapSpec};
use crate::map::{CircleC1, FullBranchMap};
use crate::perturbation::{build_perturbed_branch_unchecked, Modulus, PerturbationConfig};

/// Significant digits used for floats in JSON output.
pub const JSON_SIG_DIGITS: usize = 17;

/// Formats `v` with exactly `sig` significant digits, positional for moderate exponents.
pub fn format_sig(v: f64, sig: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return format!("{mantissa}e{exp}");
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if exp >= 0 {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{sign}{}{}", digits, "0".repeat(split - digits.len()))
        } else {
            format!("{sign}{}.{}", &digits[..split], &digits[split..])
        }
    } else {
        format!("{sign}0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    }
}

/// Pretty-prints a JSON value with floats at [`JSON_SIG_DIGITS`] digits.
pub fn write_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

/// Serializes `value` and prints it with [`write_json`].
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    Ok(write_json(&serde_json::to_value(value)?))
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => out.push_str(&i.to_string()),
            (_, Some(u), _) => out.push_str(&u.to_string()),
            (_, _, Some(f)) => out.push_str(&format_sig(f, JSON_SIG_DIGITS)),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                push_indent(indent + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// On-disk form of a [`FullBranchMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub degree: usize,
    pub partition: Vec<f64>,
    pub branches: Vec<BranchDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle_c1: Option<String>,
}

/// On-disk form of a [`PartialMapSpec`]: `degree - 1` branches plus the missing label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub degree: usize,
    pub partition: Vec<f64>,
    pub missing_index: usize,
    pub branches: Vec<BranchDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BranchDocument {
    Affine {
        slope: f64,
        intercept: f64,
    },
    SinePerturbed {
        slope: f64,
        amplitude: f64,
        frequency: f64,
    },
    Tabulated {
        x: Vec<f64>,
        y: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dy: Option<Vec<f64>>,
    },
    Extended {
        spec: SpecDocument,
    },
    Perturbed {
        base: Box<BranchDocument>,
        epsilon: f64,
        modulus: Modulus,
        v0_radius: f64,
        blend_width: f64,
        compensation_window: [f64; 2],
    },
}

impl BranchDocument {
    pub fn from_branch(b: &Branch) -> Self {
        match b.representation() {
            Representation::Affine { slope, intercept } => {
                BranchDocument::Affine { slope: *slope, intercept: *intercept }
            }
            Representation::SinePerturbed { slope, amplitude, frequency } => {
                BranchDocument::SinePerturbed { slope: *slope, amplitude: *amplitude, frequency: *frequency }
            }
            Representation::Tabulated(c) => BranchDocument::Tabulated {
                x: c.xs().to_vec(),
                y: c.ys().to_vec(),
                dy: Some(c.slopes().to_vec()),
            },
            Representation::Extended(e) => BranchDocument::Extended { spec: SpecDocument::from_spec(e.spec()) },
            Representation::Perturbed(p) => {
                let cfg = p.config();
                BranchDocument::Perturbed {
                    base: Box::new(BranchDocument::from_branch(p.base())),
                    epsilon: cfg.epsilon,
                    modulus: cfg.modulus,
                    v0_radius: cfg.v0_radius,
                    blend_width: cfg.blend_width,
                    compensation_window: [cfg.compensation_window.lo(), cfg.compensation_window.hi()],
                }
            }
        }
    }

    pub fn to_branch(&self, domain: Interval) -> Result<Branch> {
        Ok(match self {
            BranchDocument::Affine { slope, intercept } => Branch::affine(domain, *slope, *intercept),
            BranchDocument::SinePerturbed { slope, amplitude, frequency } => {
                Branch::sine_perturbed(domain, *slope, *amplitude, *frequency)
            }
            BranchDocument::Tabulated { x, y, dy } => {
                let b = Branch::tabulated(x.clone(), y.clone(), dy.clone())?;
                check_domain(&b, domain)?;
                b
            }
            BranchDocument::Extended { spec } => {
                let spec = spec.to_spec()?;
                let ext = ExtendedInverse::new(spec);
                let b = Branch::from_parts(ext.spec().missing_domain(), Representation::Extended(ext));
                check_domain(&b, domain)?;
                b
            }
            BranchDocument::Perturbed { base, epsilon, modulus, v0_radius, blend_width, compensation_window } => {
                let base = base.to_branch(domain)?;
                let cfg = PerturbationConfig {
                    epsilon: *epsilon,
                    modulus: *modulus,
                    v0_radius: *v0_radius,
                    blend_width: *blend_width,
                    compensation_window: Interval::new(compensation_window[0], compensation_window[1])?,
                };
                build_perturbed_branch_unchecked(&base, &cfg)?
            }
        })
    }
}

fn check_domain(b: &Branch, domain: Interval) -> Result<()> {
    let d = b.domain();
    if (d.lo() - domain.lo()).abs() > 1e-12 || (d.hi() - domain.hi()).abs() > 1e-12 {
        return Err(Error::InvalidMap(format!(
            "{} branch covers [{}, {}] but the partition gives [{}, {}]",
            b.kind_name(),
            d.lo(),
            d.hi(),
            domain.lo(),
            domain.hi()
        )));
    }
    Ok(())
}

fn partition_intervals(partition: &[f64]) -> Result<Vec<Interval>> {
    partition.windows(2).map(|w| Interval::new(w[0], w[1])).collect()
}

impl MapDocument {
    pub fn from_map(m: &FullBranchMap) -> Self {
        MapDocument {
            degree: m.degree(),
            partition: m.partition(),
            branches: m.branches().iter().map(BranchDocument::from_branch).collect(),
            sigma: m.sigma(),
            circle_c1: Some(m.circle_c1().as_str().to_string()),
        }
    }

    pub fn to_map(&self) -> Result<FullBranchMap> {
        if self.partition.len() != self.degree + 1 || self.branches.len() != self.degree {
            return Err(Error::InvalidMap(format!(
                "degree {} needs {} partition points and {} branches (got {} and {})",
                self.degree,
                self.degree + 1,
                self.degree,
                self.partition.len(),
                self.branches.len()
            )));
        }
        let domains = partition_intervals(&self.partition)?;
        let branches =
            self.branches.iter().zip(domains).map(|(b, d)| b.to_branch(d)).collect::<Result<Vec<_>>>()?;
        let flag = match &self.circle_c1 {
            Some(s) => CircleC1::parse(s)?,
            None => CircleC1::Unchecked,
        };
        Ok(FullBranchMap::new(branches)?.with_sigma(self.sigma).with_circle_c1(flag))
    }
}

impl SpecDocument {
    pub fn from_spec(spec: &PartialMapSpec) -> Self {
        SpecDocument {
            degree: spec.degree(),
            partition: spec.partition().to_vec(),
            missing_index: spec.missing_index(),
            branches: spec.branches().iter().map(BranchDocument::from_branch).collect(),
        }
    }

    pub fn to_spec(&self) -> Result<PartialMapSpec> {
        if self.partition.len() != self.degree + 1 || self.branches.len() + 1 != self.degree {
            return Err(Error::InvalidMap(format!(
                "degree {} needs {} partition points and {} known branches",
                self.degree,
                self.degree + 1,
                self.degree.saturating_sub(1)
            )));
        }
        if self.missing_index == 0 || self.missing_index > self.degree {
            return Err(Error::InvalidMap(format!("missing index {} outside 1..={}", self.missing_index, self.degree)));
        }
        let domains = partition_intervals(&self.partition)?;
        let branches = domains
            .into_iter()
            .enumerate()
            .filter(|(i, _)| i + 1 != self.missing_index)
            .zip(&self.branches)
            .map(|((_, d), b)| b.to_branch(d))
            .collect::<Result<Vec<_>>>()?;
        PartialMapSpec::new(self.partition.clone(), self.missing_index, branches)
    }
}

pub fn map_to_json(m: &FullBranchMap) -> Result<String> {
    to_json_string(&MapDocument::from_map(m))
}

pub fn map_from_json(text: &str) -> Result<FullBranchMap> {
    serde_json::from_str::<MapDocument>(text)?.to_map()
}

pub fn spec_to_json(spec: &PartialMapSpec) -> Result<String> {
    to_json_string(&SpecDocument::from_spec(spec))
}

pub fn spec_from_json(text: &str) -> Result<PartialMapSpec> {
    serde_json::from_str::<SpecDocument>(text)?.to_spec()
}
