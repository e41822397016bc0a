use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::integrate_adaptive;

/// The shape of a modulus of continuity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusKind {
    /// `t^alpha`, Dini-integrable for every `alpha > 0`.
    Holder { alpha: f64 },
    /// `1 / (c - ln t)`, not Dini-integrable.
    LogReciprocal { c: f64 },
    /// `1 / (c - ln t)^2`, Dini-integrable. Concave only while `c - ln t >= 3`,
    /// see [`Modulus::concave_up_to`].
    LogSquared { c: f64 },
}

/// A concave, nondecreasing modulus of continuity with `omega(0) = 0`, clamped at `cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulusDoc", into = "ModulusDoc")]
pub struct Modulus {
    kind: ModulusKind,
    cap: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModulusDoc {
    Holder {
        alpha: f64,
        #[serde(default = "default_cap")]
        cap: f64,
    },
    LogReciprocal {
        c: f64,
        #[serde(default = "default_cap")]
        cap: f64,
    },
    LogSquared {
        c: f64,
        #[serde(default = "default_cap")]
        cap: f64,
    },
}

fn default_cap() -> f64 {
    Modulus::DEFAULT_CAP
}

impl TryFrom<ModulusDoc> for Modulus {
    type Error = Error;
    fn try_from(doc: ModulusDoc) -> Result<Self> {
        match doc {
            ModulusDoc::Holder { alpha, cap } => Modulus::with_cap(ModulusKind::Holder { alpha }, cap),
            ModulusDoc::LogReciprocal { c, cap } => Modulus::with_cap(ModulusKind::LogReciprocal { c }, cap),
            ModulusDoc::LogSquared { c, cap } => Modulus::with_cap(ModulusKind::LogSquared { c }, cap),
        }
    }
}

impl From<Modulus> for ModulusDoc {
    fn from(m: Modulus) -> Self {
        let cap = m.cap;
        match m.kind {
            ModulusKind::Holder { alpha } => ModulusDoc::Holder { alpha, cap },
            ModulusKind::LogReciprocal { c } => ModulusDoc::LogReciprocal { c, cap },
            ModulusKind::LogSquared { c } => ModulusDoc::LogSquared { c, cap },
        }
    }
}

impl Modulus {
    pub const DEFAULT_CAP: f64 = 1.0;

    pub fn new(kind: ModulusKind) -> Result<Self> {
        Self::with_cap(kind, Self::DEFAULT_CAP)
    }

    pub fn with_cap(kind: ModulusKind, cap: f64) -> Result<Self> {
        let ok = match kind {
            ModulusKind::Holder { alpha } => alpha > 0.0 && alpha <= 1.0,
            ModulusKind::LogReciprocal { c } | ModulusKind::LogSquared { c } => c >= 2.0 && c.is_finite(),
        };
        if !ok {
            return Err(Error::Precondition(format!("modulus parameters out of range: {kind:?}")));
        }
        if !(cap > 0.0) {
            return Err(Error::Precondition(format!("modulus cap must be positive, got {cap}")));
        }
        Ok(Self { kind, cap })
    }

    pub fn holder(alpha: f64) -> Result<Self> {
        Self::new(ModulusKind::Holder { alpha })
    }

    pub fn log_reciprocal(c: f64) -> Result<Self> {
        Self::new(ModulusKind::LogReciprocal { c })
    }

    pub fn log_squared(c: f64) -> Result<Self> {
        Self::new(ModulusKind::LogSquared { c })
    }

    pub fn kind(&self) -> ModulusKind {
        self.kind
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Right end of the interval `[0, t*]` on which `omega` is concave.
    ///
    /// `1` except for `LogSquared`, whose second derivative has the sign of
    /// `3 - (c - ln t)`, giving `t* = e^(c-3)` when `c < 3`.
    pub fn concave_up_to(&self) -> f64 {
        match self.kind {
            ModulusKind::LogSquared { c } if c < 3.0 => (c - 3.0).exp(),
            _ => 1.0,
        }
    }

    /// `omega(t)`; zero for `t <= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        let raw = match self.kind {
            ModulusKind::Holder { alpha } => t.powf(alpha),
            ModulusKind::LogReciprocal { c } => 1.0 / (c - t.ln()),
            ModulusKind::LogSquared { c } => {
                let l = c - t.ln();
                1.0 / (l * l)
            }
        };
        raw.min(self.cap)
    }

    /// `int_delta^1 omega(t)/t dt`, computed in the variable `s = -ln t` where the
    /// integrand `omega(e^{-s})` is smooth.
    pub fn dini_tail(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Precondition(format!("dini_tail needs delta in (0, 1), got {delta}")));
        }
        let upper = -delta.ln();
        let q = integrate_adaptive(|s: f64| self.eval((-s).exp()), 0.0, upper, 1e-14, 1e-11, 4000);
        Ok(q.value)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ModulusKind::Holder { alpha } => write!(f, "holder:{alpha}"),
            ModulusKind::LogReciprocal { c } => write!(f, "log:{c}"),
            ModulusKind::LogSquared { c } => write!(f, "logsq:{c}"),
        }
    }
}

/// Parses `holder:<alpha>`, `log:<c>` or `logsq:<c>`.
impl FromStr for Modulus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("modulus `{s}` must look like `log:2`")))?;
        let value: f64 = param
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad modulus parameter `{param}`")))?;
        match name.trim() {
            "holder" => Modulus::holder(value),
            "log" => Modulus::log_reciprocal(value),
            "logsq" => Modulus::log_squared(value),
            other => Err(Error::Parse(format!("unknown modulus kind `{other}`"))),
        }
    }
}
