//! Lebesgue-preserving expanding circle maps.
//!
//! A degree-`n` expanding circle map is handled as a full-branch map of
//! `[0, 1]`: `n` increasing expanding branches, each onto `[0, 1]`, on
//! adjacent intervals. The crate
//!
//! * builds the unique missing branch that makes a partial map preserve
//!   Lebesgue measure, and checks the C¹ matching at the partition points
//!   ([`extension`]);
//! * evaluates the transfer operator and measures invariance defects
//!   ([`transfer`]);
//! * enumerates cylinders and estimates the distortion `d_k` ([`distortion`]);
//! * perturbs a map by a non-Dini modulus of continuity near its fixed point
//!   and tracks the resulting distortion growth ([`perturbation`]).
//!
//! Branch labels, itinerary symbols and the missing-branch index are 1-based.
//!
//! ```
//! use lebesgue_circle::{extension, transfer, Branch, Interval, PartialMapSpec};
//!
//! let known = Branch::sine_perturbed(Interval::new(0.0, 0.5)?, 2.0, 0.1, 1.0);
//! let spec = PartialMapSpec::new(vec![0.0, 0.5, 1.0], 2, vec![known])?;
//! let map = extension::assemble_circle_map(&spec, 1e-3)?;
//! assert!(transfer::invariance_defect(&map, 1000)? < 1e-12);
//! # Ok::<(), lebesgue_circle::Error>(())
//! ```

pub mod branch;
pub mod cli;
pub mod distortion;
pub mod error;
pub mod extension;
pub mod io;
pub mod map;
pub mod numerics;
pub mod perturbation;
pub mod transfer;

pub use branch::{Branch, Interval, Representation};
pub use error::{Error, Result};
pub use extension::{ExtendedInverse, MatchingReport, PartialMapSpec};
pub use map::{CircleC1, FullBranchMap, ValidationOptions, ValidationReport};
pub use perturbation::{Modulus, ModulusKind, PerturbationConfig};
