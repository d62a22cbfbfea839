//! Fully adaptive (ε,δ)-best-arm identification in linear bandits.
//!
//! The crate implements LinGapE — a gap-based elimination-free algorithm that
//! adaptively picks which arm to pull from confidence bounds on pairwise
//! reward gaps — together with the static/adaptive/oracle XY-allocation
//! baselines it is usually compared against, exact sample-complexity
//! calculators for problem instances, and a seeded benchmark harness that
//! reruns the standard experiment suites and writes machine-readable
//! summaries.
//!
//! Layout:
//! - [`linalg`]: regularised design matrix with a maintained inverse.
//! - [`model`]: arm sets, reward models, canonical and data-derived instances.
//! - [`estimator`]: least-squares estimate and the confidence widths.
//! - [`allocation`]: L1-optimal pull ratios and the arm-selection rules.
//! - [`algorithms`]: the LinGapE loop and the three baseline runners.
//! - [`complexity`]: gap/complexity quantities and sample-size bounds.
//! - [`bench`]: experiment configs, campaigns, and reproduction presets.

pub mod algorithms;
pub mod allocation;
pub mod bench;
pub mod complexity;
pub mod estimator;
mod error;
pub mod linalg;
pub mod model;
mod simplex;

pub use error::{Error, Result};
