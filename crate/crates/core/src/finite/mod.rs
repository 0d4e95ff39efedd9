//! Fully sequential PAC algorithms for finite instances.

mod f2;
mod lucb;
mod median;
mod partition;

pub use f2::f2;
pub use lucb::lucb_km;
pub use median::{median_elimination, MedianOutcome};
pub use partition::{partition, Partition};

use serde::{Deserialize, Serialize};

use crate::bounds::SchemeKind;
use crate::error::{Error, Result};

/// Which member of the top set is certified by the stopping rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HStarMode {
    /// The top-set arm with the lowest lower bound.
    #[default]
    Argmin,
    /// The top-set arm with the highest lower bound.
    Argmax,
}

impl HStarMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            HStarMode::Argmin => "argmin",
            HStarMode::Argmax => "argmax",
        }
    }
}

impl std::str::FromStr for HStarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "argmin" => Ok(HStarMode::Argmin),
            "argmax" => Ok(HStarMode::Argmax),
            other => Err(Error::usage(format!("unknown h-star mode `{other}`"))),
        }
    }
}

/// Knobs shared by the fully sequential algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequentialOptions {
    pub scheme: SchemeKind,
    pub h_star: HStarMode,
    /// Abort with [`Error::BudgetExhausted`] once this many samples are spent.
    pub max_samples: Option<u64>,
}

impl SequentialOptions {
    pub fn new(scheme: SchemeKind) -> Self {
        Self {
            scheme,
            h_star: HStarMode::default(),
            max_samples: None,
        }
    }
}

/// Outcome of one run of a fully sequential algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Returned arm indices.
    pub returned: Vec<usize>,
    pub total_samples: u64,
    /// Pull count of every arm.
    pub pulls: Vec<u64>,
    /// Pulls spent on the true top-k, ranks k+1..=m, and the rest.
    pub pulls_by_group: [u64; 3],
    /// Loop iterations after the initial pull of every arm.
    pub rounds: u64,
    pub seed: u64,
    pub scheme: SchemeKind,
    /// `ucb(l*) − lcb(h*)` when the stopping rule fired.
    pub stop_gap: f64,
}

pub(crate) fn check_finite_params(n: usize, k: usize, m: usize, eps: f64, delta: f64) -> Result<()> {
    if k < 1 || k > m || m >= n {
        return Err(Error::usage(format!(
            "need 1 <= k <= m < n, got k={k}, m={m}, n={n}"
        )));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::usage(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::usage(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}
