use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bandit::{make_linear_instance, make_lower_bound_instance, FiniteBandit};
use crate::bounds::SchemeKind;
use crate::error::{Error, Result};
use crate::finite::HStarMode;
use crate::instance_file::{read_instance_file, InstanceDescription};
use crate::reservoir::{ArmReservoir, MeanLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LucbKm,
    F2,
    P3,
    Kqp1,
    OptQp,
    KIndependentQp,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::LucbKm => "lucb_km",
            Algorithm::F2 => "f2",
            Algorithm::P3 => "p3",
            Algorithm::Kqp1 => "kqp1",
            Algorithm::OptQp => "opt_qp",
            Algorithm::KIndependentQp => "k_independent_qp",
        }
    }

    /// Whether the algorithm works on a reservoir rather than a finite set.
    pub fn is_quantile(&self) -> bool {
        !matches!(self, Algorithm::LucbKm | Algorithm::F2)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lucb_km" => Algorithm::LucbKm,
            "f2" => Algorithm::F2,
            "p3" => Algorithm::P3,
            "kqp1" => Algorithm::Kqp1,
            "opt_qp" => Algorithm::OptQp,
            "k_independent_qp" => Algorithm::KIndependentQp,
            other => return Err(Error::usage(format!("unknown algorithm `{other}`"))),
        })
    }
}

/// Finite solver plugged into `opt_qp`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    LucbKm,
    F2,
}

/// Where the arms of an experiment come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    /// `n` means spaced linearly from 0.999 down to 0.001.
    Linear { n: usize },
    /// The lower-bound family: `set` lists the raised arms.
    LowerBound {
        n: usize,
        m: usize,
        k: usize,
        eps: f64,
        set: Vec<usize>,
    },
    /// Explicit Bernoulli means.
    Means { means: Vec<f64> },
    /// `good` of `arms` equiprobable arms at `good_mean`, the rest at `bad_mean`.
    TwoLevel {
        arms: usize,
        good: usize,
        good_mean: f64,
        bad_mean: f64,
    },
    /// Continuous reservoir with means uniform on `[lo, hi]`.
    UniformMeans { lo: f64, hi: f64 },
    /// Instance file; relative paths resolve against the config file.
    File { path: PathBuf },
}

#[derive(Debug, Clone)]
pub enum BuiltInstance {
    Finite(FiniteBandit),
    Reservoir(ArmReservoir),
}

impl InstanceSpec {
    pub fn build(&self) -> Result<BuiltInstance> {
        Ok(match self {
            InstanceSpec::Linear { n } => BuiltInstance::Finite(make_linear_instance(*n)?),
            InstanceSpec::LowerBound { n, m, k, eps, set } => {
                BuiltInstance::Finite(make_lower_bound_instance(*n, *m, *k, *eps, set)?)
            }
            InstanceSpec::Means { means } => BuiltInstance::Finite(FiniteBandit::bernoulli(means)?),
            InstanceSpec::TwoLevel {
                arms,
                good,
                good_mean,
                bad_mean,
            } => BuiltInstance::Reservoir(ArmReservoir::two_level(*arms, *good, *good_mean, *bad_mean)?),
            InstanceSpec::UniformMeans { lo, hi } => {
                BuiltInstance::Reservoir(ArmReservoir::continuous(MeanLaw::uniform(*lo, *hi)?))
            }
            InstanceSpec::File { path } => match read_instance_file(path)? {
                InstanceDescription::Finite(b) => BuiltInstance::Finite(b),
                InstanceDescription::Reservoir(r) => BuiltInstance::Reservoir(r),
            },
        })
    }
}

fn default_k() -> usize {
    1
}

fn default_scheme() -> SchemeKind {
    SchemeKind::Kl
}

fn default_parallelism() -> usize {
    1
}

fn default_inner_delta() -> f64 {
    0.25
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// One experiment: an algorithm, an instance and `runs` seeded repetitions.
///
/// Run `i` uses seed `base_seed + i` (wrapping), so every row is independent
/// of the others and of the parallelism width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub algorithm: Algorithm,
    pub instance: InstanceSpec,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Finite problems; for quantile algorithms on a finite instance it sets
    /// `rho = m / n` when `rho` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeKind,
    pub runs: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default, skip_serializing_if = "is_default")]
    pub h_star_mode: HStarMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_samples: Option<u64>,
    /// Confidence of each P2 copy inside P3 and OptQP.
    #[serde(default = "default_inner_delta")]
    pub inner_delta: f64,
    #[serde(default, skip_serializing_if = "is_default")]
    pub solver: SolverKind,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::usage(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    /// Reads a config file, resolving a relative instance path against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let InstanceSpec::File { path: inst } = &mut cfg.instance {
            if inst.is_relative() {
                if let Some(dir) = path.parent() {
                    *inst = dir.join(&*inst);
                }
            }
        }
        Ok(cfg)
    }

    pub fn seed_for(&self, run_index: u64) -> u64 {
        self.base_seed.wrapping_add(run_index)
    }

    /// Checks every field that can be checked without building the instance.
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| Err(Error::usage(format!("field `{name}`: {msg}")));
        if self.id.is_empty() {
            return field("id", "must not be empty".into());
        }
        if self.id.contains([',', '"', '\n', '\r']) {
            return field("id", "must not contain commas, quotes or newlines".into());
        }
        if self.runs < 1 {
            return field("runs", "must be at least 1".into());
        }
        if self.parallelism < 1 {
            return field("parallelism", "must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return field("epsilon", format!("must lie in (0, 1], got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return field("delta", format!("must lie in (0, 1], got {}", self.delta));
        }
        if self.k < 1 {
            return field("k", "must be at least 1".into());
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho <= 1.0) {
                return field("rho", format!("must lie in (0, 1], got {rho}"));
            }
        }
        if self.algorithm.is_quantile() {
            if !(self.inner_delta > 0.0 && self.inner_delta < 0.5) {
                return field("inner_delta", format!("must lie in (0, 1/2), got {}", self.inner_delta));
            }
            if self.rho.is_none() && self.m.is_none() {
                return field("rho", format!("required by {}", self.algorithm.as_str()));
            }
            if matches!(self.algorithm, Algorithm::P3 | Algorithm::OptQp) && self.k != 1 {
                return field("k", format!("{} returns a single arm; k must be 1", self.algorithm.as_str()));
            }
        } else {
            let Some(m) = self.m else {
                return field("m", format!("required by {}", self.algorithm.as_str()));
            };
            if self.k > m {
                return field("k", format!("must not exceed m = {m}, got {}", self.k));
            }
            if self.algorithm == Algorithm::F2 && self.k != 1 {
                return field("k", "f2 returns a single arm; k must be 1".into());
            }
            if self.rho.is_some() {
                return field("rho", format!("not used by {}", self.algorithm.as_str()));
            }
        }
        Ok(())
    }
}
