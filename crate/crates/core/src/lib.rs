//! PAC identification of `k` of the best `m` arms in finite bandits and of
//! `k` arms from the top ρ-fraction of an arm reservoir.
//!
//! - [`finite`]: `lucb_km`, the `f2` baseline and Median Elimination.
//! - [`infinite`]: `p2`, `p3`, `kqp1`, `opt_qp` and the finite embeddings.
//! - [`bounds`]: Hoeffding and Bernoulli-KL confidence bounds.
//! - [`analysis`]: ground-truth gaps, hardness, optimal sets and mistake checks.
//! - [`experiment`]: seeded, parallel experiment runner with CSV output.

pub mod analysis;
pub mod bandit;
pub mod bounds;
pub mod error;
pub mod experiment;
pub mod finite;
pub mod infinite;
pub mod instance_file;
pub mod reservoir;
pub mod rng;
pub mod state;
pub mod ties;

pub use bandit::{make_linear_instance, make_lower_bound_instance, ArmPool, FiniteBandit, RewardModel};
pub use bounds::{BoundScheme, ExplorationThreshold, SchemeKind};
pub use error::{Error, Result};
pub use finite::{HStarMode, RunRecord, SequentialOptions};
pub use reservoir::{ArmHandle, ArmReservoir, MeanLaw};
pub use rng::RngStream;
pub use state::ArmState;
