//! Finite bandit instances and reward models.

use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Reward law of a single arm. Support is always a subset of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardModel {
    Bernoulli { mean: f64 },
}

impl RewardModel {
    pub fn bernoulli(mean: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mean) {
            return Err(Error::usage(format!("Bernoulli mean {mean} outside [0, 1]")));
        }
        Ok(RewardModel::Bernoulli { mean })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            RewardModel::Bernoulli { mean } => mean,
        }
    }

    /// One reward. Consumes exactly one `u64` from `rng`.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            RewardModel::Bernoulli { mean } => {
                if rng.uniform() < mean {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Sum of `count` i.i.d. rewards.
    ///
    /// For Bernoulli arms the sum is drawn as a single Binomial variate, which
    /// has exactly the law of `count` independent pulls.
    pub fn sample_sum(&self, count: u64, rng: &mut RngStream) -> f64 {
        match count {
            0 => 0.0,
            1 => self.sample(rng),
            _ => match *self {
                RewardModel::Bernoulli { mean } => {
                    // mean is validated to lie in [0, 1] so construction cannot fail
                    let law = Binomial::new(count, mean).expect("valid Bernoulli mean");
                    law.sample(rng) as f64
                }
            },
        }
    }
}

/// A collection of pullable arms addressed by index.
///
/// `true_mean` exposes ground truth for bookkeeping (group pull counts,
/// mistake checks). Algorithms never consult it when making decisions.
pub trait ArmPool {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One reward from arm `arm`. Panics if `arm` is out of range.
    fn sample(&self, arm: usize, rng: &mut RngStream) -> f64;

    /// Sum of `count` rewards from arm `arm`.
    fn sample_sum(&self, arm: usize, count: u64, rng: &mut RngStream) -> f64;

    fn true_mean(&self, arm: usize) -> f64;
}

/// Immutable n-armed bandit instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBandit {
    arms: Vec<RewardModel>,
}

impl FiniteBandit {
    pub fn new(arms: Vec<RewardModel>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::usage("a bandit instance needs at least one arm"));
        }
        Ok(Self { arms })
    }

    /// Bernoulli instance with the given means, in the given order.
    pub fn bernoulli(means: &[f64]) -> Result<Self> {
        let arms = means
            .iter()
            .map(|&m| RewardModel::bernoulli(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arms)
    }

    pub fn n(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[RewardModel] {
        &self.arms
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(RewardModel::mean).collect()
    }

    /// One i.i.d. reward from `arm`.
    pub fn pull(&self, arm: usize, rng: &mut RngStream) -> Result<f64> {
        let model = self.arms.get(arm).ok_or_else(|| {
            Error::usage(format!("arm index {arm} out of range for {} arms", self.n()))
        })?;
        Ok(model.sample(rng))
    }
}

impl ArmPool for FiniteBandit {
    fn len(&self) -> usize {
        self.arms.len()
    }

    fn sample(&self, arm: usize, rng: &mut RngStream) -> f64 {
        self.arms[arm].sample(rng)
    }

    fn sample_sum(&self, arm: usize, count: u64, rng: &mut RngStream) -> f64 {
        self.arms[arm].sample_sum(count, rng)
    }

    fn true_mean(&self, arm: usize) -> f64 {
        self.arms[arm].mean()
    }
}

/// `n` Bernoulli arms with means spaced linearly from 0.999 down to 0.001.
pub fn make_linear_instance(n: usize) -> Result<FiniteBandit> {
    if n < 2 {
        return Err(Error::usage(format!("linear instance needs n >= 2, got {n}")));
    }
    let step = 0.998 / (n - 1) as f64;
    let means: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { 0.001 } else { 0.999 - i as f64 * step })
        .collect();
    FiniteBandit::bernoulli(&means)
}

/// Member of the lower-bound instance family indexed by the arm set `set`.
///
/// Arms `0..=m-k` have mean 1/2, arms in `set` have mean 1/2 + 2ε and the
/// remaining arms 1/2 - 2ε.
pub fn make_lower_bound_instance(
    n: usize,
    m: usize,
    k: usize,
    eps: f64,
    set: &[usize],
) -> Result<FiniteBandit> {
    if k < 1 || k > m {
        return Err(Error::usage(format!("need 1 <= k <= m, got k={k}, m={m}")));
    }
    if n < 2 * m {
        return Err(Error::usage(format!("need n >= 2m, got n={n}, m={m}")));
    }
    if !(eps > 0.0 && eps <= 1.0 / 32f64.sqrt()) {
        return Err(Error::usage(format!("need 0 < eps <= 1/sqrt(32), got {eps}")));
    }
    if set.len() != k - 1 && set.len() != m {
        return Err(Error::usage(format!(
            "index set size must be k-1={} or m={m}, got {}",
            k - 1,
            set.len()
        )));
    }
    let base_len = m - k + 1;
    let mut in_set = vec![false; n];
    for &a in set {
        if a < base_len || a >= n {
            return Err(Error::usage(format!(
                "index {a} must lie in {base_len}..{n} (outside the always-optimal block)"
            )));
        }
        if in_set[a] {
            return Err(Error::usage(format!("index {a} listed twice")));
        }
        in_set[a] = true;
    }
    let means: Vec<f64> = (0..n)
        .map(|a| {
            if a < base_len {
                0.5
            } else if in_set[a] {
                0.5 + 2.0 * eps
            } else {
                0.5 - 2.0 * eps
            }
        })
        .collect();
    FiniteBandit::bernoulli(&means)
}
