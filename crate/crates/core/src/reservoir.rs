//! Arm reservoirs: bandits accessed only through i.i.d. draws of arms.
//!
//! A discrete reservoir lists its arms with explicit draw probabilities. A
//! continuous reservoir draws each arm's mean from an atomless law, so any
//! finite set of previously drawn arms has draw probability zero.

use rand::distr::weighted::WeightedIndex;
use rand::RngCore;
use rand_distr::Distribution;

use crate::bandit::{ArmPool, FiniteBandit, RewardModel};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Tolerance for probability sums and mass comparisons.
pub const PROB_TOL: f64 = 1e-12;

/// Identity of an arm drawn from a reservoir.
///
/// Discrete arms carry their stable index. Continuous arms carry a 64-bit draw
/// tag (taken from the run's stream) together with the drawn mean.
#[derive(Debug, Clone, Copy)]
pub enum ArmHandle {
    Discrete(usize),
    Continuous { draw: u64, mean: f64 },
}

impl PartialEq for ArmHandle {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ArmHandle::Discrete(a), ArmHandle::Discrete(b)) => a == b,
            (ArmHandle::Continuous { draw: a, .. }, ArmHandle::Continuous { draw: b, .. }) => {
                a == b
            }
            _ => false,
        }
    }
}

impl Eq for ArmHandle {}

/// Atomless law of arm means for continuous reservoirs.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanLaw {
    Uniform { lo: f64, hi: f64 },
    /// Piecewise-constant density: segment `i` spans `breaks[i]..breaks[i+1]`
    /// and carries probability `weights[i]`.
    Piecewise { breaks: Vec<f64>, weights: Vec<f64> },
}

impl MeanLaw {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::usage(format!(
                "uniform mean law needs 0 <= lo < hi <= 1, got [{lo}, {hi}]"
            )));
        }
        Ok(MeanLaw::Uniform { lo, hi })
    }

    pub fn piecewise(breaks: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || weights.len() != breaks.len() - 1 {
            return Err(Error::usage(
                "piecewise law needs K+1 breakpoints and K weights, K >= 1",
            ));
        }
        if breaks[0] < 0.0 || breaks[breaks.len() - 1] > 1.0 {
            return Err(Error::usage("piecewise breakpoints must lie in [0, 1]"));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::usage("piecewise breakpoints must be strictly increasing"));
        }
        check_probabilities(&weights)?;
        Ok(MeanLaw::Piecewise { breaks, weights })
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            MeanLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.uniform(),
            MeanLaw::Piecewise { breaks, weights } => {
                let u = rng.uniform();
                let mut cum = 0.0;
                let mut seg = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    cum += w;
                    if u < cum {
                        seg = i;
                        break;
                    }
                }
                let (a, b) = (breaks[seg], breaks[seg + 1]);
                a + (b - a) * rng.uniform()
            }
        }
    }

    /// `inf { x : F(x) > p }` for the law's CDF `F`.
    pub fn upper_quantile(&self, p: f64) -> f64 {
        match self {
            MeanLaw::Uniform { lo, hi } => lo + (hi - lo) * p.clamp(0.0, 1.0),
            MeanLaw::Piecewise { breaks, weights } => {
                let mut cum = 0.0;
                for (i, &w) in weights.iter().enumerate() {
                    if w > 0.0 && cum + w > p {
                        let frac = ((p - cum) / w).clamp(0.0, 1.0);
                        return breaks[i] + frac * (breaks[i + 1] - breaks[i]);
                    }
                    cum += w;
                }
                breaks[breaks.len() - 1]
            }
        }
    }
}

/// Finite-support reservoir with known draw probabilities.
#[derive(Debug, Clone)]
pub struct DiscreteReservoir {
    arms: Vec<RewardModel>,
    probs: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl DiscreteReservoir {
    pub fn new(arms: Vec<RewardModel>, probs: Vec<f64>) -> Result<Self> {
        if arms.is_empty() || arms.len() != probs.len() {
            return Err(Error::usage(format!(
                "discrete reservoir needs one probability per arm ({} arms, {} probabilities)",
                arms.len(),
                probs.len()
            )));
        }
        check_probabilities(&probs)?;
        let sampler = WeightedIndex::new(&probs)
            .map_err(|e| Error::usage(format!("invalid draw probabilities: {e}")))?;
        Ok(Self { arms, probs, sampler })
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(RewardModel::mean).collect()
    }

    pub fn arm(&self, id: usize) -> &RewardModel {
        &self.arms[id]
    }
}

fn check_probabilities(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::usage("probabilities must be finite and nonnegative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::usage(format!("probabilities sum to {total}, expected 1")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub enum ArmReservoir {
    Discrete(DiscreteReservoir),
    /// Bernoulli arms whose means are drawn from `MeanLaw`.
    Continuous(MeanLaw),
}

impl ArmReservoir {
    pub fn discrete_bernoulli(means: &[f64], probs: Vec<f64>) -> Result<Self> {
        let arms = means
            .iter()
            .map(|&m| RewardModel::bernoulli(m))
            .collect::<Result<Vec<_>>>()?;
        Ok(ArmReservoir::Discrete(DiscreteReservoir::new(arms, probs)?))
    }

    /// Uniform draw over the arms of a finite instance.
    pub fn uniform_over(instance: &FiniteBandit) -> Result<Self> {
        let n = instance.n();
        let probs = vec![1.0 / n as f64; n];
        Ok(ArmReservoir::Discrete(DiscreteReservoir::new(
            instance.arms().to_vec(),
            probs,
        )?))
    }

    /// `arms` equiprobable Bernoulli arms of which the first `good` have mean
    /// `good_mean` and the rest `bad_mean`.
    pub fn two_level(arms: usize, good: usize, good_mean: f64, bad_mean: f64) -> Result<Self> {
        if arms == 0 || good > arms {
            return Err(Error::usage(format!(
                "two-level reservoir needs 0 <= good <= arms, arms > 0 (got {good} of {arms})"
            )));
        }
        let means: Vec<f64> = (0..arms)
            .map(|i| if i < good { good_mean } else { bad_mean })
            .collect();
        Self::discrete_bernoulli(&means, vec![1.0 / arms as f64; arms])
    }

    pub fn continuous(law: MeanLaw) -> Self {
        ArmReservoir::Continuous(law)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ArmReservoir::Discrete(_))
    }

    /// Ground-truth mean of a drawn arm.
    pub fn mean_of(&self, arm: &ArmHandle) -> f64 {
        match (self, arm) {
            (ArmReservoir::Discrete(d), ArmHandle::Discrete(id)) => d.arms[*id].mean(),
            (_, ArmHandle::Continuous { mean, .. }) => *mean,
            (ArmReservoir::Continuous(_), ArmHandle::Discrete(_)) => {
                panic!("discrete handle used with a continuous reservoir")
            }
        }
    }

    fn reward_model(&self, arm: &ArmHandle) -> RewardModel {
        match (self, arm) {
            (ArmReservoir::Discrete(d), ArmHandle::Discrete(id)) => d.arms[*id],
            _ => RewardModel::Bernoulli {
                mean: self.mean_of(arm),
            },
        }
    }

    /// Draws an arm from the reservoir's law conditioned on not being in
    /// `excluded`, by repeated draw-and-discard.
    pub fn draw_arm(&self, excluded: &[ArmHandle], rng: &mut RngStream) -> Result<ArmHandle> {
        self.draw_arm_counted(excluded, rng).map(|(arm, _)| arm)
    }

    /// Like [`draw_arm`](Self::draw_arm), also returning the number of
    /// discarded draws.
    pub fn draw_arm_counted(
        &self,
        excluded: &[ArmHandle],
        rng: &mut RngStream,
    ) -> Result<(ArmHandle, u64)> {
        if let ArmReservoir::Discrete(d) = self {
            let mut seen = vec![false; d.len()];
            let mut mass = 0.0;
            for h in excluded {
                if let ArmHandle::Discrete(id) = *h {
                    if id < d.len() && !seen[id] {
                        seen[id] = true;
                        mass += d.probs[id];
                    }
                }
            }
            if 1.0 - mass <= PROB_TOL {
                return Err(Error::NoArmAvailable);
            }
        }
        let mut rejections = 0u64;
        loop {
            let arm = match self {
                ArmReservoir::Discrete(d) => ArmHandle::Discrete(d.sampler.sample(rng)),
                ArmReservoir::Continuous(law) => {
                    let mean = law.sample(rng);
                    ArmHandle::Continuous {
                        draw: rng.next_u64(),
                        mean,
                    }
                }
            };
            if !excluded.contains(&arm) {
                return Ok((arm, rejections));
            }
            rejections += 1;
        }
    }

    /// The (1-ρ)-quantile threshold of the mean distribution: the smallest
    /// mean `v` such that the mass of arms with mean strictly above `v` is
    /// below ρ. Equals `inf { x : F(x) > 1 - ρ }`.
    pub fn quantile_threshold(&self, rho: f64) -> f64 {
        match self {
            ArmReservoir::Continuous(law) => law.upper_quantile(1.0 - rho),
            ArmReservoir::Discrete(d) => {
                let mut order: Vec<usize> = (0..d.len()).collect();
                order.sort_by(|&a, &b| d.arms[b].mean().total_cmp(&d.arms[a].mean()));
                let mut threshold = d.arms[order[0]].mean();
                let mut above = 0.0;
                let mut i = 0;
                while i < order.len() {
                    let v = d.arms[order[i]].mean();
                    if above >= rho - PROB_TOL && i > 0 {
                        break;
                    }
                    threshold = v;
                    while i < order.len() && d.arms[order[i]].mean() == v {
                        above += d.probs[order[i]];
                        i += 1;
                    }
                }
                threshold
            }
        }
    }
}

/// Arms drawn from a reservoir, pullable by position. Duplicate handles are
/// separate entries that share the same reward law.
#[derive(Debug, Clone)]
pub struct DrawnArms<'a> {
    reservoir: &'a ArmReservoir,
    arms: Vec<ArmHandle>,
    models: Vec<RewardModel>,
}

impl<'a> DrawnArms<'a> {
    pub fn new(reservoir: &'a ArmReservoir, arms: Vec<ArmHandle>) -> Self {
        let models = arms.iter().map(|a| reservoir.reward_model(a)).collect();
        Self {
            reservoir,
            arms,
            models,
        }
    }

    pub fn handles(&self) -> &[ArmHandle] {
        &self.arms
    }

    pub fn reservoir(&self) -> &ArmReservoir {
        self.reservoir
    }
}

impl ArmPool for DrawnArms<'_> {
    fn len(&self) -> usize {
        self.arms.len()
    }

    fn sample(&self, arm: usize, rng: &mut RngStream) -> f64 {
        self.models[arm].sample(rng)
    }

    fn sample_sum(&self, arm: usize, count: u64, rng: &mut RngStream) -> f64 {
        self.models[arm].sample_sum(count, rng)
    }

    fn true_mean(&self, arm: usize) -> f64 {
        self.models[arm].mean()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exclusion_forces_outcome() {
        let r = ArmReservoir::discrete_bernoulli(&[0.9, 0.1], vec![0.5, 0.5]).unwrap();
        let mut rng = RngStream::new(1);
        for _ in 0..200 {
            let a = r.draw_arm(&[ArmHandle::Discrete(0)], &mut rng).unwrap();
            assert_eq!(a, ArmHandle::Discrete(1));
        }
    }

    #[test]
    fn full_exclusion_is_an_error() {
        let r = ArmReservoir::discrete_bernoulli(&[0.9, 0.1], vec![0.5, 0.5]).unwrap();
        let mut rng = RngStream::new(1);
        let ex = [ArmHandle::Discrete(0), ArmHandle::Discrete(1)];
        assert!(matches!(r.draw_arm(&ex, &mut rng), Err(Error::NoArmAvailable)));
    }

    #[test]
    fn zero_probability_arms_do_not_count_as_support() {
        let r = ArmReservoir::discrete_bernoulli(&[0.9, 0.1], vec![1.0, 0.0]).unwrap();
        let mut rng = RngStream::new(1);
        assert!(matches!(
            r.draw_arm(&[ArmHandle::Discrete(0)], &mut rng),
            Err(Error::NoArmAvailable)
        ));
    }

    #[test]
    fn rejection_preserves_conditional_law() {
        let r = ArmReservoir::discrete_bernoulli(&[0.1, 0.2, 0.3], vec![0.2, 0.3, 0.5]).unwrap();
        let mut rng = RngStream::new(2024);
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            match r.draw_arm(&[ArmHandle::Discrete(2)], &mut rng).unwrap() {
                ArmHandle::Discrete(id) => counts[id] += 1,
                _ => unreachable!(),
            }
        }
        assert_eq!(counts[2], 0);
        assert!((counts[0] as f64 / n as f64 - 0.4).abs() < 0.01);
        assert!((counts[1] as f64 / n as f64 - 0.6).abs() < 0.01);
    }

    #[test]
    fn continuous_exclusion_never_rejects() {
        let r = ArmReservoir::continuous(MeanLaw::uniform(0.0, 1.0).unwrap());
        let mut rng = RngStream::new(5);
        let mut excluded = Vec::new();
        for _ in 0..10_000 {
            let (a, rej) = r.draw_arm_counted(&excluded, &mut rng).unwrap();
            assert_eq!(rej, 0);
            if excluded.len() < 50 {
                excluded.push(a);
            }
        }
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        assert!(ArmReservoir::discrete_bernoulli(&[0.5, 0.5], vec![0.5, 0.4]).is_err());
        assert!(ArmReservoir::discrete_bernoulli(&[0.5], vec![0.5, 0.5]).is_err());
        assert!(ArmReservoir::discrete_bernoulli(&[0.5, 0.5], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn two_point_quantile_is_conservative_at_the_atom() {
        let r = ArmReservoir::two_level(10, 2, 0.9, 0.1).unwrap();
        assert_eq!(r.quantile_threshold(0.2), 0.9);
        assert_eq!(r.quantile_threshold(0.25), 0.1);
        assert_eq!(r.quantile_threshold(1.0), 0.1);
        let r = ArmReservoir::two_level(100, 20, 0.9, 0.1).unwrap();
        assert_eq!(r.quantile_threshold(0.2), 0.9);
        assert_eq!(r.quantile_threshold(0.2 + 1e-9), 0.1);
    }

    #[test]
    fn continuous_quantiles() {
        let u = MeanLaw::uniform(0.0, 1.0).unwrap();
        assert!((u.upper_quantile(0.9) - 0.9).abs() < 1e-15);
        let p = MeanLaw::piecewise(vec![0.0, 0.5, 0.8, 1.0], vec![0.5, 0.0, 0.5]).unwrap();
        // the flat part of the CDF resolves to its right end
        assert_eq!(p.upper_quantile(0.5), 0.8);
        assert!((p.upper_quantile(0.25) - 0.25).abs() < 1e-15);
        assert!((p.upper_quantile(0.75) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn piecewise_samples_respect_segments() {
        let p = MeanLaw::piecewise(vec![0.0, 0.5, 0.8, 1.0], vec![0.5, 0.0, 0.5]).unwrap();
        let mut rng = RngStream::new(8);
        for _ in 0..10_000 {
            let x = p.sample(&mut rng);
            assert!(!(0.5..0.8).contains(&x));
        }
    }
}
