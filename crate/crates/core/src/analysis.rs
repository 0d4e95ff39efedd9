//! Ground-truth quantities: gaps, hardness, pull budgets, optimal sets and
//! mistake checks.
//!
//! Everything here reads true means and is meant for diagnostics and
//! verification. Algorithms never call into this module to make decisions.
//!
//! Ranks follow the descending order of true means with ties broken by the
//! original arm index.

use crate::bounds::K1;
use crate::error::{Error, Result};
use crate::reservoir::{ArmHandle, ArmReservoir};

/// Slack for floating-point representation error in optimal-set membership,
/// so that e.g. `0.7 >= 0.8 - 0.1` holds.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Multiplier in the diagnostic round bound `⌈C·H_ε·ln(H_ε/δ)⌉`.
pub const BUDGET_CONSTANT: f64 = 2732.0;

/// Arm indices ordered by true mean, best first; ties by index.
pub fn rank_order(means: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    order
}

/// Ground-truth group of every arm: 0 for the top `k`, 1 for ranks
/// `k+1..=m`, 2 for the rest.
pub fn ground_truth_groups(means: &[f64], k: usize, m: usize) -> Vec<u8> {
    let mut groups = vec![2u8; means.len()];
    for (rank, &arm) in rank_order(means).iter().enumerate() {
        groups[arm] = if rank < k {
            0
        } else if rank < m {
            1
        } else {
            2
        };
    }
    groups
}

/// Sums per-arm pull counts into the three ground-truth groups.
pub fn group_pulls(means: &[f64], k: usize, m: usize, pulls: &[u64]) -> [u64; 3] {
    let mut out = [0u64; 3];
    for (g, p) in ground_truth_groups(means, k, m).iter().zip(pulls) {
        out[*g as usize] += p;
    }
    out
}

fn check_km(n: usize, k: usize, m: usize) -> Result<()> {
    if k < 1 || k > m || m >= n {
        return Err(Error::usage(format!(
            "need 1 <= k <= m < n, got k={k}, m={m}, n={n}"
        )));
    }
    Ok(())
}

/// Per-arm gaps, reported in the arms' original order.
///
/// With 1-based ranks: `μ_a − μ_(m+1)` for the top `k`, `μ_(k) − μ_(m+1)`
/// for ranks `k+1..=m`, and `μ_(m) − μ_a` below rank `m`.
pub fn gaps(means: &[f64], k: usize, m: usize) -> Result<Vec<f64>> {
    check_km(means.len(), k, m)?;
    let order = rank_order(means);
    let mu = |rank: usize| means[order[rank - 1]];
    let mut out = vec![0.0; means.len()];
    for (i, &arm) in order.iter().enumerate() {
        let rank = i + 1;
        out[arm] = if rank <= k {
            means[arm] - mu(m + 1)
        } else if rank <= m {
            mu(k) - mu(m + 1)
        } else {
            mu(m) - means[arm]
        };
    }
    Ok(out)
}

/// `H_ε = Σ 1/max{Δ_a, ε/2}²` for a given gap vector.
pub fn hardness_from_gaps(gaps: &[f64], eps: f64) -> f64 {
    gaps.iter()
        .map(|&d| {
            let floor = d.max(eps / 2.0);
            1.0 / (floor * floor)
        })
        .sum()
}

pub fn hardness(means: &[f64], k: usize, m: usize, eps: f64) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::usage(format!("eps must be positive, got {eps}")));
    }
    Ok(hardness_from_gaps(&gaps(means, k, m)?, eps))
}

/// `⌈32/max{Δ_a, ε/2}² · ln(k₁·n·t⁴/δ)⌉`, clamped at zero.
pub fn u_star(gap: f64, eps: f64, n: usize, t: u64, delta: f64) -> u64 {
    let floor = gap.max(eps / 2.0);
    let tau = (K1 * n as f64 / delta).ln() + 4.0 * (t as f64).ln();
    let v = (32.0 / (floor * floor) * tau).ceil();
    if v > 0.0 {
        v as u64
    } else {
        0
    }
}

/// Diagnostic round bound; never used to stop an algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetPrediction {
    pub rounds: u64,
    /// Set when `H_ε ≤ δ`, where the logarithm is nonpositive and the bound
    /// is reported as zero.
    pub degenerate: bool,
}

pub fn predicted_budget(hardness: f64, delta: f64) -> BudgetPrediction {
    let log = (hardness / delta).ln();
    if log.is_nan() || log <= 0.0 {
        return BudgetPrediction {
            rounds: 0,
            degenerate: true,
        };
    }
    BudgetPrediction {
        rounds: (BUDGET_CONSTANT * hardness * log).ceil() as u64,
        degenerate: false,
    }
}

/// Gaps, hardness and the diagnostic budget of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct HardnessProfile {
    pub n: usize,
    pub eps: f64,
    pub gaps: Vec<f64>,
    pub hardness: f64,
}

impl HardnessProfile {
    pub fn new(means: &[f64], k: usize, m: usize, eps: f64) -> Result<Self> {
        let gaps = gaps(means, k, m)?;
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::usage(format!("eps must be positive, got {eps}")));
        }
        Ok(Self {
            n: means.len(),
            eps,
            hardness: hardness_from_gaps(&gaps, eps),
            gaps,
        })
    }

    pub fn u_star(&self, arm: usize, t: u64, delta: f64) -> u64 {
        u_star(self.gaps[arm], self.eps, self.n, t, delta)
    }

    pub fn predicted_budget(&self, delta: f64) -> BudgetPrediction {
        predicted_budget(self.hardness, delta)
    }
}

/// Arms whose mean is at least the `m`-th largest mean minus `eps`.
pub fn top_m_eps(means: &[f64], m: usize, eps: f64) -> Result<Vec<usize>> {
    if m < 1 || m > means.len() {
        return Err(Error::usage(format!(
            "need 1 <= m <= n, got m={m}, n={}",
            means.len()
        )));
    }
    let order = rank_order(means);
    let threshold = means[order[m - 1]] - eps - MEMBERSHIP_TOL;
    Ok((0..means.len()).filter(|&a| means[a] >= threshold).collect())
}

/// True iff `returned` holds exactly `expected` distinct arms, all of them
/// (ε, m)-optimal.
pub fn verify_run(returned: &[usize], expected: usize, means: &[f64], m: usize, eps: f64) -> bool {
    if returned.len() != expected {
        return false;
    }
    let mut seen = vec![false; means.len()];
    for &a in returned {
        if a >= means.len() || seen[a] {
            return false;
        }
        seen[a] = true;
    }
    let Ok(top) = top_m_eps(means, m, eps) else {
        return false;
    };
    returned.iter().all(|a| top.contains(a))
}

/// Membership test for the [ε, ρ]-optimal arms of a reservoir.
#[derive(Debug, Clone, Copy)]
pub struct TopRho<'a> {
    reservoir: &'a ArmReservoir,
    quantile: f64,
    eps: f64,
}

impl TopRho<'_> {
    /// The (1-ρ)-quantile of the mean distribution.
    pub fn quantile(&self) -> f64 {
        self.quantile
    }

    /// Minimum mean of an optimal arm.
    pub fn threshold(&self) -> f64 {
        self.quantile - self.eps
    }

    pub fn contains(&self, arm: &ArmHandle) -> bool {
        self.reservoir.mean_of(arm) >= self.threshold() - MEMBERSHIP_TOL
    }
}

pub fn top_rho_eps(reservoir: &ArmReservoir, rho: f64, eps: f64) -> Result<TopRho<'_>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::usage(format!("rho must lie in (0, 1], got {rho}")));
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::usage(format!("eps must be nonnegative, got {eps}")));
    }
    Ok(TopRho {
        reservoir,
        quantile: reservoir.quantile_threshold(rho),
        eps,
    })
}

/// True iff `arms` holds exactly `expected` pairwise-distinct arms, all
/// accepted by `oracle`.
pub fn verify_quantile_run(arms: &[ArmHandle], expected: usize, oracle: &TopRho<'_>) -> bool {
    if arms.len() != expected {
        return false;
    }
    for (i, a) in arms.iter().enumerate() {
        if arms[..i].contains(a) {
            return false;
        }
    }
    arms.iter().all(|a| oracle.contains(a))
}
