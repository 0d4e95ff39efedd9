//! Confidence bounds on arm means.
//!
//! Both schemes share the exploration threshold `τ(t) = ln(k₁·n·t⁴/δ)` with
//! `k₁ = 5/4`. The Hoeffding radius is `sqrt(τ(t) / 2u)`; the Bernoulli-KL
//! bounds are the extreme means `q` with `u·kl(p̂, q) ≤ τ(t)`, found by
//! bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::ArmState;

/// The constant `k₁` inside the exploration threshold.
pub const K1: f64 = 1.25;

/// Absolute width at which the KL bisection stops.
pub const BISECTION_TOL: f64 = 1e-9;

/// Hard cap on bisection steps.
pub const BISECTION_MAX_ITER: usize = 80;

/// `τ(t) = ln(k₁·n·t⁴/δ)`, natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationThreshold {
    n: usize,
    delta: f64,
    log_base: f64,
}

impl ExplorationThreshold {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("exploration threshold needs n >= 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::usage(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            n,
            delta,
            log_base: (K1 * n as f64 / delta).ln(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Threshold value at round `t >= 1`.
    pub fn at(&self, t: u64) -> f64 {
        self.log_base + 4.0 * (t as f64).ln()
    }
}

/// Hoeffding radius `β(u, t, δ)`. Infinite when `u = 0`; a nonpositive
/// threshold yields radius zero.
pub fn beta(pulls: u64, t: u64, threshold: &ExplorationThreshold) -> f64 {
    hoeffding_radius(pulls, threshold.at(t))
}

/// `sqrt(τ / 2u)` for an explicit threshold value.
pub fn hoeffding_radius(pulls: u64, tau: f64) -> f64 {
    if pulls == 0 {
        return f64::INFINITY;
    }
    (tau.max(0.0) / (2.0 * pulls as f64)).sqrt()
}

fn kl_unchecked(p: f64, q: f64) -> f64 {
    let mut d = 0.0;
    if p > 0.0 {
        if q == 0.0 {
            return f64::INFINITY;
        }
        d += p * (p / q).ln();
    }
    if p < 1.0 {
        if q == 1.0 {
            return f64::INFINITY;
        }
        d += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    d.max(0.0)
}

/// Bernoulli KL divergence `kl(p, q)` in nats, with `0·ln 0 = 0`.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::usage(format!("kl arguments must lie in [0, 1], got ({p}, {q})")));
    }
    Ok(kl_unchecked(p, q))
}

/// Largest `q ∈ [p̂, 1]` with `u·kl(p̂, q) ≤ τ`.
///
/// The returned value is always on the feasible side of the root, so
/// `u·kl(p̂, q) ≤ τ` holds exactly for the result.
pub fn kl_upper(p_hat: f64, pulls: u64, tau: f64) -> f64 {
    if pulls == 0 {
        return f64::INFINITY;
    }
    let tau = tau.max(0.0);
    let n = pulls as f64;
    let budget = tau / n;
    if p_hat >= 1.0 || budget == 0.0 {
        return p_hat;
    }
    // a root within one ulp of 1 is not resolvable in f64
    if kl_unchecked(p_hat, 1.0 - f64::EPSILON / 2.0) <= budget {
        return 1.0;
    }
    // Pinsker: kl(p, q) >= 2(q - p)^2, so the root lies below p + sqrt(budget/2)
    let pinsker = p_hat + (budget / 2.0).sqrt();
    let hi = if pinsker < 1.0 && kl_unchecked(p_hat, pinsker) > budget { pinsker } else { 1.0 };
    let (mut lo, mut hi) = (p_hat, hi);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL && (tau - n * kl_unchecked(p_hat, lo)) <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_unchecked(p_hat, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest `q ∈ [0, p̂]` with `u·kl(p̂, q) ≤ τ`.
pub fn kl_lower(p_hat: f64, pulls: u64, tau: f64) -> f64 {
    if pulls == 0 {
        return f64::NEG_INFINITY;
    }
    let tau = tau.max(0.0);
    let n = pulls as f64;
    let budget = tau / n;
    if p_hat <= 0.0 || budget == 0.0 {
        return p_hat;
    }
    if kl_unchecked(p_hat, f64::MIN_POSITIVE) <= budget {
        return 0.0;
    }
    // kl(p, q) >= p ln(p/q) + (1-p) ln(1-p) puts the root above `floor`
    let entropy_term = if p_hat < 1.0 { (1.0 - p_hat) * (1.0 - p_hat).ln() } else { 0.0 };
    let floor = p_hat * (-(budget - entropy_term) / p_hat).exp();
    let pinsker = p_hat - (budget / 2.0).sqrt();
    let mut lo = floor.max(f64::MIN_POSITIVE);
    if kl_unchecked(p_hat, lo) <= budget {
        lo = f64::MIN_POSITIVE;
    }
    if pinsker > lo && kl_unchecked(p_hat, pinsker) > budget {
        lo = pinsker;
    }
    let mut hi = p_hat;
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL && (tau - n * kl_unchecked(p_hat, hi)) <= BISECTION_TOL {
            break;
        }
        // geometric steps while the bracket spans orders of magnitude
        let mid = if hi > 4.0 * lo { lo.sqrt() * hi.sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_unchecked(p_hat, mid) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// KL upper bound at round `t`.
pub fn kl_ucb(p_hat: f64, pulls: u64, t: u64, threshold: &ExplorationThreshold) -> f64 {
    kl_upper(p_hat, pulls, threshold.at(t))
}

/// KL lower bound at round `t`.
pub fn kl_lcb(p_hat: f64, pulls: u64, t: u64, threshold: &ExplorationThreshold) -> f64 {
    kl_lower(p_hat, pulls, threshold.at(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Hoeffding,
    Kl,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::Hoeffding => "hoeffding",
            SchemeKind::Kl => "kl",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hoeffding" => Ok(SchemeKind::Hoeffding),
            "kl" => Ok(SchemeKind::Kl),
            other => Err(Error::usage(format!("unknown bound scheme `{other}`"))),
        }
    }
}

/// A confidence-bound strategy bound to a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundScheme {
    pub kind: SchemeKind,
    pub threshold: ExplorationThreshold,
}

impl BoundScheme {
    pub fn new(kind: SchemeKind, n: usize, delta: f64) -> Result<Self> {
        Ok(Self {
            kind,
            threshold: ExplorationThreshold::new(n, delta)?,
        })
    }

    /// Upper bound at round `t`; `+∞` for an unpulled arm. Hoeffding bounds
    /// are not clipped to `[0, 1]`.
    pub fn ucb(&self, state: &ArmState, t: u64) -> f64 {
        self.upper(state, self.threshold.at(t))
    }

    /// Lower bound at round `t`; `-∞` for an unpulled arm.
    pub fn lcb(&self, state: &ArmState, t: u64) -> f64 {
        self.lower(state, self.threshold.at(t))
    }

    pub(crate) fn upper(&self, state: &ArmState, tau: f64) -> f64 {
        let Some(mean) = state.mean() else {
            return f64::INFINITY;
        };
        match self.kind {
            SchemeKind::Hoeffding => mean + hoeffding_radius(state.pulls(), tau),
            SchemeKind::Kl => kl_upper(mean, state.pulls(), tau),
        }
    }

    pub(crate) fn lower(&self, state: &ArmState, tau: f64) -> f64 {
        let Some(mean) = state.mean() else {
            return f64::NEG_INFINITY;
        };
        match self.kind {
            SchemeKind::Hoeffding => mean - hoeffding_radius(state.pulls(), tau),
            SchemeKind::Kl => kl_lower(mean, state.pulls(), tau),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn state(pulls: u64, mean: f64) -> ArmState {
        let mut s = ArmState::new();
        s.record_batch(pulls, mean * pulls as f64);
        s
    }

    #[test]
    fn beta_closed_form() {
        // tau = ln(1.25e8) evaluated at 40 digits: 18.643824295266575...
        let th = ExplorationThreshold::new(10, 0.001).unwrap();
        assert_abs_diff_eq!(th.at(10), 18.643_824_295_266_575, epsilon = 1e-12);
        assert_abs_diff_eq!(beta(5, 10, &th), 1.365_423_901_038_303, epsilon = 1e-12);
    }

    #[test]
    fn beta_quadrupled_pulls_halves_radius() {
        let th = ExplorationThreshold::new(7, 0.05).unwrap();
        assert_abs_diff_eq!(beta(12, 30, &th), 2.0 * beta(48, 30, &th), epsilon = 1e-14);
    }

    #[test]
    fn beta_zero_threshold_and_zero_pulls() {
        let th = ExplorationThreshold::new(1, 1.25).unwrap();
        assert_eq!(th.at(1), 0.0);
        assert_eq!(beta(3, 1, &th), 0.0);
        assert_eq!(beta(0, 1, &th), f64::INFINITY);
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_bernoulli(0.5, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(
            kl_bernoulli(0.5, 0.75).unwrap(),
            0.143_841_036_225_890_46,
            epsilon = 1e-15
        );
        assert_eq!(kl_bernoulli(0.3, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.3, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(kl_bernoulli(1.0, 1.0).unwrap(), 0.0);
        assert!(kl_bernoulli(1.1, 0.5).is_err());
        assert!(kl_bernoulli(0.5, -0.1).is_err());
    }

    #[test]
    fn kl_bounds_trivial_cases() {
        assert_eq!(kl_upper(0.3, 10, 0.0), 0.3);
        assert_eq!(kl_lower(0.3, 10, 0.0), 0.3);
        assert_eq!(kl_upper(1.0, 10, 5.0), 1.0);
        assert_eq!(kl_lower(0.0, 10, 5.0), 0.0);
        assert_eq!(kl_upper(0.5, 0, 5.0), f64::INFINITY);
        assert_eq!(kl_lower(0.5, 0, 5.0), f64::NEG_INFINITY);
    }

    #[test]
    fn kl_bounds_match_grid_scan() {
        // Fine grid scan at step 1e-7: largest feasible q is 0.7128786, smallest 0.2871214.
        let up = kl_upper(0.5, 10, 1.0);
        assert!((0.712_878_6..0.712_878_7).contains(&up), "{up}");
        let lo = kl_lower(0.5, 10, 1.0);
        assert!(lo <= 0.287_121_4 && lo > 0.287_121_3, "{lo}");
    }

    #[test]
    fn degenerate_means_have_closed_form_bounds() {
        // u·kl(0, q) = -u ln(1-q) and u·kl(1, q) = -u ln q
        for &(u, tau) in &[(1u64, 3.0f64), (7, 2.5), (40, 11.0)] {
            assert_abs_diff_eq!(kl_upper(0.0, u, tau), 1.0 - (-tau / u as f64).exp(), epsilon = 1e-9);
            assert_abs_diff_eq!(kl_lower(1.0, u, tau), (-tau / u as f64).exp(), epsilon = 1e-9);
        }
    }

    #[test]
    fn sentinels_for_unpulled_arms() {
        for kind in [SchemeKind::Hoeffding, SchemeKind::Kl] {
            let s = BoundScheme::new(kind, 4, 0.1).unwrap();
            assert_eq!(s.ucb(&ArmState::new(), 5), f64::INFINITY);
            assert_eq!(s.lcb(&ArmState::new(), 5), f64::NEG_INFINITY);
        }
    }

    #[test]
    fn hoeffding_is_additive() {
        let s = BoundScheme::new(SchemeKind::Hoeffding, 4, 0.1).unwrap();
        let st = state(50, 0.5);
        let tau = 2.0 * 50.0 * 0.01;
        assert_abs_diff_eq!(s.upper(&st, tau), 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lower(&st, tau), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn kl_never_wider_than_hoeffding() {
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            for u in 1..=10u64 {
                for &tau in &[0.1, 1.0, 5.0] {
                    let r = hoeffding_radius(u, tau);
                    assert!(kl_upper(p, u, tau) <= (p + r).min(1.0) + 1e-9);
                    assert!(kl_lower(p, u, tau) >= (p - r).max(0.0) - 1e-9);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn kl_symmetry(p in 0.0f64..=1.0, q in 0.001f64..0.999) {
            let a = kl_bernoulli(p, q).unwrap();
            let b = kl_bernoulli(1.0 - p, 1.0 - q).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn ucb_monotone_in_pulls_and_rounds(
            p in 0.0f64..=1.0,
            u in 1u64..500,
            t in 1u64..100_000,
            kl in any::<bool>(),
        ) {
            let kind = if kl { SchemeKind::Kl } else { SchemeKind::Hoeffding };
            let s = BoundScheme::new(kind, 10, 0.01).unwrap();
            let a = state(u, p);
            let b = state(u + 1, p);
            prop_assert!(s.ucb(&b, t) <= s.ucb(&a, t) + 1e-9);
            prop_assert!(s.ucb(&a, t + 1) >= s.ucb(&a, t) - 1e-9);
            prop_assert!(s.ucb(&a, t) >= s.lcb(&a, t));
        }

        #[test]
        fn bisection_residual(p in 0.0f64..1.0, u in 1u64..1000, tau in 0.01f64..30.0) {
            // either the residual is met or the root sits between adjacent floats
            let q = kl_upper(p, u, tau);
            if q < 1.0 {
                let r = u as f64 * kl_bernoulli(p, q).unwrap();
                let next = u as f64 * kl_bernoulli(p, q.next_up()).unwrap();
                prop_assert!(r <= tau + 1e-12, "residual {} vs {}", r, tau);
                prop_assert!(r >= tau - 1e-6 || next > tau, "residual {} vs {}", r, tau);
            }
            let q = kl_lower(p, u, tau);
            if q > 0.0 {
                let r = u as f64 * kl_bernoulli(p, q).unwrap();
                let next = u as f64 * kl_bernoulli(p, q.next_down()).unwrap();
                prop_assert!(r <= tau + 1e-12, "residual {} vs {}", r, tau);
                prop_assert!(r >= tau - 1e-6 || next > tau, "residual {} vs {}", r, tau);
            }
        }
    }
}
