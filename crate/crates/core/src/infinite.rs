//! Quantile-based identification over arm reservoirs.
//!
//! `p2` draws enough arms that one of them is likely in the top ρ-fraction
//! and runs Median Elimination on them. `p3` boosts many low-confidence `p2`
//! copies with a second Median Elimination; `opt_qp` does the same with a
//! pluggable finite solver. `kqp1` finds `k` distinct good arms by running
//! `p3` in phases, excluding earlier outputs by rejection sampling and
//! lowering the target quantile by `ρ/k` per phase.

use crate::analysis;
use crate::bandit::{ArmPool, FiniteBandit};
use crate::error::{Error, Result};
use crate::finite::{f2, lucb_km, median_elimination, RunRecord, SequentialOptions};
use crate::reservoir::{ArmHandle, ArmReservoir, DrawnArms, PROB_TOL};
use crate::rng::RngStream;

/// Slack subtracted before taking ceilings of closed-form counts, so values
/// that are integers in exact arithmetic do not round up.
const CEIL_SLACK: f64 = 1e-9;

fn ceil_count(x: f64) -> u64 {
    (x - CEIL_SLACK).ceil().max(1.0) as u64
}

/// Settings shared by the reservoir algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileOptions {
    /// Confidence of each inner `p2` copy's failure, `δ'`.
    pub inner_delta: f64,
}

impl Default for QuantileOptions {
    fn default() -> Self {
        Self { inner_delta: 0.25 }
    }
}

/// One arm returned by a reservoir algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileOutcome {
    pub arm: ArmHandle,
    pub samples: u64,
    /// The arms the final selection stage chose from.
    pub candidates: Vec<ArmHandle>,
}

/// A `(k, ρ)` problem on a reservoir.
#[derive(Debug, Clone, Copy)]
pub struct QuantileProblem<'a> {
    pub reservoir: &'a ArmReservoir,
    pub rho: f64,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub rho: f64,
    pub delta: f64,
    pub excluded: usize,
    pub samples: u64,
}

/// `k` arms returned by a multi-arm reservoir algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRun {
    pub arms: Vec<ArmHandle>,
    pub samples: u64,
    pub phases: Vec<PhaseRecord>,
}

fn check_quantile(rho: f64, eps: f64, delta: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::usage(format!("rho must lie in (0, 1], got {rho}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::usage(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::usage(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

/// Arms drawn by `p2`: `⌈(1/ρ)·ln(2/δ)⌉`.
pub fn p2_draws(rho: f64, delta: f64) -> u64 {
    ceil_count((2.0 / delta).ln() / rho)
}

/// Copies of `p2` run by `p3`: `⌈(1/δ')·ln(2/δ)⌉`.
pub fn p3_copies(delta: f64, inner_delta: f64) -> u64 {
    ceil_count((2.0 / delta).ln() / inner_delta)
}

/// Copies of `p2` run by `opt_qp`: `⌈ln(2/δ) / (2(1/2 − δ')²)⌉`.
pub fn opt_qp_copies(delta: f64, inner_delta: f64) -> u64 {
    let margin = 0.5 - inner_delta;
    ceil_count((2.0 / delta).ln() / (2.0 * margin * margin))
}

/// Target quantile of each `kqp1` phase: `ρ·(k − y + 1)/k` for `y = 1..=k`.
pub fn quantile_schedule(rho: f64, k: usize) -> Vec<f64> {
    (1..=k)
        .map(|y| rho * (k - y + 1) as f64 / k as f64)
        .collect()
}

/// Draws `⌈(1/ρ)·ln(2/δ)⌉` arms (avoiding `excluded`) and returns the Median
/// Elimination winner among them at tolerance ε and confidence δ/2.
pub fn p2(
    reservoir: &ArmReservoir,
    excluded: &[ArmHandle],
    rho: f64,
    eps: f64,
    delta: f64,
    rng: &mut RngStream,
) -> Result<QuantileOutcome> {
    check_quantile(rho, eps, delta)?;
    let draws = p2_draws(rho, delta);
    let arms = (0..draws)
        .map(|_| reservoir.draw_arm(excluded, rng))
        .collect::<Result<Vec<_>>>()?;
    let pool = DrawnArms::new(reservoir, arms);
    let out = median_elimination(&pool, eps, delta / 2.0, rng)?;
    Ok(QuantileOutcome {
        arm: pool.handles()[out.arm],
        samples: out.samples,
        candidates: pool.handles().to_vec(),
    })
}

/// Runs `count` independent `p2(ρ, ε/2, δ')` copies, each on a forked stream.
fn p2_copies(
    reservoir: &ArmReservoir,
    excluded: &[ArmHandle],
    count: u64,
    rho: f64,
    eps: f64,
    inner_delta: f64,
    rng: &mut RngStream,
) -> Result<(Vec<ArmHandle>, u64)> {
    let mut arms = Vec::with_capacity(count as usize);
    let mut samples = 0;
    for _ in 0..count {
        let mut child = rng.fork();
        let out = p2(reservoir, excluded, rho, eps / 2.0, inner_delta, &mut child)?;
        arms.push(out.arm);
        samples += out.samples;
    }
    Ok((arms, samples))
}

/// Returns one [ε, ρ]-optimal arm with probability at least `1 − δ`.
///
/// Duplicate arms among the `p2` outputs are kept as separate entries.
pub fn p3(
    reservoir: &ArmReservoir,
    excluded: &[ArmHandle],
    rho: f64,
    eps: f64,
    delta: f64,
    options: &QuantileOptions,
    rng: &mut RngStream,
) -> Result<QuantileOutcome> {
    check_quantile(rho, eps, delta)?;
    check_inner_delta(options.inner_delta)?;
    let copies = p3_copies(delta, options.inner_delta);
    let (arms, mut samples) =
        p2_copies(reservoir, excluded, copies, rho, eps, options.inner_delta, rng)?;
    let pool = DrawnArms::new(reservoir, arms);
    let out = median_elimination(&pool, eps / 2.0, delta / 2.0, rng)?;
    samples += out.samples;
    Ok(QuantileOutcome {
        arm: pool.handles()[out.arm],
        samples,
        candidates: pool.handles().to_vec(),
    })
}

fn check_inner_delta(d: f64) -> Result<()> {
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::usage(format!("inner delta must lie in (0, 1/2), got {d}")));
    }
    Ok(())
}

/// Outcome of an equiprobability check on a discrete reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquiprobableCheck {
    /// Every top-ρ arm has draw probability at most ρ/k.
    pub holds: bool,
    /// The top-ρ arm with the largest draw probability when `holds` is false.
    pub witness: Option<usize>,
    /// Number of top-ρ arms; the problem is valid only if this is at least k.
    pub top_count: usize,
}

impl EquiprobableCheck {
    pub fn is_valid(&self, k: usize) -> bool {
        self.top_count >= k
    }
}

pub fn validate_equiprobable(
    reservoir: &ArmReservoir,
    k: usize,
    rho: f64,
) -> Result<EquiprobableCheck> {
    let ArmReservoir::Discrete(d) = reservoir else {
        return Err(Error::usage(
            "equiprobability is checked on discrete reservoirs only; continuous reservoirs satisfy it for every k",
        ));
    };
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    let oracle = analysis::top_rho_eps(reservoir, rho, 0.0)?;
    let limit = rho / k as f64;
    let mut top_count = 0;
    let mut worst: Option<(usize, f64)> = None;
    for id in 0..d.len() {
        let p = d.probs()[id];
        if p <= 0.0 || !oracle.contains(&ArmHandle::Discrete(id)) {
            continue;
        }
        top_count += 1;
        if worst.is_none_or(|(_, w)| p > w) {
            worst = Some((id, p));
        }
    }
    let holds = worst.is_none_or(|(_, p)| p <= limit + PROB_TOL);
    Ok(EquiprobableCheck {
        holds,
        witness: if holds { None } else { worst.map(|(id, _)| id) },
        top_count,
    })
}

/// Returns `k` distinct [ε, ρ]-optimal arms from an at-most-k-equiprobable
/// reservoir with probability at least `1 − δ`.
///
/// Phase `y` runs `p3` at quantile `ρ·(k − y + 1)/k` and confidence `δ/k`,
/// with all earlier outputs excluded. When the reservoir's draw
/// probabilities are known the instance is validated first.
pub fn kqp1(
    problem: &QuantileProblem<'_>,
    options: &QuantileOptions,
    rng: &mut RngStream,
) -> Result<QuantileRun> {
    let QuantileProblem {
        reservoir,
        rho,
        k,
        eps,
        delta,
    } = *problem;
    check_quantile(rho, eps, delta)?;
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    if reservoir.is_discrete() {
        let check = validate_equiprobable(reservoir, k, rho)?;
        if !check.is_valid(k) {
            return Err(Error::usage(format!(
                "invalid instance: only {} top-rho arms for k = {k}",
                check.top_count
            )));
        }
        if let Some(arm) = check.witness {
            return Err(Error::usage(format!(
                "instance is not at most {k}-equiprobable: arm {arm} exceeds rho/k"
            )));
        }
    }
    let phase_delta = delta / k as f64;
    let mut arms: Vec<ArmHandle> = Vec::with_capacity(k);
    let mut phases = Vec::with_capacity(k);
    let mut samples = 0;
    for rho_y in quantile_schedule(rho, k) {
        let out = p3(reservoir, &arms, rho_y, eps, phase_delta, options, rng)?;
        phases.push(PhaseRecord {
            rho: rho_y,
            delta: phase_delta,
            excluded: arms.len(),
            samples: out.samples,
        });
        samples += out.samples;
        arms.push(out.arm);
    }
    Ok(QuantileRun {
        arms,
        samples,
        phases,
    })
}

/// `k` independent `p3` copies at confidence `δ/k` on a continuous
/// reservoir, where distinct outputs occur with probability one.
pub fn k_independent_qp(
    problem: &QuantileProblem<'_>,
    options: &QuantileOptions,
    rng: &mut RngStream,
) -> Result<QuantileRun> {
    let QuantileProblem {
        reservoir,
        rho,
        k,
        eps,
        delta,
    } = *problem;
    if reservoir.is_discrete() {
        return Err(Error::usage(
            "independent copies need a continuous reservoir; use kqp1 for discrete reservoirs",
        ));
    }
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    check_quantile(rho, eps, delta)?;
    let phase_delta = delta / k as f64;
    let mut arms = Vec::with_capacity(k);
    let mut phases = Vec::with_capacity(k);
    let mut samples = 0;
    for _ in 0..k {
        let mut child = rng.fork();
        let out = p3(reservoir, &[], rho, eps, phase_delta, options, &mut child)?;
        phases.push(PhaseRecord {
            rho,
            delta: phase_delta,
            excluded: 0,
            samples: out.samples,
        });
        samples += out.samples;
        arms.push(out.arm);
    }
    Ok(QuantileRun {
        arms,
        samples,
        phases,
    })
}

/// A solver for the single-arm finite problem `(1, m, n)`.
pub trait FiniteSolver {
    fn solve(
        &self,
        pool: &dyn ArmPool,
        m: usize,
        eps: f64,
        delta: f64,
        rng: &mut RngStream,
    ) -> Result<RunRecord>;
}

/// `lucb_km` with `k = 1`.
#[derive(Debug, Clone, Copy)]
pub struct LucbSolver(pub SequentialOptions);

impl FiniteSolver for LucbSolver {
    fn solve(
        &self,
        pool: &dyn ArmPool,
        m: usize,
        eps: f64,
        delta: f64,
        rng: &mut RngStream,
    ) -> Result<RunRecord> {
        lucb_km(pool, 1, m, eps, delta, &self.0, rng)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct F2Solver(pub SequentialOptions);

impl FiniteSolver for F2Solver {
    fn solve(
        &self,
        pool: &dyn ArmPool,
        m: usize,
        eps: f64,
        delta: f64,
        rng: &mut RngStream,
    ) -> Result<RunRecord> {
        f2(pool, m, eps, delta, &self.0, rng)
    }
}

/// Draws `⌈8·ln(2/δ)⌉` arms with `p2(ρ, ε/2, δ')` and returns the output of
/// `solver` on the finite problem `(1, ⌊u/2⌋, u)` at `(ε/2, δ/2)`.
#[allow(clippy::too_many_arguments)]
pub fn opt_qp<S: FiniteSolver + ?Sized>(
    reservoir: &ArmReservoir,
    excluded: &[ArmHandle],
    rho: f64,
    eps: f64,
    delta: f64,
    solver: &S,
    options: &QuantileOptions,
    rng: &mut RngStream,
) -> Result<QuantileOutcome> {
    check_quantile(rho, eps, delta)?;
    check_inner_delta(options.inner_delta)?;
    let copies = opt_qp_copies(delta, options.inner_delta);
    let (arms, mut samples) =
        p2_copies(reservoir, excluded, copies, rho, eps, options.inner_delta, rng)?;
    let pool = DrawnArms::new(reservoir, arms);
    let m = (copies / 2) as usize;
    let record = solver.solve(&pool, m, eps / 2.0, delta / 2.0, rng)?;
    samples += record.total_samples;
    Ok(QuantileOutcome {
        arm: pool.handles()[record.returned[0]],
        samples,
        candidates: pool.handles().to_vec(),
    })
}

fn embed(instance: &FiniteBandit, m: usize) -> Result<(ArmReservoir, f64)> {
    let n = instance.n();
    if m < 1 || m >= n {
        return Err(Error::usage(format!("need 1 <= m < n, got m={m}, n={n}")));
    }
    Ok((ArmReservoir::uniform_over(instance)?, m as f64 / n as f64))
}

fn discrete_id(arm: &ArmHandle) -> usize {
    match arm {
        ArmHandle::Discrete(id) => *id,
        ArmHandle::Continuous { .. } => unreachable!("uniform embedding is discrete"),
    }
}

/// An arm of a finite instance returned through a reservoir algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedOutcome {
    pub arms: Vec<usize>,
    pub samples: u64,
}

/// Solves `(1, m, n)` by running `p3` on the uniform reservoir over the
/// instance's arms with `ρ = m/n`.
pub fn solve_qf_via_p3(
    instance: &FiniteBandit,
    m: usize,
    eps: f64,
    delta: f64,
    options: &QuantileOptions,
    rng: &mut RngStream,
) -> Result<EmbeddedOutcome> {
    let (reservoir, rho) = embed(instance, m)?;
    let out = p3(&reservoir, &[], rho, eps, delta, options, rng)?;
    Ok(EmbeddedOutcome {
        arms: vec![discrete_id(&out.arm)],
        samples: out.samples,
    })
}

/// Solves `(1, m, n)` by running `opt_qp` on the uniform embedding.
pub fn solve_qf_via_opt_qp<S: FiniteSolver + ?Sized>(
    instance: &FiniteBandit,
    m: usize,
    eps: f64,
    delta: f64,
    solver: &S,
    options: &QuantileOptions,
    rng: &mut RngStream,
) -> Result<EmbeddedOutcome> {
    let (reservoir, rho) = embed(instance, m)?;
    let out = opt_qp(&reservoir, &[], rho, eps, delta, solver, options, rng)?;
    Ok(EmbeddedOutcome {
        arms: vec![discrete_id(&out.arm)],
        samples: out.samples,
    })
}

/// Solves `(k, m, n)` by running `kqp1` on the uniform embedding with
/// `ρ = m/n`; every arm has probability `1/n ≤ ρ/k`.
pub fn solve_kmn_via_kqp1(
    instance: &FiniteBandit,
    k: usize,
    m: usize,
    eps: f64,
    delta: f64,
    options: &QuantileOptions,
    rng: &mut RngStream,
) -> Result<EmbeddedOutcome> {
    if k < 1 || k > m {
        return Err(Error::usage(format!("need 1 <= k <= m, got k={k}, m={m}")));
    }
    let (reservoir, rho) = embed(instance, m)?;
    let problem = QuantileProblem {
        reservoir: &reservoir,
        rho,
        k,
        eps,
        delta,
    };
    let run = kqp1(&problem, options, rng)?;
    Ok(EmbeddedOutcome {
        arms: run.arms.iter().map(discrete_id).collect(),
        samples: run.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::MeanLaw;

    #[test]
    fn closed_form_counts() {
        assert_eq!(p2_draws(0.2, 0.25), 11);
        assert_eq!(p2_draws(1.0, 0.1), 3);
        assert_eq!(p3_copies(0.001, 0.25), 31);
        assert_eq!(p3_copies(2.0 / std::f64::consts::E, 0.25), 4);
        assert_eq!(opt_qp_copies(0.1, 0.25), 24);
        assert_eq!(opt_qp_copies(2.0 / std::f64::consts::E, 0.25), 8);
    }

    #[test]
    fn schedule_values() {
        assert_eq!(quantile_schedule(0.15, 5), vec![0.15, 0.12, 0.09, 0.06, 0.03]);
        assert_eq!(quantile_schedule(0.5, 2), vec![0.5, 0.25]);
        assert_eq!(quantile_schedule(0.3, 1), vec![0.3]);
    }

    #[test]
    fn equiprobable_checks() {
        let r = ArmReservoir::two_level(100, 15, 0.9, 0.1).unwrap();
        let c = validate_equiprobable(&r, 5, 0.15).unwrap();
        assert!(c.holds && c.is_valid(5));
        assert_eq!(c.top_count, 15);

        let mut probs = vec![0.0; 100];
        probs[0] = 0.10;
        for p in probs.iter_mut().skip(1).take(14) {
            *p = 0.05 / 14.0;
        }
        for p in probs.iter_mut().skip(15) {
            *p = 0.85 / 85.0;
        }
        let means: Vec<f64> = (0..100).map(|i| if i < 15 { 0.9 } else { 0.1 }).collect();
        let r = ArmReservoir::discrete_bernoulli(&means, probs).unwrap();
        let c = validate_equiprobable(&r, 5, 0.15).unwrap();
        assert!(!c.holds);
        assert_eq!(c.witness, Some(0));
        // with k = 1 the limit is rho itself
        assert!(validate_equiprobable(&r, 1, 0.15).unwrap().holds);

        let cont = ArmReservoir::continuous(MeanLaw::uniform(0.0, 1.0).unwrap());
        assert!(validate_equiprobable(&cont, 2, 0.1).is_err());
    }

    #[test]
    fn kqp1_rejects_non_equiprobable_instances() {
        let r = ArmReservoir::two_level(10, 2, 0.9, 0.1).unwrap();
        let problem = QuantileProblem {
            reservoir: &r,
            rho: 0.2,
            k: 2,
            eps: 0.05,
            delta: 0.1,
        };
        let mut rng = RngStream::new(0);
        // each good arm has probability 0.1 = rho/k, so this one is fine
        assert!(kqp1(&problem, &QuantileOptions::default(), &mut rng).is_ok());
        let problem = QuantileProblem { k: 3, ..problem };
        assert!(matches!(
            kqp1(&problem, &QuantileOptions::default(), &mut rng),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn k_independent_requires_continuous() {
        let r = ArmReservoir::two_level(10, 2, 0.9, 0.1).unwrap();
        let problem = QuantileProblem {
            reservoir: &r,
            rho: 0.2,
            k: 2,
            eps: 0.05,
            delta: 0.1,
        };
        let mut rng = RngStream::new(0);
        assert!(k_independent_qp(&problem, &QuantileOptions::default(), &mut rng).is_err());
    }

    #[test]
    fn full_quantile_accepts_any_arm() {
        let r = ArmReservoir::two_level(10, 2, 0.9, 0.1).unwrap();
        let mut rng = RngStream::new(4);
        let out = p2(&r, &[], 1.0, 0.1, 0.1, &mut rng).unwrap();
        assert_eq!(out.candidates.len(), 3);
        let oracle = analysis::top_rho_eps(&r, 1.0, 0.0).unwrap();
        assert!(oracle.contains(&out.arm));
    }

    #[test]
    fn embeddings_validate_m() {
        let b = crate::bandit::make_linear_instance(10).unwrap();
        let mut rng = RngStream::new(0);
        let opts = QuantileOptions::default();
        assert!(solve_qf_via_p3(&b, 10, 0.05, 0.1, &opts, &mut rng).is_err());
        assert!(solve_kmn_via_kqp1(&b, 3, 2, 0.05, 0.1, &opts, &mut rng).is_err());
    }

    #[test]
    fn exhausted_reservoir_is_reported() {
        let r = ArmReservoir::two_level(2, 1, 0.9, 0.1).unwrap();
        let mut rng = RngStream::new(0);
        let all = [ArmHandle::Discrete(0), ArmHandle::Discrete(1)];
        assert!(matches!(
            p3(&r, &all, 0.5, 0.1, 0.1, &QuantileOptions::default(), &mut rng),
            Err(Error::NoArmAvailable)
        ));
    }
}
