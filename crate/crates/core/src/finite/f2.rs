use crate::analysis;
use crate::bandit::ArmPool;
use crate::bounds::BoundScheme;
use crate::error::{Error, Result};
use crate::finite::{check_finite_params, RunRecord, SequentialOptions};
use crate::rng::RngStream;
use crate::state::ArmState;
use crate::ties;

/// The F2 baseline for returning one (ε, m)-optimal arm.
///
/// Each round the arm with the highest lower bound forms the first group,
/// the `m − 1` highest upper bounds among the rest form the second, and the
/// remaining `n − m` arms the third. The first-group arm, the least-pulled
/// second-group arm and the third-group arm with the highest upper bound are
/// pulled. The run stops once `lcb(ā₁) ≥ max ucb(Ā₃) − ε`.
///
/// `options.h_star` is ignored.
pub fn f2<P: ArmPool + ?Sized>(
    pool: &P,
    m: usize,
    eps: f64,
    delta: f64,
    options: &SequentialOptions,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    let n = pool.len();
    check_finite_params(n, 1, m, eps, delta)?;
    let scheme = BoundScheme::new(options.scheme, n, delta)?;

    let mut states = vec![ArmState::new(); n];
    for (a, s) in states.iter_mut().enumerate() {
        s.record(pool.sample(a, rng));
    }
    let mut samples = n as u64;
    let mut t = n as u64;
    let mut rounds = 0u64;
    let mut lcb = vec![0.0; n];
    let mut ucb = vec![0.0; n];

    loop {
        let tau = scheme.threshold.at(t + 1);
        for a in 0..n {
            lcb[a] = scheme.lower(&states[a], tau);
            ucb[a] = scheme.upper(&states[a], tau);
        }
        let leader = ties::argmax(lcb.iter().copied().enumerate(), rng).expect("n >= 2");
        let mut rest: Vec<usize> = (0..n).filter(|&a| a != leader).collect();
        ties::sort_desc(&mut rest, |a| ucb[a], rng);
        let challengers = rest.split_off(m - 1);
        let runner_up = challengers[0];
        let gap = ucb[runner_up] - lcb[leader];

        if gap <= eps {
            let pulls: Vec<u64> = states.iter().map(ArmState::pulls).collect();
            let means: Vec<f64> = (0..n).map(|a| pool.true_mean(a)).collect();
            return Ok(RunRecord {
                returned: vec![leader],
                total_samples: samples,
                pulls_by_group: analysis::group_pulls(&means, 1, m, &pulls),
                pulls,
                rounds,
                seed: rng.seed(),
                scheme: options.scheme,
                stop_gap: gap,
            });
        }
        if let Some(budget) = options.max_samples {
            if samples >= budget {
                return Err(Error::BudgetExhausted { budget });
            }
        }
        t += 1;
        rounds += 1;
        let least = ties::argmin(rest.iter().map(|&a| (a, states[a].pulls() as f64)), rng);
        for arm in [Some(leader), least, Some(runner_up)].into_iter().flatten() {
            states[arm].record(pool.sample(arm, rng));
            samples += 1;
        }
    }
}
