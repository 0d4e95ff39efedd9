use crate::analysis;
use crate::bandit::ArmPool;
use crate::bounds::BoundScheme;
use crate::error::{Error, Result};
use crate::finite::partition::{partition_cached, UpperCache};
use crate::finite::{check_finite_params, RunRecord, SequentialOptions};
use crate::rng::RngStream;
use crate::state::ArmState;

/// Returns `k` arms that are (ε, m)-optimal with probability at least `1 − δ`.
///
/// Every arm is pulled once (round `t = n`). Each iteration partitions the
/// arms with bounds at `t + 1`; if `ucb(l*) − lcb(h*) ≤ ε` the top set is
/// returned, otherwise `t` advances and `h*`, `m*` (when `k < m`) and `l*`
/// are pulled.
pub fn lucb_km<P: ArmPool + ?Sized>(
    pool: &P,
    k: usize,
    m: usize,
    eps: f64,
    delta: f64,
    options: &SequentialOptions,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    let n = pool.len();
    check_finite_params(n, k, m, eps, delta)?;
    let scheme = BoundScheme::new(options.scheme, n, delta)?;

    let mut states = vec![ArmState::new(); n];
    for (a, s) in states.iter_mut().enumerate() {
        s.record(pool.sample(a, rng));
    }
    let mut samples = n as u64;
    let mut t = n as u64;
    let mut rounds = 0u64;
    let mut cache = UpperCache::new(n);

    loop {
        let p = partition_cached(&states, k, m, t + 1, &scheme, options.h_star, Some(&mut cache), rng)?;
        let gap = p.gap();
        if gap <= eps {
            let pulls: Vec<u64> = states.iter().map(ArmState::pulls).collect();
            let means: Vec<f64> = (0..n).map(|a| pool.true_mean(a)).collect();
            return Ok(RunRecord {
                pulls_by_group: analysis::group_pulls(&means, k, m, &pulls),
                returned: p.top,
                total_samples: samples,
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
        for arm in [Some(p.h_star), p.m_star, Some(p.l_star)].into_iter().flatten() {
            states[arm].record(pool.sample(arm, rng));
            samples += 1;
        }
    }
}
