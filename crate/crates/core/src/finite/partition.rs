use crate::bounds::{hoeffding_radius, kl_bernoulli, BoundScheme, SchemeKind};
use crate::error::{Error, Result};
use crate::finite::HStarMode;
use crate::rng::RngStream;
use crate::state::ArmState;
use crate::ties;

/// Split of the arms by empirical mean, with the contentious arm of each part.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// The `k` arms with the highest empirical means.
    pub top: Vec<usize>,
    /// The next `m − k` arms.
    pub middle: Vec<usize>,
    /// The `n − m` arms with the lowest empirical means.
    pub bottom: Vec<usize>,
    pub h_star: usize,
    /// Least-pulled middle arm; absent when `k = m`.
    pub m_star: Option<usize>,
    /// Bottom arm with the highest upper bound.
    pub l_star: usize,
    pub h_lcb: f64,
    pub l_ucb: f64,
}

impl Partition {
    /// `ucb(l*) − lcb(h*)`.
    pub fn gap(&self) -> f64 {
        self.l_ucb - self.h_lcb
    }
}

/// Partitions the arms with bounds evaluated at round `t`.
///
/// Every arm must have been pulled at least once. Ties in the mean ordering
/// and in every arg-min/arg-max are broken uniformly at random.
pub fn partition(
    states: &[ArmState],
    k: usize,
    m: usize,
    t: u64,
    scheme: &BoundScheme,
    h_mode: HStarMode,
    rng: &mut RngStream,
) -> Result<Partition> {
    partition_cached(states, k, m, t, scheme, h_mode, None, rng)
}

/// [`partition`] that reuses upper bounds from earlier rounds to skip
/// bisections; the result is the same.
#[allow(clippy::too_many_arguments)]
pub(crate) fn partition_cached(
    states: &[ArmState],
    k: usize,
    m: usize,
    t: u64,
    scheme: &BoundScheme,
    h_mode: HStarMode,
    cache: Option<&mut UpperCache>,
    rng: &mut RngStream,
) -> Result<Partition> {
    let n = states.len();
    if k < 1 || k > m || m >= n {
        return Err(Error::usage(format!(
            "need 1 <= k <= m < n, got k={k}, m={m}, n={n}"
        )));
    }
    let means: Vec<f64> = states
        .iter()
        .map(|s| {
            s.mean()
                .ok_or_else(|| Error::usage("partition requires every arm pulled at least once"))
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..n).collect();
    ties::sort_desc(&mut order, |a| means[a], rng);
    let bottom = order.split_off(m);
    let middle = order.split_off(k);
    let top = order;

    let tau = scheme.threshold.at(t);
    let lcbs: Vec<(usize, f64)> = top
        .iter()
        .map(|&a| (a, scheme.lower(&states[a], tau)))
        .collect();
    let h_star = match h_mode {
        HStarMode::Argmin => ties::argmin(lcbs.iter().copied(), rng),
        HStarMode::Argmax => ties::argmax(lcbs.iter().copied(), rng),
    }
    .expect("top set is nonempty");
    let h_lcb = lcbs.iter().find(|(a, _)| *a == h_star).map(|p| p.1).unwrap();

    let m_star = ties::argmin(
        middle.iter().map(|&a| (a, states[a].pulls() as f64)),
        rng,
    );

    let (l_star, l_ucb) = top_upper(states, &bottom, scheme, tau, cache, rng);

    Ok(Partition {
        top,
        middle,
        bottom,
        h_star,
        m_star,
        l_star,
        h_lcb,
        l_ucb,
    })
}

/// KL upper bounds from earlier rounds of one run.
///
/// `kl(p, ·)` is convex, so the tangent at a cached bound `q` caps the bound
/// for any threshold: `q' ≤ q + (τ'/u − kl(p, q)) / ∂kl(p, q)`. The cap is
/// valid while the arm's pull count is unchanged.
#[derive(Debug, Clone, Default)]
pub(crate) struct UpperCache {
    entries: Vec<Option<Tangent>>,
}

#[derive(Debug, Clone, Copy)]
struct Tangent {
    pulls: u64,
    q: f64,
    kl: f64,
    slope: f64,
}

impl UpperCache {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            entries: vec![None; n],
        }
    }

    fn cap(&self, arm: usize, state: &ArmState, tau: f64) -> f64 {
        match self.entries[arm] {
            Some(c) if c.pulls == state.pulls() => c.q + (tau / c.pulls as f64 - c.kl) / c.slope,
            _ => f64::INFINITY,
        }
    }

    fn store(&mut self, arm: usize, state: &ArmState, q: f64) {
        let p = state.mean().expect("pulled");
        self.entries[arm] = (q > p && q < 1.0).then(|| Tangent {
            pulls: state.pulls(),
            q,
            kl: kl_bernoulli(p, q).expect("arguments in [0, 1]"),
            slope: (q - p) / (q * (1.0 - q)),
        });
    }
}

/// Arm of `arms` with the highest upper bound, and that bound.
///
/// KL bounds never exceed the clipped Hoeffding bound or a cached tangent
/// cap, so arms whose cap falls strictly below the best KL bound found so
/// far are skipped without a bisection. The result equals a full scan.
fn top_upper(
    states: &[ArmState],
    arms: &[usize],
    scheme: &BoundScheme,
    tau: f64,
    mut cache: Option<&mut UpperCache>,
    rng: &mut RngStream,
) -> (usize, f64) {
    let mut exact: Vec<(usize, f64)> = Vec::with_capacity(arms.len());
    if scheme.kind == SchemeKind::Kl {
        let mut caps: Vec<(usize, f64)> = arms
            .iter()
            .map(|&a| {
                let s = &states[a];
                let mean = s.mean().expect("pulled");
                let mut cap = (mean + hoeffding_radius(s.pulls(), tau)).min(1.0);
                if let Some(c) = cache.as_deref() {
                    cap = cap.min(c.cap(a, s, tau));
                }
                (a, cap)
            })
            .collect();
        caps.sort_by(|x, y| y.1.total_cmp(&x.1));
        let mut best = f64::NEG_INFINITY;
        for (a, cap) in caps {
            if cap + PRUNE_SLACK < best {
                break;
            }
            let u = scheme.upper(&states[a], tau);
            if let Some(c) = cache.as_deref_mut() {
                c.store(a, &states[a], u);
            }
            best = best.max(u);
            exact.push((a, u));
        }
    } else {
        exact.extend(arms.iter().map(|&a| (a, scheme.upper(&states[a], tau))));
    }
    let arm = ties::argmax(exact.iter().copied(), rng).expect("arm set is nonempty");
    let bound = exact.iter().find(|(a, _)| *a == arm).map(|p| p.1).unwrap();
    (arm, bound)
}

/// Covers rounding in the caps.
const PRUNE_SLACK: f64 = 1e-12;
