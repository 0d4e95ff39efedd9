use crate::bandit::ArmPool;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::ties;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MedianOutcome {
    /// Index of the surviving arm within the pool.
    pub arm: usize,
    pub samples: u64,
}

/// Median Elimination over every arm of `pool`.
///
/// Phase `l` samples each surviving arm `⌈16/ε_l² · ln(3/δ_l)⌉` times and
/// keeps the better half (rounded up) by empirical mean of that phase, with
/// `ε₁ = ε/4`, `δ₁ = δ/2`, `ε_{l+1} = 3ε_l/4` and `δ_{l+1} = δ_l/2`. The
/// survivor is (ε, 1)-optimal with probability at least `1 − δ`.
pub fn median_elimination<P: ArmPool + ?Sized>(
    pool: &P,
    eps: f64,
    delta: f64,
    rng: &mut RngStream,
) -> Result<MedianOutcome> {
    if pool.is_empty() {
        return Err(Error::usage("median elimination needs at least one arm"));
    }
    if !(eps > 0.0 && eps <= 1.0) || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::usage(format!(
            "median elimination needs eps, delta in (0, 1], got {eps}, {delta}"
        )));
    }
    let mut alive: Vec<usize> = (0..pool.len()).collect();
    let mut eps_l = eps / 4.0;
    let mut delta_l = delta / 2.0;
    let mut samples = 0u64;
    let mut means = vec![0.0; pool.len()];

    while alive.len() > 1 {
        let per_arm = phase_samples(eps_l, delta_l);
        for &a in &alive {
            means[a] = pool.sample_sum(a, per_arm, rng) / per_arm as f64;
            samples += per_arm;
        }
        ties::sort_desc(&mut alive, |a| means[a], rng);
        alive.truncate(alive.len().div_ceil(2));
        eps_l *= 0.75;
        delta_l *= 0.5;
    }
    Ok(MedianOutcome {
        arm: alive[0],
        samples,
    })
}

fn phase_samples(eps_l: f64, delta_l: f64) -> u64 {
    let half = eps_l / 2.0;
    ((4.0 / (half * half)) * (3.0 / delta_l).ln()).ceil().max(1.0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::FiniteBandit;

    #[test]
    fn single_arm_needs_no_samples() {
        let b = FiniteBandit::bernoulli(&[0.3]).unwrap();
        let mut rng = RngStream::new(0);
        let out = median_elimination(&b, 0.1, 0.1, &mut rng).unwrap();
        assert_eq!(out, MedianOutcome { arm: 0, samples: 0 });
    }

    #[test]
    fn phase_schedule() {
        // two arms: one phase at eps/4, delta/2
        let b = FiniteBandit::bernoulli(&[0.9, 0.1]).unwrap();
        let mut rng = RngStream::new(0);
        let out = median_elimination(&b, 0.4, 0.2, &mut rng).unwrap();
        let per_arm = (16.0 / 0.01f64 * (30.0f64).ln()).ceil() as u64;
        assert_eq!(out.samples, 2 * per_arm);
        assert_eq!(out.arm, 0);

        // five arms: 5 -> 3 -> 2 -> 1
        let b = FiniteBandit::bernoulli(&[0.5; 5]).unwrap();
        let out = median_elimination(&b, 0.4, 0.2, &mut rng).unwrap();
        let expected = 5 * phase_samples(0.1, 0.1)
            + 3 * phase_samples(0.075, 0.05)
            + 2 * phase_samples(0.05625, 0.025);
        assert_eq!(out.samples, expected);
    }

    #[test]
    fn rejects_empty_pool_and_bad_parameters() {
        let b = FiniteBandit::bernoulli(&[0.3]).unwrap();
        let mut rng = RngStream::new(0);
        assert!(median_elimination(&b, 0.0, 0.1, &mut rng).is_err());
        assert!(median_elimination(&b, 0.1, 1.1, &mut rng).is_err());
        let empty: Vec<u64> = Vec::new();
        struct Empty(Vec<u64>);
        impl ArmPool for Empty {
            fn len(&self) -> usize {
                self.0.len()
            }
            fn sample(&self, _: usize, _: &mut RngStream) -> f64 {
                unreachable!()
            }
            fn sample_sum(&self, _: usize, _: u64, _: &mut RngStream) -> f64 {
                unreachable!()
            }
            fn true_mean(&self, _: usize) -> f64 {
                unreachable!()
            }
        }
        assert!(median_elimination(&Empty(empty), 0.1, 0.1, &mut rng).is_err());
    }

    #[test]
    fn two_arm_success_rate() {
        let b = FiniteBandit::bernoulli(&[0.9, 0.1]).unwrap();
        let wins = (0..1000)
            .filter(|&seed| {
                let mut rng = RngStream::new(seed);
                median_elimination(&b, 0.1, 0.05, &mut rng).unwrap().arm == 0
            })
            .count();
        assert!(wins >= 950);
    }

    #[test]
    fn identical_arms_any_survivor_is_fine() {
        let b = FiniteBandit::bernoulli(&[0.4; 4]).unwrap();
        let mut rng = RngStream::new(3);
        let out = median_elimination(&b, 0.3, 0.3, &mut rng).unwrap();
        assert!(out.arm < 4);
    }
}
