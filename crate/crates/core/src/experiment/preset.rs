use super::config::{Algorithm, ExperimentConfig, InstanceSpec, SolverKind};
use crate::bounds::SchemeKind;
use crate::error::{Error, Result};
use crate::finite::HStarMode;

pub const FIG1_SIZES: [usize; 5] = [10, 20, 50, 100, 200];
pub const FIG3_KS: [usize; 6] = [1, 2, 3, 5, 8, 10];
/// Largest fig1 instance run without `full`.
pub const DESK_MAX_N: usize = 50;

const EPS: f64 = 0.05;
const DELTA: f64 = 0.001;
const BASE_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetOptions {
    /// Multiplies the 100-run protocol; at least one run is kept.
    pub scale: f64,
    /// Include fig1 instances above [`DESK_MAX_N`].
    pub full: bool,
    pub parallelism: usize,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            scale: 1.0,
            full: false,
            parallelism: 1,
        }
    }
}

fn base(id: String, algorithm: Algorithm, n: usize, k: usize, m: usize, runs: u64, par: usize) -> ExperimentConfig {
    ExperimentConfig {
        id,
        algorithm,
        instance: InstanceSpec::Linear { n },
        k,
        m: Some(m),
        rho: None,
        epsilon: EPS,
        delta: DELTA,
        scheme: SchemeKind::Kl,
        runs,
        // shared across algorithms so runs are paired by seed
        base_seed: BASE_SEED,
        parallelism: par,
        h_star_mode: HStarMode::Argmin,
        max_samples: None,
        inner_delta: 0.25,
        solver: SolverKind::LucbKm,
    }
}

/// Configs reproducing one of the three experiment figures.
pub fn preset(name: &str, opts: &PresetOptions) -> Result<Vec<ExperimentConfig>> {
    if !(opts.scale > 0.0 && opts.scale.is_finite()) {
        return Err(Error::usage(format!("scale must be positive, got {}", opts.scale)));
    }
    let runs = ((100.0 * opts.scale).round() as u64).max(1);
    let par = opts.parallelism.max(1);
    let both = [Algorithm::LucbKm, Algorithm::F2];
    let mut out = Vec::new();
    match name {
        "fig1" => {
            for n in FIG1_SIZES.into_iter().filter(|&n| opts.full || n <= DESK_MAX_N) {
                assert_eq!(n % 10, 0, "m = n/10 must be an integer");
                for alg in both {
                    let id = format!("fig1-n{n}-{}", alg.as_str());
                    out.push(base(id, alg, n, 1, n / 10, runs, par));
                }
            }
        }
        "fig2" => {
            for m in 1..=5 {
                for alg in both {
                    let id = format!("fig2-m{m}-{}", alg.as_str());
                    out.push(base(id, alg, 10, 1, m, runs, par));
                }
            }
        }
        "fig3" => {
            for k in FIG3_KS {
                let id = format!("fig3-k{k}");
                out.push(base(id, Algorithm::LucbKm, 20, k, 10, runs, par));
            }
        }
        other => return Err(Error::usage(format!("unknown preset `{other}`; expected fig1, fig2 or fig3"))),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_counts() {
        let full = PresetOptions {
            full: true,
            ..Default::default()
        };
        assert_eq!(preset("fig1", &full).unwrap().len(), 10);
        assert_eq!(preset("fig1", &PresetOptions::default()).unwrap().len(), 6);
        assert_eq!(preset("fig2", &full).unwrap().len(), 10);
        let fig3 = preset("fig3", &full).unwrap();
        assert_eq!(fig3.iter().map(|c| c.k).collect::<Vec<_>>(), FIG3_KS);
        assert!(preset("fig4", &full).is_err());
    }

    #[test]
    fn scale_and_validity() {
        let small = PresetOptions {
            scale: 0.1,
            full: true,
            parallelism: 3,
        };
        for name in ["fig1", "fig2", "fig3"] {
            for cfg in preset(name, &small).unwrap() {
                assert_eq!(cfg.runs, 10);
                assert_eq!(cfg.scheme, SchemeKind::Kl);
                cfg.validate().unwrap();
            }
        }
        let tiny = PresetOptions {
            scale: 0.001,
            ..Default::default()
        };
        assert_eq!(preset("fig2", &tiny).unwrap()[0].runs, 1);
        let bad = PresetOptions {
            scale: 0.0,
            ..Default::default()
        };
        assert!(preset("fig2", &bad).is_err());
    }
}
