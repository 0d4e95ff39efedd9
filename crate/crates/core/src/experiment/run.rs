use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, BuiltInstance, ExperimentConfig, SolverKind};
use crate::analysis;
use crate::error::{Error, Result};
use crate::finite::{f2, lucb_km, RunRecord, SequentialOptions};
use crate::infinite::{
    k_independent_qp, kqp1, opt_qp, p3, F2Solver, LucbSolver, QuantileOptions, QuantileProblem,
};
use crate::reservoir::{ArmHandle, ArmReservoir};
use crate::rng::RngStream;

/// One line of runs.csv. `None` fields are written as empty strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub experiment_id: String,
    pub algorithm: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: usize,
    pub rho: Option<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub scheme: Option<String>,
    pub h_star_mode: Option<String>,
    pub seed: u64,
    pub run_index: u64,
    pub samples: u64,
    pub rounds: Option<u64>,
    pub mistake: u8,
    pub pulls_b1: Option<u64>,
    pub pulls_b2: Option<u64>,
    pub pulls_b3: Option<u64>,
}

pub const RUN_COLUMNS: [&str; 18] = [
    "experiment_id",
    "algorithm",
    "n",
    "m",
    "k",
    "rho",
    "epsilon",
    "delta",
    "scheme",
    "h_star_mode",
    "seed",
    "run_index",
    "samples",
    "rounds",
    "mistake",
    "pulls_b1",
    "pulls_b2",
    "pulls_b3",
];

/// Resolved inputs shared by every run of an experiment.
struct Prepared<'a> {
    cfg: &'a ExperimentConfig,
    instance: BuiltInstance,
    /// Reservoir view for quantile algorithms, with its ρ.
    reservoir: Option<(ArmReservoir, f64)>,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared<'_>> {
    cfg.validate()?;
    let instance = cfg.instance.build()?;
    let reservoir = match (&instance, cfg.algorithm.is_quantile()) {
        (_, false) => {
            let BuiltInstance::Finite(b) = &instance else {
                return Err(Error::usage(format!(
                    "field `instance`: {} needs a finite instance",
                    cfg.algorithm.as_str()
                )));
            };
            let m = cfg.m.expect("validated");
            if m >= b.n() {
                return Err(Error::usage(format!("field `m`: must be below n = {}, got {m}", b.n())));
            }
            None
        }
        (BuiltInstance::Finite(b), true) => {
            let rho = match (cfg.rho, cfg.m) {
                (Some(rho), _) => rho,
                (None, Some(m)) => m as f64 / b.n() as f64,
                (None, None) => unreachable!("validated"),
            };
            Some((ArmReservoir::uniform_over(b)?, rho))
        }
        (BuiltInstance::Reservoir(r), true) => {
            let Some(rho) = cfg.rho else {
                return Err(Error::usage("field `rho`: required for a reservoir instance"));
            };
            Some((r.clone(), rho))
        }
    };
    Ok(Prepared {
        cfg,
        instance,
        reservoir,
    })
}

fn sequential_options(cfg: &ExperimentConfig) -> SequentialOptions {
    SequentialOptions {
        scheme: cfg.scheme,
        h_star: cfg.h_star_mode,
        max_samples: cfg.max_samples,
    }
}

impl Prepared<'_> {
    fn n(&self) -> Option<usize> {
        match (&self.instance, &self.reservoir) {
            (BuiltInstance::Finite(b), _) => Some(b.n()),
            (_, Some((ArmReservoir::Discrete(d), _))) => Some(d.len()),
            _ => None,
        }
    }

    fn run(&self, run_index: u64) -> Result<RunRow> {
        let cfg = self.cfg;
        let seed = cfg.seed_for(run_index);
        let mut rng = RngStream::new(seed);
        let uses_scheme = !matches!(
            cfg.algorithm,
            Algorithm::P3 | Algorithm::Kqp1 | Algorithm::KIndependentQp
        );
        let uses_h_star = cfg.algorithm == Algorithm::LucbKm
            || (cfg.algorithm == Algorithm::OptQp && cfg.solver == SolverKind::LucbKm);
        let mut row = RunRow {
            experiment_id: cfg.id.clone(),
            algorithm: cfg.algorithm.as_str().to_string(),
            n: self.n(),
            m: cfg.m,
            k: cfg.k,
            rho: self.reservoir.as_ref().map(|(_, rho)| *rho),
            epsilon: cfg.epsilon,
            delta: cfg.delta,
            scheme: uses_scheme.then(|| cfg.scheme.as_str().to_string()),
            h_star_mode: uses_h_star.then(|| cfg.h_star_mode.as_str().to_string()),
            seed,
            run_index,
            samples: 0,
            rounds: None,
            mistake: 0,
            pulls_b1: None,
            pulls_b2: None,
            pulls_b3: None,
        };
        match (&self.instance, &self.reservoir) {
            (BuiltInstance::Finite(b), None) => {
                let m = cfg.m.expect("validated");
                let opts = sequential_options(cfg);
                let rec: RunRecord = match cfg.algorithm {
                    Algorithm::LucbKm => lucb_km(b, cfg.k, m, cfg.epsilon, cfg.delta, &opts, &mut rng)?,
                    _ => f2(b, m, cfg.epsilon, cfg.delta, &opts, &mut rng)?,
                };
                let ok = analysis::verify_run(&rec.returned, cfg.k, &b.means(), m, cfg.epsilon);
                row.samples = rec.total_samples;
                row.rounds = Some(rec.rounds);
                row.mistake = u8::from(!ok);
                [row.pulls_b1, row.pulls_b2, row.pulls_b3] = rec.pulls_by_group.map(Some);
            }
            (_, Some((reservoir, rho))) => {
                let (arms, samples) = self.run_quantile(reservoir, *rho, &mut rng)?;
                let oracle = analysis::top_rho_eps(reservoir, *rho, cfg.epsilon)?;
                row.samples = samples;
                row.mistake = u8::from(!analysis::verify_quantile_run(&arms, cfg.k, &oracle));
            }
            (BuiltInstance::Reservoir(_), None) => unreachable!("rejected in prepare"),
        }
        Ok(row)
    }

    fn run_quantile(
        &self,
        reservoir: &ArmReservoir,
        rho: f64,
        rng: &mut RngStream,
    ) -> Result<(Vec<ArmHandle>, u64)> {
        let cfg = self.cfg;
        let qopts = QuantileOptions {
            inner_delta: cfg.inner_delta,
        };
        let problem = QuantileProblem {
            reservoir,
            rho,
            k: cfg.k,
            eps: cfg.epsilon,
            delta: cfg.delta,
        };
        Ok(match cfg.algorithm {
            Algorithm::P3 => {
                let out = p3(reservoir, &[], rho, cfg.epsilon, cfg.delta, &qopts, rng)?;
                (vec![out.arm], out.samples)
            }
            Algorithm::OptQp => {
                let opts = sequential_options(cfg);
                let out = match cfg.solver {
                    SolverKind::LucbKm => {
                        opt_qp(reservoir, &[], rho, cfg.epsilon, cfg.delta, &LucbSolver(opts), &qopts, rng)?
                    }
                    SolverKind::F2 => {
                        opt_qp(reservoir, &[], rho, cfg.epsilon, cfg.delta, &F2Solver(opts), &qopts, rng)?
                    }
                };
                (vec![out.arm], out.samples)
            }
            Algorithm::Kqp1 => {
                let run = kqp1(&problem, &qopts, rng)?;
                (run.arms, run.samples)
            }
            Algorithm::KIndependentQp => {
                let run = k_independent_qp(&problem, &qopts, rng)?;
                (run.arms, run.samples)
            }
            Algorithm::LucbKm | Algorithm::F2 => unreachable!("finite algorithms"),
        })
    }
}

/// Runs every repetition of `cfg` on `cfg.parallelism` threads.
///
/// Rows come back ordered by run index and are identical for any
/// parallelism width. The first failing run aborts the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRow>> {
    let prepared = prepare(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::usage(format!("field `parallelism`: {e}")))?;
    pool.install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|i| prepared.run(i))
            .collect()
    })
}

/// Runs only the given run indices; rows match those of a full run.
pub fn run_subset(cfg: &ExperimentConfig, indices: &[u64]) -> Result<Vec<RunRow>> {
    let prepared = prepare(cfg)?;
    indices.iter().map(|&i| prepared.run(i)).collect()
}

fn writer<W: std::io::Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_runs<W: std::io::Write>(rows: &[RunRow], out: W) -> Result<()> {
    let mut w = writer(out);
    if rows.is_empty() {
        w.write_record(RUN_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs<R: std::io::Read>(input: R) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != RUN_COLUMNS {
        return Err(Error::usage(format!(
            "runs table header does not match the expected columns: {}",
            header.join(",")
        )));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<RunRow>, _>>()?)
}

pub(crate) fn csv_writer<W: std::io::Write>(out: W) -> csv::Writer<W> {
    writer(out)
}
