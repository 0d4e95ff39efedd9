use serde::{Deserialize, Serialize};

use super::run::{csv_writer, RunRow};
use crate::error::{Error, Result};

/// Aggregate of the runs that share every parameter column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
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
    pub runs: u64,
    pub mean_samples: f64,
    /// Sample standard deviation over `√runs`; zero for a single run.
    pub stderr_samples: f64,
    pub mistake_rate: f64,
    pub frac_b1: Option<f64>,
    pub frac_b2: Option<f64>,
    pub frac_b3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

type GroupKey = (
    String,
    String,
    Option<usize>,
    Option<usize>,
    usize,
    Option<u64>,
    u64,
    u64,
    Option<String>,
    Option<String>,
);

fn key(r: &RunRow) -> GroupKey {
    (
        r.experiment_id.clone(),
        r.algorithm.clone(),
        r.n,
        r.m,
        r.k,
        r.rho.map(f64::to_bits),
        r.epsilon.to_bits(),
        r.delta.to_bits(),
        r.scheme.clone(),
        r.h_star_mode.clone(),
    )
}

/// Mean and standard error of `xs`; the error is zero for fewer than two values.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups rows by their parameter columns in order of first appearance.
pub fn aggregate(rows: &[RunRow]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::usage("cannot aggregate an empty runs table"));
    }
    let mut groups: Vec<(GroupKey, Vec<&RunRow>)> = Vec::new();
    for r in rows {
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    let mut warnings = Vec::new();
    let mut out = Vec::with_capacity(groups.len());
    for (_, members) in groups {
        let first = members[0];
        let samples: Vec<f64> = members.iter().map(|r| r.samples as f64).collect();
        let (mean_samples, stderr_samples) = mean_stderr(&samples);
        if members.len() == 1 {
            warnings.push(format!(
                "{}: single run, stderr reported as 0",
                first.experiment_id
            ));
        }
        let mistakes = members.iter().filter(|r| r.mistake != 0).count();
        let fracs = group_fractions(&members);
        if fracs.is_none() && members.iter().any(|r| r.pulls_b1.is_some()) {
            warnings.push(format!(
                "{}: group pulls missing or zero in some runs, fractions left empty",
                first.experiment_id
            ));
        }
        let [frac_b1, frac_b2, frac_b3] = match fracs {
            Some(f) => f.map(Some),
            None => [None; 3],
        };
        out.push(SummaryRow {
            experiment_id: first.experiment_id.clone(),
            algorithm: first.algorithm.clone(),
            n: first.n,
            m: first.m,
            k: first.k,
            rho: first.rho,
            epsilon: first.epsilon,
            delta: first.delta,
            scheme: first.scheme.clone(),
            h_star_mode: first.h_star_mode.clone(),
            runs: members.len() as u64,
            mean_samples,
            stderr_samples,
            mistake_rate: mistakes as f64 / members.len() as f64,
            frac_b1,
            frac_b2,
            frac_b3,
        });
    }
    Ok(Summary {
        rows: out,
        warnings,
    })
}

/// Mean over runs of each run's share of pulls per group.
fn group_fractions(members: &[&RunRow]) -> Option<[f64; 3]> {
    let mut acc = [0.0; 3];
    for r in members {
        let b = [r.pulls_b1?, r.pulls_b2?, r.pulls_b3?];
        let total: u64 = b.iter().sum();
        if total == 0 {
            return None;
        }
        for (a, x) in acc.iter_mut().zip(b) {
            *a += x as f64 / total as f64;
        }
    }
    Some(acc.map(|a| a / members.len() as f64))
}

pub fn write_summary<W: std::io::Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary<R: std::io::Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?)
}
