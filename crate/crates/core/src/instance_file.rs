//! Flat key-value instance files.
//!
//! ```text
//! # comment lines and blank lines are ignored
//! kind = finite
//! means = [0.999, 0.5, 0.001]
//! ```
//!
//! Reservoirs carry a `law`:
//!
//! ```text
//! kind = reservoir
//! law = discrete          # needs means = [...] and probs = [...]
//! law = uniform           # optional range = [lo, hi], default [0, 1]
//! law = piecewise         # needs breaks = [b0, ..., bK] and weights = [w1, ..., wK]
//! ```
//!
//! Each line holds one `key = value` pair; keys may appear once. Lists are
//! comma-separated decimals in square brackets. Written files use plain
//! decimal notation with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::bandit::FiniteBandit;
use crate::error::{Error, Result};
use crate::reservoir::{ArmReservoir, MeanLaw};

#[derive(Debug, Clone)]
pub enum InstanceDescription {
    Finite(FiniteBandit),
    Reservoir(ArmReservoir),
}

/// Formats `x` in plain decimal with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:?}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).max(1) as usize;
    let s = format!("{x:.decimals$}");
    // log10 can land one decade high right below a power of ten
    if s.parse::<f64>() == Ok(x) {
        s
    } else {
        format!("{x:.prec$}", prec = decimals + 1)
    }
}

fn format_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| format_f64(x)).collect();
    format!("[{}]", items.join(", "))
}

pub fn parse_instance(text: &str) -> Result<InstanceDescription> {
    let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        let key = key.trim().to_string();
        if fields
            .insert(key.clone(), (line_no, value.trim().to_string()))
            .is_some()
        {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let mut fields = Fields(fields);
    let kind = fields.take_str("kind")?;
    let out = match kind.as_str() {
        "finite" => {
            let means = fields.take_list("means")?;
            InstanceDescription::Finite(FiniteBandit::bernoulli(&means)?)
        }
        "reservoir" => {
            let law = fields.take_str("law")?;
            match law.as_str() {
                "discrete" => {
                    let means = fields.take_list("means")?;
                    let probs = fields.take_list("probs")?;
                    InstanceDescription::Reservoir(ArmReservoir::discrete_bernoulli(&means, probs)?)
                }
                "uniform" => {
                    let (lo, hi) = match fields.take_optional_list("range")? {
                        None => (0.0, 1.0),
                        Some(r) if r.len() == 2 => (r[0], r[1]),
                        Some(_) => {
                            return Err(Error::usage("range must hold exactly two values"));
                        }
                    };
                    InstanceDescription::Reservoir(ArmReservoir::continuous(MeanLaw::uniform(
                        lo, hi,
                    )?))
                }
                "piecewise" => {
                    let breaks = fields.take_list("breaks")?;
                    let weights = fields.take_list("weights")?;
                    InstanceDescription::Reservoir(ArmReservoir::continuous(MeanLaw::piecewise(
                        breaks, weights,
                    )?))
                }
                other => return Err(Error::usage(format!("unknown reservoir law `{other}`"))),
            }
        }
        other => return Err(Error::usage(format!("unknown instance kind `{other}`"))),
    };
    if let Some((key, (line, _))) = fields.0.into_iter().next() {
        return Err(Error::Parse {
            line,
            message: format!("unexpected key `{key}` for this instance kind"),
        });
    }
    Ok(out)
}

struct Fields(BTreeMap<String, (usize, String)>);

impl Fields {
    fn take_str(&mut self, key: &str) -> Result<String> {
        self.0
            .remove(key)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::usage(format!("missing key `{key}`")))
    }

    fn take_optional_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some((line, value)) = self.0.remove(key) else {
            return Ok(None);
        };
        let inner = value
            .strip_prefix('[')
            .and_then(|v| v.strip_suffix(']'))
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("`{key}` must be a bracketed list"),
            })?;
        if inner.trim().is_empty() {
            return Ok(Some(Vec::new()));
        }
        inner
            .split(',')
            .map(|item| {
                item.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad number `{}` in `{key}`: {e}", item.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn take_list(&mut self, key: &str) -> Result<Vec<f64>> {
        self.take_optional_list(key)?
            .ok_or_else(|| Error::usage(format!("missing key `{key}`")))
    }
}

pub fn write_instance(desc: &InstanceDescription) -> String {
    let mut out = String::new();
    match desc {
        InstanceDescription::Finite(b) => {
            writeln!(out, "kind = finite").unwrap();
            writeln!(out, "means = {}", format_list(&b.means())).unwrap();
        }
        InstanceDescription::Reservoir(ArmReservoir::Discrete(d)) => {
            writeln!(out, "kind = reservoir").unwrap();
            writeln!(out, "law = discrete").unwrap();
            writeln!(out, "means = {}", format_list(&d.means())).unwrap();
            writeln!(out, "probs = {}", format_list(d.probs())).unwrap();
        }
        InstanceDescription::Reservoir(ArmReservoir::Continuous(law)) => {
            writeln!(out, "kind = reservoir").unwrap();
            match law {
                MeanLaw::Uniform { lo, hi } => {
                    writeln!(out, "law = uniform").unwrap();
                    writeln!(out, "range = {}", format_list(&[*lo, *hi])).unwrap();
                }
                MeanLaw::Piecewise { breaks, weights } => {
                    writeln!(out, "law = piecewise").unwrap();
                    writeln!(out, "breaks = {}", format_list(breaks)).unwrap();
                    writeln!(out, "weights = {}", format_list(weights)).unwrap();
                }
            }
        }
    }
    out
}

pub fn read_instance_file(path: &Path) -> Result<InstanceDescription> {
    parse_instance(&std::fs::read_to_string(path)?)
}
