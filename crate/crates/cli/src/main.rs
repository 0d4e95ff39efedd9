use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use topkm::analysis::HardnessProfile;
use topkm::experiment::{self, ExperimentConfig, PresetOptions, RunRow};
use topkm::instance_file::{read_instance_file, write_instance, InstanceDescription};
use topkm::make_lower_bound_instance;

/// PAC top-k-of-m arm identification experiments.
#[derive(Parser)]
#[command(name = "topkm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write runs.csv and summary.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the config's thread count.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Generate and run the configs behind one of the figures.
    Preset {
        #[arg(long, value_parser = ["fig1", "fig2", "fig3"])]
        name: String,
        /// Multiplier on the 100-run protocol.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Include fig1 instances with n > 50.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = default_threads())]
        parallelism: usize,
        /// Write the configs without running them.
        #[arg(long)]
        dry_run: bool,
    },
    /// Print gaps, hardness and the diagnostic budget of a finite instance.
    Hardness {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Write a lower-bound family instance file.
    LbInstance {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        /// Raised arm indices (0-based).
        #[arg(long, num_args = 0..)]
        set: Vec<usize>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-aggregate a runs table into a summary table.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .chain()
                .any(|c| c.downcast_ref::<topkm::Error>().is_some_and(topkm::Error::is_usage));
            ExitCode::from(if usage { 1 } else { 2 })
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            out,
            parallelism,
        } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            let rows = experiment::run_experiment(&cfg)?;
            write_tables(&rows, &out)
        }
        Command::Preset {
            name,
            scale,
            full,
            out,
            parallelism,
            dry_run,
        } => {
            let opts = PresetOptions {
                scale,
                full,
                parallelism,
            };
            let configs = experiment::preset(&name, &opts)?;
            let dir = out.join("configs");
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for cfg in &configs {
                fs::write(dir.join(format!("{}.toml", cfg.id)), cfg.to_toml())?;
            }
            if dry_run {
                return Ok(());
            }
            let mut rows = Vec::new();
            for cfg in &configs {
                eprintln!("running {} ({} runs)", cfg.id, cfg.runs);
                rows.extend(experiment::run_experiment(cfg)?);
            }
            write_tables(&rows, &out)
        }
        Command::Hardness {
            instance,
            k,
            m,
            eps,
            delta,
        } => {
            let InstanceDescription::Finite(b) = read_instance_file(&instance)? else {
                return Err(topkm::Error::Usage("hardness needs a finite instance".into()).into());
            };
            let profile = HardnessProfile::new(&b.means(), k, m, eps)?;
            let budget = profile.predicted_budget(delta);
            let stdout = io::stdout();
            let mut w = stdout.lock();
            writeln!(w, "n = {}", profile.n)?;
            writeln!(w, "hardness = {}", profile.hardness)?;
            if budget.degenerate {
                writeln!(w, "budget = 0 (degenerate: hardness <= delta)")?;
            } else {
                writeln!(w, "budget = {}", budget.rounds)?;
            }
            writeln!(w, "arm,mean,gap")?;
            for (a, (mu, gap)) in b.means().iter().zip(&profile.gaps).enumerate() {
                writeln!(w, "{a},{mu},{gap}")?;
            }
            Ok(())
        }
        Command::LbInstance {
            n,
            m,
            k,
            eps,
            set,
            out,
        } => {
            let b = make_lower_bound_instance(n, m, k, eps, &set)?;
            let text = write_instance(&InstanceDescription::Finite(b));
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => io::stdout().write_all(text.as_bytes())?,
            }
            Ok(())
        }
        Command::Aggregate { input, out } => {
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let rows = experiment::read_runs(BufReader::new(file))?;
            write_summary(&rows, &out)
        }
    }
}

fn write_tables(rows: &[RunRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let runs = dir.join("runs.csv");
    let mut w = BufWriter::new(File::create(&runs)?);
    experiment::write_runs(rows, &mut w)?;
    w.flush()?;
    write_summary(rows, &dir.join("summary.csv"))
}

fn write_summary(rows: &[RunRow], path: &Path) -> Result<()> {
    let summary = experiment::aggregate(rows)?;
    for warning in &summary.warnings {
        eprintln!("warning: {warning}");
    }
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    experiment::write_summary(&summary.rows, &mut w)?;
    w.flush()?;
    Ok(())
}
