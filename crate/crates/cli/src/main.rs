mod selftest;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use gqd_core::sweep::{evaluate_point, run_sweep, write_csv, Family, Mode, PointQuery, SweepConfig};
use gqd_core::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

/// Geometric discord of qutrit pairs under non-Markovian amplitude damping.
#[derive(Debug, Parser)]
#[command(name = "gqd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a (parameter × γt) grid and write CSV.
    Sweep(SweepArgs),
    /// Evaluate a single point and print one CSV line.
    Point(PointArgs),
    /// Run the built-in oracle and analytic-value checks.
    Selftest,
}

#[derive(Debug, Args)]
struct Physics {
    /// State family: werner or horodecki.
    #[arg(long)]
    family: Option<Family>,
    /// Weak-measurement strength p.
    #[arg(long)]
    p: Option<f64>,
    /// Second strength q; defaults to p.
    #[arg(long)]
    q: Option<f64>,
    /// Reservoir spectral width, in units of γ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Spontaneously generated interference parameter.
    #[arg(long)]
    theta: Option<f64>,
    /// protected or bare.
    #[arg(long)]
    mode: Option<Mode>,
    /// TOML file with default settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    physics: Physics,
    #[arg(long)]
    param_min: Option<f64>,
    #[arg(long)]
    param_max: Option<f64>,
    #[arg(long)]
    param_steps: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_steps: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    physics: Physics,
    /// η for werner, α for horodecki.
    #[arg(long)]
    param: f64,
    #[arg(long)]
    gamma_t: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    family: Option<String>,
    param_min: Option<f64>,
    param_max: Option<f64>,
    param_steps: Option<usize>,
    t_max: Option<f64>,
    t_steps: Option<usize>,
    p: Option<f64>,
    q: Option<f64>,
    lambda: Option<f64>,
    theta: Option<f64>,
    mode: Option<String>,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Physics settings after merging flags over the config file.
struct Resolved {
    family: Family,
    p: f64,
    q: Option<f64>,
    lambda: f64,
    theta: f64,
    mode: Mode,
}

fn resolve(flags: &Physics, file: &FileConfig) -> anyhow::Result<Resolved> {
    let family = match (flags.family, &file.family) {
        (Some(f), _) => f,
        (None, Some(s)) => s.parse().map_err(anyhow::Error::msg)?,
        (None, None) => Family::Werner,
    };
    let mode = match (flags.mode, &file.mode) {
        (Some(m), _) => m,
        (None, Some(s)) => s.parse().map_err(anyhow::Error::msg)?,
        (None, None) => Mode::Protected,
    };
    Ok(Resolved {
        family,
        p: flags.p.or(file.p).unwrap_or(0.0),
        q: flags.q.or(file.q),
        lambda: flags.lambda.or(file.lambda).unwrap_or(1.0),
        theta: flags.theta.or(file.theta).unwrap_or(0.0),
        mode,
    })
}

enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::ThreadPool(_) => Failure::Config(e.into()),
            other => Failure::Numerical(other.into()),
        }
    }
}

fn config_err(e: anyhow::Error) -> Failure {
    Failure::Config(e)
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.physics.config.as_deref()).map_err(config_err)?;
    let phys = resolve(&args.physics, &file).map_err(config_err)?;
    let defaults = SweepConfig::figure(phys.family, phys.mode, phys.p, phys.lambda);
    let cfg = SweepConfig {
        param_min: args.param_min.or(file.param_min).unwrap_or(defaults.param_min),
        param_max: args.param_max.or(file.param_max).unwrap_or(defaults.param_max),
        param_steps: args.param_steps.or(file.param_steps).unwrap_or(defaults.param_steps),
        t_max: args.t_max.or(file.t_max).unwrap_or(defaults.t_max),
        t_steps: args.t_steps.or(file.t_steps).unwrap_or(defaults.t_steps),
        q: phys.q,
        theta: phys.theta,
        ..defaults
    };
    let threads = args.threads.or(file.threads);
    if threads == Some(0) {
        return Err(Failure::Config(anyhow::anyhow!("--threads must be positive")));
    }
    cfg.validate()?;
    let records = run_sweep(&cfg, threads)?;

    let out = args.out.clone().or(file.out);
    let result = match &out {
        Some(path) => fs::File::create(path)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                write_csv(&mut w, &cfg, &records)?;
                w.flush()
            })
            .with_context(|| format!("writing {}", path.display())),
        None => {
            let mut w = io::stdout().lock();
            write_csv(&mut w, &cfg, &records).context("writing stdout")
        }
    };
    result.map_err(config_err)
}

fn point(args: &PointArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.physics.config.as_deref()).map_err(config_err)?;
    let phys = resolve(&args.physics, &file).map_err(config_err)?;
    let query = PointQuery {
        family: phys.family,
        param: args.param,
        gamma_t: args.gamma_t,
        p: phys.p,
        q: phys.q.unwrap_or(phys.p),
        lambda: phys.lambda,
        theta: phys.theta,
        mode: phys.mode,
    };
    let record = evaluate_point(&query)?;
    println!("{}", record.csv_line());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Point(args) => point(args),
        Command::Selftest => {
            let mut out = io::stdout().lock();
            match selftest::run(&mut out) {
                Ok(true) => Ok(()),
                Ok(false) => Err(Failure::Numerical(anyhow::anyhow!("selftest failed"))),
                Err(e) => Err(Failure::Numerical(e)),
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
