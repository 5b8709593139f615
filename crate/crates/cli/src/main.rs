//! `obslab` command-line driver. Each subcommand writes `<command>.json`
//! plus plot-ready CSV files into the output directory.

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use config::{parse_f64_list, parse_potential, parse_range, parse_set, parse_usize_list, Command, OperatorKind, RunConfig, TimeToken};
use obslab::Error;
use report::{report_path, to_json, write_atomic, Artifact, ReportDocument, Stopwatch, ARTIFACT_NAME, ARTIFACT_VERSION, SCHEMA_VERSION};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "obslab", version, about = "Observability experiments for 1-D Schrödinger operators")]
struct Cli {
    /// Output directory (falls back to $OBSLAB_OUT, then the working directory).
    #[arg(long, global = true, env = "OBSLAB_OUT")]
    out: Option<PathBuf>,
    /// Seed for randomized probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct PotentialArgs {
    /// Exponent m of the potential x^{2m}.
    #[arg(long)]
    m: Option<u32>,
    /// Explicit potential: `monomial:M` or `shifted:COEFF,C`.
    #[arg(long, conflicts_with = "m")]
    potential: Option<String>,
    /// Relative accuracy of the eigenvalues.
    #[arg(long)]
    accuracy: Option<f64>,
}

#[derive(Args)]
struct SetArgs {
    /// Inline set: halfline:A, bounded:R, periodic:P, dyadic[:C[,P]], polygap:EPS, intervals:a,b;c,d.
    #[arg(long)]
    set: Option<String>,
    /// JSON set file: {"family": ..., "params": {...}} or {"intervals": [[a, b], ...]}.
    #[arg(long)]
    set_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues, eigenfunctions, Weyl-law and gap fits.
    Spectrum {
        #[command(flatten)]
        pot: PotentialArgs,
        /// Number of eigenpairs.
        #[arg(long = "K", alias = "kmax")]
        k: usize,
    },
    /// Thickness verdict and eigenfunction masses of a set.
    Setmass {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        set: SetArgs,
        #[arg(long = "K", alias = "kmax", default_value_t = 40)]
        k: usize,
        /// Horizon for the thickness classifier and set expansion.
        #[arg(long)]
        horizon: Option<f64>,
        /// Levels for the WKB-region mass split, e.g. `10,20..22`.
        #[arg(long)]
        levels: Option<String>,
    },
    /// WKB amplitude fits and scaling exponents.
    Wkb {
        #[command(flatten)]
        pot: PotentialArgs,
        /// Levels, e.g. `25..40`.
        #[arg(long = "k")]
        levels: String,
    },
    /// Q(k, T) table for coherent states against a set.
    Mintime {
        #[command(flatten)]
        set: SetArgs,
        /// Final times; accepts tokens such as `pi/2` or `pi/2+0.3`.
        #[arg(long = "T")]
        times: String,
        /// Coherent-state parameters.
        #[arg(long = "k")]
        ks: String,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Resolvent margin curve over a λ range.
    Resolvent {
        #[command(flatten)]
        set: SetArgs,
        /// Spectral parameters: `a..b` (with --lambda-step) or a list.
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 1.0)]
        lambda_step: f64,
        #[arg(long, value_enum, default_value = "free")]
        operator: OperatorArg,
        /// Potential exponent for the Dirichlet operator.
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long)]
        nodes: Option<usize>,
        /// Candidate M values.
        #[arg(long = "M")]
        big_m: Option<String>,
        /// Candidate m_w values.
        #[arg(long = "mw")]
        m_w: Option<String>,
    },
    /// Two-time observability quotients against ball complements.
    Twotime {
        /// Radii r or r1,r2 of the sets [−r1, r1]ᶜ and [−r2, r2]ᶜ.
        #[arg(long, default_value = "5")]
        r: String,
        #[arg(long = "S", default_value = "0")]
        s: String,
        #[arg(long = "T")]
        times: String,
        /// Number of bumps in the blow-up family.
        #[arg(long, default_value_t = 2)]
        family: usize,
        /// Hermite modes.
        #[arg(long = "K")]
        modes: Option<usize>,
        #[arg(long)]
        half_width: Option<f64>,
    },
    /// Replay a stored run config, or the config echoed in a report.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum OperatorArg {
    Free,
    Dirichlet,
}

fn times(s: &str) -> Result<Vec<TimeToken>, Error> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}

fn with_potential(mut c: RunConfig, pot: &PotentialArgs) -> Result<RunConfig, Error> {
    c.potential = Some(parse_potential(pot.m, pot.potential.as_deref())?);
    c.accuracy = pot.accuracy;
    Ok(c)
}

fn with_set(mut c: RunConfig, set: &SetArgs) -> Result<RunConfig, Error> {
    c.set = Some(parse_set(set.set.as_deref(), set.set_file.as_ref())?);
    Ok(c)
}

fn build_config(cmd: &Cmd, seed: u64) -> Result<RunConfig, Error> {
    let c = match cmd {
        Cmd::Spectrum { pot, k } => {
            let mut c = with_potential(RunConfig::new(Command::Spectrum, seed), pot)?;
            c.k_max = Some(*k);
            c
        }
        Cmd::Setmass { pot, set, k, horizon, levels } => {
            let mut c = with_set(with_potential(RunConfig::new(Command::Setmass, seed), pot)?, set)?;
            c.k_max = Some(*k);
            c.horizon = *horizon;
            c.levels = levels.as_deref().map(parse_usize_list).transpose()?.unwrap_or_default();
            c
        }
        Cmd::Wkb { pot, levels } => {
            let mut c = with_potential(RunConfig::new(Command::Wkb, seed), pot)?;
            c.levels = parse_usize_list(levels)?;
            c
        }
        Cmd::Mintime { set, times: t, ks, horizon } => {
            let mut c = with_set(RunConfig::new(Command::Mintime, seed), set)?;
            c.t_grid = times(t)?;
            c.k_grid = parse_f64_list(ks)?;
            c.horizon = *horizon;
            c
        }
        Cmd::Resolvent { set, lambda, lambda_step, operator, m, half_width, nodes, big_m, m_w } => {
            let mut c = with_set(RunConfig::new(Command::Resolvent, seed), set)?;
            c.lambda_grid = parse_range(lambda, *lambda_step)?;
            c.operator = Some(match operator {
                OperatorArg::Free => OperatorKind::Free,
                OperatorArg::Dirichlet => OperatorKind::Dirichlet,
            });
            if matches!(operator, OperatorArg::Dirichlet) {
                c.potential = Some(parse_potential(*m, None)?);
            }
            c.half_width = *half_width;
            c.nodes = *nodes;
            c.big_m = big_m.as_deref().map(parse_f64_list).transpose()?.unwrap_or_default();
            c.m_w = m_w.as_deref().map(parse_f64_list).transpose()?.unwrap_or_default();
            c
        }
        Cmd::Twotime { r, s, times: t, family, modes, half_width } => {
            let mut c = RunConfig::new(Command::Twotime, seed);
            c.radii = Some(match parse_f64_list(r)?.as_slice() {
                [a] => [*a, *a],
                [a, b] => [*a, *b],
                _ => return Err(Error::InvalidArgument(format!("--r takes one or two radii, got '{r}'"))),
            });
            c.s_time = Some(s.parse()?);
            c.t_grid = times(t)?;
            c.family_size = Some(*family);
            c.k_max = *modes;
            c.half_width = *half_width;
            c
        }
        Cmd::Run { .. } => unreachable!("replay configs are loaded from disk"),
    };
    Ok(c)
}

fn load_config(path: &Path) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    let v = match v.get("config") {
        Some(c) if v.get("schema_version").is_some() => c.clone(),
        _ => v,
    };
    serde_json::from_value(v).map_err(|e| Error::InvalidArgument(format!("bad run config {}: {e}", path.display())))
}

enum Failure {
    Module(Error),
    Io(std::io::Error),
}

fn execute(config: RunConfig) -> Result<PathBuf, Failure> {
    let clock = Stopwatch::start();
    let outcome = commands::run(&config).map_err(Failure::Module)?;
    let dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        artifact: Artifact { name: ARTIFACT_NAME.into(), version: ARTIFACT_VERSION.into() },
        files: outcome.outputs.names(),
        config,
        results: outcome.results,
        claims: outcome.claims,
        wall_clock: clock.stop(),
    };
    outcome.outputs.flush(&dir).map_err(Failure::Io)?;
    let path = report_path(&dir, doc.config.command.name());
    write_atomic(&path, &to_json(&doc).map_err(Failure::Io)?).map_err(Failure::Io)?;
    Ok(path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.command {
        Cmd::Run { config } => load_config(config).map(|mut c| {
            if cli.out.is_some() {
                c.out_dir = cli.out.clone();
            }
            c
        }),
        cmd => build_config(cmd, cli.seed).map(|mut c| {
            c.out_dir = cli.out.clone();
            c
        }),
    };
    let result = config.map_err(Failure::Module).and_then(execute);
    match result {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(Failure::Module(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
