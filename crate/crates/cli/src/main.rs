use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use teelab_cli::config::{parse_list, Grid, Kind, ScenarioConfig, Units};
use teelab_cli::report::to_json;
use teelab_cli::scenario::{run, Clock};
use teelab_cli::selftest::selftest;
use teelab_cli::sweep::{sweep, write_csv, write_outputs};
use teelab_cli::{CliError, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_PASS};

#[derive(Parser)]
#[command(name = "teelab", version, about = "Exact checks of topological entanglement entropy lower bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON scenario file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report path (a directory for sweeps); stdout when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    units: Option<Units>,
    /// Add wall-clock phases to the report.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum dimensions, fixed point, K and the Taylor sweep for a category.
    Fusion(Params),
    /// Constrained-ring sector family.
    Ring(Params),
    /// Qudit stabilizer annulus.
    Stabilizer(Params),
    /// Replay the inequality chain on a trace.
    Audit(Params),
    /// Run a scenario over a parameter grid.
    Sweep(SweepParams),
    /// Built-in end-to-end checks.
    Selftest,
}

#[derive(Args, Default)]
struct Params {
    /// Bundled category name or path to a category file.
    #[arg(long)]
    category: Option<String>,
    #[arg(long)]
    q: Option<u32>,
    /// Ring arcs `A,B1,C,B2`.
    #[arg(long)]
    arcs: Option<String>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    size: Option<usize>,
    /// One width, or `A,B,C`.
    #[arg(long)]
    widths: Option<String>,
    /// Sector `e,m`.
    #[arg(long)]
    sector: Option<String>,
    /// Report every sector (the default).
    #[arg(long, conflicts_with = "sector")]
    all_sectors: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eps_points: Option<usize>,
}

#[derive(Args)]
struct SweepParams {
    /// Scenario run at each grid point.
    #[arg(long, value_enum)]
    target: Option<Kind>,
    #[command(flatten)]
    fixed: Params,
    /// Grid lists: comma-separated values or inclusive ranges `a..=b`.
    #[arg(long = "categories")]
    categories: Option<String>,
    #[arg(long = "q-values")]
    q_values: Option<String>,
    #[arg(long = "p-values")]
    p_values: Option<String>,
    #[arg(long = "width-values")]
    width_values: Option<String>,
    #[arg(long = "n-values")]
    n_values: Option<String>,
}

impl Params {
    fn into_config(self, kind: Kind) -> Result<ScenarioConfig, CliError> {
        Ok(ScenarioConfig {
            kind: Some(kind),
            category: self.category,
            q: self.q,
            arcs: self.arcs.as_deref().map(parse_list).transpose()?,
            p: self.p,
            size: self.size,
            widths: self.widths.as_deref().map(parse_list).transpose()?,
            sector: self.sector.as_deref().map(parse_list).transpose()?,
            n: self.n,
            trace: self.trace,
            epsilon: self.epsilon,
            alpha: self.alpha,
            eps_points: self.eps_points,
            ..Default::default()
        })
    }
}

impl SweepParams {
    fn into_config(self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = self.fixed.into_config(Kind::Sweep)?;
        cfg.target = self.target;
        cfg.grid = Grid {
            category: self.categories.map(|s| s.split(',').map(|c| c.trim().to_string()).collect()).unwrap_or_default(),
            q: self.q_values.as_deref().map(parse_list).transpose()?.unwrap_or_default(),
            p: self.p_values.as_deref().map(parse_list).transpose()?.unwrap_or_default(),
            widths: self.width_values.as_deref().map(parse_list).transpose()?.unwrap_or_default(),
            n: self.n_values.as_deref().map(parse_list).transpose()?.unwrap_or_default(),
        };
        Ok(cfg)
    }
}

fn resolve(file: Option<&PathBuf>, mut flags: ScenarioConfig, output: Option<PathBuf>, units: Option<Units>) -> Result<ScenarioConfig, CliError> {
    let base = match file {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if base.kind.is_some() && base.kind != flags.kind {
        return Err(CliError::Config(format!("config file is for {:?}, command is {:?}", base.kind, flags.kind)));
    }
    flags.output = output;
    flags.units = units;
    Ok(base.overridden_by(&flags))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    let start = Instant::now();
    let flags = match cli.command {
        Command::Fusion(p) => p.into_config(Kind::Fusion)?,
        Command::Ring(p) => p.into_config(Kind::Ring)?,
        Command::Stabilizer(p) => p.into_config(Kind::Stabilizer)?,
        Command::Audit(p) => p.into_config(Kind::Audit)?,
        Command::Sweep(p) => p.into_config()?,
        Command::Selftest => {
            let lines = selftest()?;
            for l in &lines {
                println!("selftest {}: {} ({})", l.name, if l.ok { "PASS" } else { "FAIL" }, l.detail);
            }
            return Ok(if lines.iter().all(|l| l.ok) { EXIT_PASS } else { EXIT_CHECK_FAILED });
        }
    };
    let cfg = resolve(cli.config.as_ref(), flags, cli.output, cli.units)?;

    if cfg.kind == Some(Kind::Sweep) {
        let outcome = sweep(&cfg)?;
        match &cfg.output {
            Some(dir) => write_outputs(&outcome, cfg.units(), dir)?,
            None => write_csv(&outcome.rows, cfg.units(), std::io::stdout())?,
        }
        if cli.timings {
            eprintln!("sweep: {} points in {:.3} s", outcome.rows.len(), start.elapsed().as_secs_f64());
        }
        return Ok(match outcome.first_failure() {
            None => EXIT_PASS,
            Some(row) => {
                eprintln!("grid point {} failed: {}", row.point, row.failure);
                EXIT_CHECK_FAILED
            }
        });
    }

    let mut clock = Clock::default();
    let mut report = run(&cfg, &mut clock)?;
    if cli.timings {
        clock.phases.insert("total".into(), start.elapsed().as_secs_f64());
        report.timings = Some(clock.phases);
    }
    write_out(cfg.output.as_ref(), &to_json(&report))?;
    Ok(match report.first_failure() {
        None => EXIT_PASS,
        Some(c) => {
            eprintln!("check failed: {c}");
            EXIT_CHECK_FAILED
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
    }
}
