use clap::{Args, Parser, Subcommand};
use gpdd_cli::config::{self, ResolvedConfig};
use gpdd_cli::{basis, sweep, verify, CliError, EXIT_VERIFICATION};
use gpdd_core::orthopoly::Precision;
use std::path::PathBuf;
use std::process::ExitCode;

/// Dimension-wise orthogonal polynomial expansions for dependent inputs:
/// build basis tables, run accuracy/cost sweeps, verify against oracles.
#[derive(Parser)]
#[command(name = "gpdd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the standardized basis polynomials as a text table.
    Basis(Common),
    /// Sweep truncation parameters and report relative variance errors.
    Sweep(Common),
    /// Run the oracle cross-checks and property suites.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Numeric path: exact-rational construction or plain f64.
    #[arg(long, value_parser = parse_precision)]
    precision: Option<Precision>,
    /// Worker threads for sweep rows (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// Monte Carlo sample count for the verification suite.
    #[arg(long)]
    mc_samples: Option<usize>,
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    match s {
        "double" => Ok(Precision::Double),
        "extended" => Ok(Precision::Extended),
        other => Err(format!("unknown precision '{other}' (double, extended)")),
    }
}

fn resolve(common: &Common) -> Result<ResolvedConfig, CliError> {
    let file = config::load(&common.config)?;
    let base = common
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut cfg = config::resolve(file, &base)?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(p) = common.precision {
        cfg.precision = p;
    }
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    if let Some(n) = common.mc_samples {
        cfg.verify.mc_samples = n;
    }
    Ok(cfg)
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Basis(common) => {
            let cfg = resolve(common)?;
            let report = basis::run_basis(&cfg)?;
            basis::write_outputs(&report, &cfg)?;
            print!("{}", report.table);
            Ok(0)
        }
        Command::Sweep(common) => {
            let cfg = resolve(common)?;
            let report = sweep::run_sweep(&cfg)?;
            sweep::write_outputs(&report, &cfg)?;
            print!("{}", report.to_csv(true));
            for row in &report.rows {
                if let Some(err) = &row.error {
                    eprintln!(
                        "row {} s={:?} order={} failed: {err}",
                        row.method, row.interaction_order, row.order
                    );
                }
            }
            if report.any_failed() {
                Ok(gpdd_cli::EXIT_NUMERICAL)
            } else {
                Ok(0)
            }
        }
        Command::Verify(common) => {
            let cfg = resolve(common)?;
            let report = verify::run_verify(&cfg)?;
            verify::write_outputs(&report, &cfg)?;
            print!("{}", report.render());
            if report.failures() > 0 {
                Ok(EXIT_VERIFICATION)
            } else {
                Ok(0)
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
