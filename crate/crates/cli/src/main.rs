use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gapkin_cli::{config_error_exit, exit_code, run, Command, Ctx, RunConfig};

#[derive(Parser)]
#[command(name = "gapkin", version, about = "Kinetic transport with diffuse walls: checks, simulation and spectral scans")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory for CSVs, the resolved config and the report
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// master seed, overrides sim.seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads
    #[arg(long, global = true, env = "GAPKIN_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// change-of-variables identity, flatness constant, travel-time bound
    GeometryCheck,
    /// kernel integrability, normalization and partly diffuse constants
    ValidateWall,
    /// evolve an ensemble and record generation masses
    Simulate,
    /// locate lambda with 1 in the spectrum of the boundary operator
    Spectrum,
    /// invariant density on the boundary grid
    Invariant,
    /// Monte Carlo generation functionals against resolvent terms
    LaplaceCheck,
    /// run the full acceptance suite
    Acceptance,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::GeometryCheck => Command::GeometryCheck,
            Cmd::ValidateWall => Command::ValidateWall,
            Cmd::Simulate => Command::Simulate,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Invariant => Command::Invariant,
            Cmd::LaplaceCheck => Command::LaplaceCheck,
            Cmd::Acceptance => Command::Acceptance,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return config_error_exit("--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p),
        None if matches!(cli.cmd, Cmd::Acceptance) => Ok(gapkin_cli::acceptance::preset(0.5, "")),
        None => return config_error_exit("--config is required"),
    };
    let cmd: Command = cli.cmd.into();
    let result = cfg.and_then(|c| Ctx::new(c, cli.out.as_deref(), cli.seed)).and_then(|ctx| run(cmd, &ctx));
    let code = exit_code(&result);
    match &result {
        Ok(r) => println!("{}: {}", cmd.name(), if r.passed() { "pass" } else { "FAIL" }),
        Err(e) => eprintln!("error: {e:#}"),
    }
    ExitCode::from(code as u8)
}
