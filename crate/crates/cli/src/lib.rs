//! Command implementations behind the `gapkin` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::path::Path;

pub use config::{ConfigError, RunConfig};
pub use output::Output;
pub use report::{CheckRow, RunReport};

/// Resolved config plus the output sink.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub cfg: RunConfig,
    pub out: Output,
}

impl Ctx {
    /// Applies the seed override, then echoes the resolved config.
    pub fn new(mut cfg: RunConfig, out_dir: Option<&Path>, seed: Option<u64>) -> anyhow::Result<Self> {
        if let Some(s) = seed {
            cfg.sim.seed = s;
        }
        let out = Output::new(out_dir, cfg.hash(), cfg.sim.seed)?;
        out.write("config.resolved.toml", &cfg.resolved())?;
        Ok(Self { cfg, out })
    }

    /// In-memory context, used by tests and the determinism check.
    pub fn detached(cfg: RunConfig) -> Self {
        let out = Output::new(None, cfg.hash(), cfg.sim.seed).expect("no directory to create");
        Self { cfg, out }
    }

    pub fn seed(&self) -> u64 {
        self.cfg.sim.seed
    }

    /// Tolerance for a named check, unless the config overrides it.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.cfg.acceptance.tolerances.get(name).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GeometryCheck,
    ValidateWall,
    Simulate,
    Spectrum,
    Invariant,
    LaplaceCheck,
    Acceptance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GeometryCheck => "geometry-check",
            Command::ValidateWall => "validate-wall",
            Command::Simulate => "simulate",
            Command::Spectrum => "spectrum",
            Command::Invariant => "invariant",
            Command::LaplaceCheck => "laplace-check",
            Command::Acceptance => "acceptance",
        }
    }
}

/// Runs one command and writes its report.
pub fn run(cmd: Command, ctx: &Ctx) -> anyhow::Result<RunReport> {
    let report = match cmd {
        Command::GeometryCheck => commands::geometry::run(ctx)?,
        Command::ValidateWall => commands::wall::run(ctx)?,
        Command::Simulate => commands::simulate::run(ctx)?,
        Command::Spectrum => commands::spectrum::run(ctx)?,
        Command::Invariant => commands::invariant::run(ctx)?,
        Command::LaplaceCheck => commands::laplace::run(ctx)?,
        Command::Acceptance => acceptance::run(ctx, &acceptance::ALL)?,
    };
    report.write(&ctx.out)?;
    Ok(report)
}

/// Exit code for a finished run or an error: 0 pass, 1 check failure or
/// numerical error, 2 config error.
pub fn exit_code(result: &anyhow::Result<RunReport>) -> i32 {
    match result {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => 2,
        Err(_) => 1,
    }
}

/// Prints a config error and returns exit code 2.
pub fn config_error_exit(msg: &str) -> std::process::ExitCode {
    eprintln!("error: {}", ConfigError(msg.into()));
    std::process::ExitCode::from(2)
}
