use std::path::PathBuf;
use std::process::ExitCode;

use boussinesq_cli::{run, CliError, Command, ExperimentConfig, Overrides, DEFAULT_OUT_DIR, OUT_DIR_ENV};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boussinesq", version, about = "Solvers and estimate probes for the periodic good Boussinesq equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Picard solve with a Lawson RK4 cross-check
    Solve,
    /// Linear and Duhamel estimate probes
    Linear,
    /// Random-field ratios and sup-quantity estimates for the bilinear estimate
    ProbeBilinear,
    /// Counterexample sweep in N with fitted growth slope
    Sharpness,
    /// Numerical checks of the four auxiliary bounds
    Lemmas,
    /// Boussinesq vs Schrödinger weighted norm comparison
    Norms,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; every key is optional
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: config `output.dir`, then $BOUSSINESQ_OUT_DIR, then ./results]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: one per core)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Number of physical grid points (even)
    #[arg(long, global = true)]
    modes: Option<usize>,
    #[arg(long, global = true)]
    tau_max: Option<f64>,
    /// Number of tau nodes (odd)
    #[arg(long, global = true)]
    tau_points: Option<usize>,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Linear => Command::Linear,
            Cmd::ProbeBilinear => Command::ProbeBilinear,
            Cmd::Sharpness => Command::Sharpness,
            Cmd::Lemmas => Command::Lemmas,
            Cmd::Norms => Command::Norms,
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides { seed: c.seed, modes: c.modes, tau_max: c.tau_max, tau_points: c.tau_points });
    let out = c
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = c.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
    let cmd: Command = cli.command.into();
    let summary = pool.install(|| run(cmd, &cfg, &out))?;
    let failed: Vec<&str> = summary.verdicts.iter().filter(|v| !v.pass).map(|v| v.name.as_str()).collect();
    println!(
        "{} {} -> {} ({} checks, {} failed{})",
        summary.experiment_id,
        if summary.exit_code() == 0 { "ok" } else { "not converged" },
        out.display(),
        summary.verdicts.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(": {}", failed.join(", ")) }
    );
    Ok(summary.exit_code())
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
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
