//! `raybound`: runs transport solves, jump scans, sinogram experiments and
//! reconstructions from a TOML run config.

mod failure;
mod manifest;
mod stages;
mod verify;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use raybound::config::RunConfig;
use raybound::Error;

use failure::Failure;
use stages::Run;

#[derive(Parser)]
#[command(name = "raybound", version, about = "Transport solves, boundary jumps and jump tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the transport problem and dump the field.
    Solve(Common),
    /// Run the property checks and write one report per check.
    Verify(Common),
    /// Measure boundary jumps from the solved field.
    JumpScan(Common),
    /// Build a sinogram from jump experiments.
    Sinogram(Common),
    /// Filtered backprojection of the sinogram.
    Reconstruct(Common),
    /// Every stage in order.
    All(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; defaults to the config's `out`, then `out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides `solver.tol`.
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Solve(c)
            | Command::Verify(c)
            | Command::JumpScan(c)
            | Command::Sinogram(c)
            | Command::Reconstruct(c)
            | Command::All(c) => c,
        }
    }
}

fn load(common: &Common) -> Result<Run, Failure> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::config("--config", format!("{}: {e}", common.config.display())))?;
    let mut config = RunConfig::from_toml(&text)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(tol) = common.tol {
        config.solver.tol = tol;
    }
    let dir = common
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Run::new(config, dir)
}

fn verify(run: &mut Run) -> Result<(), Failure> {
    let checks = verify::run_verify(run)?;
    for c in &checks {
        println!("{:<22} {}  {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failed))
    }
}

fn execute(command: &Command) -> Result<(), Failure> {
    let common = command.common();
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("--threads", e.to_string()))?;
    }
    let mut run = load(common)?;
    match command {
        Command::Solve(_) => stages::run_solve(&mut run)?,
        Command::Verify(_) => verify(&mut run)?,
        Command::JumpScan(_) => stages::run_jump_scan(&mut run)?,
        Command::Sinogram(_) => stages::run_sinogram(&mut run)?,
        Command::Reconstruct(_) => stages::run_reconstruct(&mut run)?,
        Command::All(_) => {
            stages::run_solve(&mut run)?;
            stages::run_jump_scan(&mut run)?;
            let verdict = verify(&mut run);
            if run.problem.dim() == 2 && run.problem.geometry.radius().is_some() {
                stages::run_sinogram(&mut run)?;
                stages::run_reconstruct(&mut run)?;
            } else {
                log::warn!("sinogram and reconstruction need a disk; skipped");
            }
            verdict?;
        }
    }
    for (name, stage) in &run.manifest.stages {
        log::debug!("stage {name}: {:.2} s", stage.seconds);
    }
    println!("wrote {}", run.dir.join(manifest::MANIFEST).display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RAYBOUND_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
