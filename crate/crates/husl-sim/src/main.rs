//! Command-line front end: run scenarios, train the footstep policy,
//! analyze trajectory logs, and compare analysis reports.
//!
//! Exit codes: 0 on success, 2 when a simulation diverges (the partial log
//! is still written), 1 on usage or I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use husl_sim::harness::{
    analyze_run, compare_reports, run_scenario, AnalysisReport, Config, RunLog, RunStatus,
};
use husl_sim::learning::{save_checkpoint, train, write_training_log, EnvConfig};
use husl_sim::model::ModelParams;

#[derive(Parser)]
#[command(name = "husl-sim", version, about = "Biped walker with balancing arm appendages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one walking scenario and write the trajectory log as CSV.
    Simulate {
        /// JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV trajectory log.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the footstep residual policy; writes a checkpoint and a log.
    Train {
        /// JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output policy checkpoint (JSON).
        #[arg(long)]
        checkpoint: PathBuf,
        /// Output per-update training log (CSV).
        #[arg(long)]
        log: PathBuf,
    },
    /// Compute gait metrics for a run against a baseline run.
    Analyze {
        /// Trajectory log of the run to analyze.
        #[arg(long)]
        run: PathBuf,
        /// Trajectory log of the baseline run.
        #[arg(long)]
        baseline: PathBuf,
        /// Output report (JSON).
        #[arg(long)]
        report: PathBuf,
    },
    /// Render a comparison table from two or more analysis reports.
    Compare {
        /// Report JSON files (repeat the flag or pass several paths).
        #[arg(long, num_args = 1.., required = true)]
        report: Vec<PathBuf>,
        /// Output text table.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap exits with 2 by convention; this tool reserves 2 for
            // simulation divergence, so usage problems map to 1. Requests
            // for --help/--version are not errors.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Train { config, checkpoint, log } => train_policy(&config, &checkpoint, &log),
        Command::Analyze { run, baseline, report } => analyze(&run, &baseline, &report),
        Command::Compare { report, out } => compare(&report, &out),
    }
}

fn simulate(config: &Path, out: &Path) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = Config::load(config)?;
    let outcome = run_scenario(&cfg)?;
    outcome.log.write(out)?;
    match outcome.status {
        RunStatus::Completed => {
            println!("wrote {} rows to {}", outcome.log.rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        RunStatus::Diverged { at_step } => {
            eprintln!(
                "run diverged at step {at_step}; partial log ({} rows) written to {}",
                outcome.log.rows.len(),
                out.display()
            );
            Ok(ExitCode::from(2))
        }
    }
}

fn train_policy(
    config: &Path,
    checkpoint: &Path,
    log: &Path,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = Config::load(config)?;
    // Rollouts use the full model (arm bodies present; the curriculum
    // decides pose and payload), the configured gait reference, and the
    // configured balance gains for the held-arm PD.
    let env = EnvConfig {
        model: cfg.model.clone(),
        motion: cfg.motion(),
        bounds: cfg.bounds(),
        gains: cfg.balance.clone(),
        reward: cfg.learning.reward,
        curriculum: cfg.learning.curriculum.clone(),
        control_substeps: cfg.learning.control_substeps,
        episode_max_steps: cfg.learning.episode_max_steps,
        init_noise: cfg.learning.init_noise,
    };
    let result = train(&cfg.learning, env)?;
    save_checkpoint(checkpoint, &result.params)?;
    write_training_log(log, &result.log)?;
    let last = result.log.last();
    println!(
        "trained {} steps over {} updates; final mean return {:.3}; checkpoint {}",
        cfg.learning.total_steps,
        result.log.len(),
        last.map_or(f64::NAN, |r| r.mean_return),
        checkpoint.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn analyze(run: &Path, baseline: &Path, report: &Path) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let run_log = RunLog::read(run)?;
    let baseline_log = RunLog::read(baseline)?;
    let name = run
        .file_stem()
        .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
    // Cycle segmentation needs the stride period, which the log format does
    // not carry; runs produced with a non-default stride must be analyzed
    // against the same baseline anyway, and the peak picker tolerates
    // moderate mismatch through its separation fraction.
    let stride = ModelParams::default().stride_period();
    let analysis = analyze_run(&name, &run_log, &baseline_log, stride)?;
    std::fs::write(report, analysis.to_json()?)?;
    println!("wrote report to {}", report.display());
    Ok(ExitCode::SUCCESS)
}

fn compare(reports: &[PathBuf], out: &Path) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut loaded = Vec::with_capacity(reports.len());
    for path in reports {
        let text = std::fs::read_to_string(path)?;
        loaded.push(AnalysisReport::from_json(&text)?);
    }
    let table = compare_reports(&loaded)?;
    std::fs::write(out, &table)?;
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}
