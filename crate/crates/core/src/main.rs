use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use tu_consensus::experiment::{
    parse_seed_range, run_experiment, validate, ExperimentConfig, Mode, Overrides,
};

#[derive(Parser)]
#[command(version, about = "Doubly averaging reward allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a preset.
    Run(RunArgs),
}

/// Flags override the matching fields of the config file or preset.
#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// paper-sim-4p or adversarial-2x2.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Inclusive range `a..b`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// Without --config or --preset, picks the matching preset.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Fail on the first invariant violation instead of counting.
    #[arg(long)]
    strict: bool,
    /// Check the config and exit without running.
    #[arg(long)]
    validate_only: bool,
}

fn load(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset, args.mode) {
        (Some(path), _, _) => ExperimentConfig::from_file(path)?,
        (None, Some(name), _) => ExperimentConfig::preset(name)?,
        (None, None, Some(Mode::Adversarial)) => ExperimentConfig::preset("adversarial-2x2")?,
        (None, None, _) => ExperimentConfig::preset("paper-sim-4p")?,
    };
    let seeds = match (&args.seeds, args.seed) {
        (Some(r), _) => Some(parse_seed_range(r)?),
        (None, Some(s)) => Some(vec![s]),
        (None, None) => None,
    };
    cfg.apply(&Overrides {
        seeds,
        steps: args.steps,
        output: args.output.clone(),
        strict: args.strict,
        mode: args.mode,
    })?;
    Ok(cfg)
}

fn run(args: RunArgs) -> anyhow::Result<bool> {
    let cfg = load(&args)?;
    if args.validate_only {
        let report = validate(&cfg);
        for e in &report.entries {
            let mark = if e.passed { "ok  " } else { "FAIL" };
            println!("{mark} {:<16} {}", e.check, e.detail);
        }
        return Ok(report.passed);
    }
    let report = run_experiment(&cfg).context("experiment failed")?;
    let out = cfg.output_dir();
    for r in &report.runs {
        let point = match &r.consensus_point {
            Some(p) => format!("{p:.4?} member={}", r.core_membership == Some(true)),
            None => "no consensus".into(),
        };
        println!(
            "seed {:>4}: total_dist={:.3e} consensus_err={:.3e} {point}",
            r.seed, r.final_total_distance, r.final_consensus_error
        );
    }
    let a = &report.aggregate;
    println!(
        "{} run(s): median total_dist={:.3e}, mean {:.3e}, max {:.3e}",
        a.runs, a.median_total_distance, a.mean_total_distance, a.max_total_distance
    );
    for (t, d) in &a.median_checkpoint_distances {
        println!("median total_dist at t={t}: {d:.3e}");
    }
    if report.has_violations() {
        eprintln!(
            "warning: {} distance-increase and {} barycenter violation(s); rerun with --strict to fail",
            a.lemma1_violations, a.lemma3_violations
        );
    }
    println!("wrote {}", out.join("summary.json").display());
    if report.runs.is_empty() {
        bail!("no runs");
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
