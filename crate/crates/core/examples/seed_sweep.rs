//! Sweeps seeds of the adversarial preset and writes traces and a summary.
//!
//! Usage: `cargo run --release --example seed_sweep -- [output-dir]`

use tu_consensus::experiment::{run_experiment, ExperimentConfig, SeedList};

fn main() -> anyhow::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/seed_sweep".into());
    let mut cfg = ExperimentConfig::preset("adversarial-2x2")?;
    cfg.seeds = Some(SeedList::Range("1..10".into()));
    cfg.output = Some(out.into());

    let report = run_experiment(&cfg)?;
    for r in &report.runs {
        println!(
            "seed {:>2}: t=500 {:.3e}, t=5000 {:.3e}",
            r.seed, r.checkpoint_distances[&500], r.checkpoint_distances[&5000]
        );
    }
    let a = &report.aggregate;
    println!("medians by checkpoint: {:?}", a.median_checkpoint_distances);
    println!("wrote {}", cfg.output_dir().join("summary.json").display());
    Ok(())
}
