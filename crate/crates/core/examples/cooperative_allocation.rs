//! Runs the four-player preset in memory and prints how the estimates
//! approach the core and each other.

use tu_consensus::experiment::{Experiment, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::preset("paper-sim-4p")?;
    cfg.steps = 5000;
    let exp = Experiment::from_config(&cfg)?;
    let out = exp.run_seed(7)?;

    println!(
        "{:>6} {:>12} {:>12} {:>12}",
        "t", "total dist", "consensus", "sqrt(t)*dist"
    );
    for rec in out
        .trace
        .iter()
        .filter(|r| r.t.is_power_of_two() || r.t == cfg.steps)
    {
        println!(
            "{:>6} {:>12.4e} {:>12.4e} {:>12.4}",
            rec.t,
            rec.total_distance,
            rec.consensus_error,
            (rec.t as f64).sqrt() * rec.total_distance
        );
    }
    let summary = exp.summarize(7, &out)?;
    println!("consensus point {:.4?}", summary.consensus_point);
    println!("in core at tol 1e-3: {:?}", summary.core_membership);
    println!(
        "violations: distance increase {}, barycenter {}",
        summary.lemma1_violations, summary.lemma3_violations
    );
    Ok(())
}
