//! Approaching a small box around (1/2, 1/2) in a 2x2 vector-payoff game
//! against three opponent models.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tu_consensus::adversarial::{certify_approachable, AdversarialPolicy, Opponent};
use tu_consensus::engine::{run, EngineConfig, EngineState};
use tu_consensus::experiment::{central_box, matching_vectors_game};
use tu_consensus::network::{schedule_round_robin, Topology};

fn main() -> anyhow::Result<()> {
    let game = matching_vectors_game();
    let target = central_box();

    let report = certify_approachable(&game, &target, 32, &mut ChaCha8Rng::seed_from_u64(0))?;
    println!(
        "approachable in all {} sampled directions: {} (worst margin {:.3e})",
        report.checks.len(),
        report.all_passed,
        report.worst_margin
    );

    let schedule = schedule_round_robin(4, Topology::Cycle, 2)?;
    for opponent in [Opponent::WorstCase, Opponent::Uniform, Opponent::Fixed(0)] {
        let policy = AdversarialPolicy::new(game.clone(), opponent, 1e-6)?;
        let state = EngineState::new(vec![vec![0.0, 0.0]; 4], 1)?;
        let out = run(
            &EngineConfig::default(),
            &schedule,
            &policy,
            &target,
            state,
            5000,
        )?;
        let at = |t: usize| out.trace[t - 1].total_distance;
        println!(
            "{opponent:?}: total distance t=100 {:.3e}, t=500 {:.3e}, t=5000 {:.3e}",
            at(100),
            at(500),
            at(5000)
        );
    }
    Ok(())
}
