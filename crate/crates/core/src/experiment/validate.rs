use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversarial::{certify_approachable, VectorPayoffGame};
use crate::network::verify_joint_connectivity;

use super::{ensure_nonempty, ExperimentConfig, PolicySpec};

/// Weight matrices checked per schedule phase, at most.
const MAX_SAMPLED_PHASES: usize = 4096;
const CERTIFY_DIRECTIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationEntry {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn entry(&self, check: &str) -> Option<&ValidationEntry> {
        self.entries.iter().find(|e| e.check == check)
    }
}

struct Report(Vec<ValidationEntry>);

impl Report {
    fn push(&mut self, check: &str, passed: bool, detail: impl Into<String>) {
        self.0.push(ValidationEntry {
            check: check.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn finish(self) -> ValidationReport {
        ValidationReport {
            passed: self.0.iter().all(|e| e.passed),
            entries: self.0,
        }
    }
}

/// Checks a config without running the dynamics: target nonempty, weight
/// matrices doubly stochastic with positive diagonal on every schedule
/// phase, joint connectivity over windows of length `Q` up to the horizon,
/// and for adversarial policies a sampled approachability certificate.
/// Problems are report entries, never errors.
pub fn validate(config: &ExperimentConfig) -> ValidationReport {
    let mut r = Report(Vec::new());
    match config.check() {
        Ok(()) => r.push("config", true, "structure ok"),
        Err(e) => {
            r.push("config", false, e.to_string());
            return r.finish();
        }
    }

    let (game, target) = match config.load_target() {
        Ok(t) => t,
        Err(e) => {
            r.push("target", false, e.to_string());
            return r.finish();
        }
    };
    match ensure_nonempty(game.as_ref(), &target, &config.core_options()) {
        Ok(w) => r.push("target", true, format!("nonempty, witness {w:?}")),
        Err(e) => r.push("target", false, e.to_string()),
    }

    let n = match config.player_count(game.as_ref()) {
        Ok(n) => n,
        Err(e) => {
            r.push("players", false, e.to_string());
            return r.finish();
        }
    };

    match config.build_schedule(n) {
        Ok(schedule) => {
            let phases = schedule.period().min(MAX_SAMPLED_PHASES);
            let mut problems = Vec::new();
            for t in 0..phases {
                let v = schedule
                    .weights_at(t)
                    .invariant_violations(Some(schedule.edges_at(t)));
                problems.extend(v.into_iter().map(|m| format!("t={t}: {m}")));
            }
            r.push(
                "weights",
                problems.is_empty(),
                if problems.is_empty() {
                    format!("{phases} phase(s) doubly stochastic with positive diagonal")
                } else {
                    problems.join("; ")
                },
            );
            let q = config
                .schedule
                .window
                .unwrap_or_else(|| schedule.period_hint());
            let rep = verify_joint_connectivity(&schedule, q, config.steps);
            let detail = match rep.first_failing_window {
                Some(k) => format!("window {k} (Q={q}) is not connected"),
                None => format!("{} window(s) of length {q} connected", rep.windows_checked),
            };
            let ok = rep.connected && rep.windows_checked > 0;
            let detail = if rep.windows_checked == 0 {
                format!("horizon {} is shorter than Q={q}", config.steps)
            } else {
                detail
            };
            r.push("connectivity", ok, detail);
        }
        Err(e) => r.push("schedule", false, e.to_string()),
    }

    match config.build_policy(target.dim()) {
        Ok(policy) => r.push("policy", true, policy.name()),
        Err(e) => r.push("policy", false, e.to_string()),
    }

    if let PolicySpec::Adversarial { game: src, .. } = &config.policy {
        let certified = src
            .load(&config.base_dir)
            .and_then(|f| VectorPayoffGame::try_from(&f))
            .and_then(|g| {
                let seed = config.seed_list()?.first().copied().unwrap_or(0);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                certify_approachable(&g, &target, CERTIFY_DIRECTIONS, &mut rng)
            });
        match certified {
            Ok(c) => r.push(
                "approachability",
                c.all_passed,
                format!(
                    "{} sampled direction(s), worst margin {:e}",
                    c.checks.len(),
                    c.worst_margin
                ),
            ),
            Err(e) => r.push("approachability", false, e.to_string()),
        }
    }

    match config.initial_estimates(n, target.dim(), game.as_ref()) {
        Ok(_) => r.push(
            "initial",
            true,
            format!("{n} estimate(s) in dimension {}", target.dim()),
        ),
        Err(e) => r.push("initial", false, e.to_string()),
    }
    r.finish()
}
