//! Experiment configs, presets, seed sweeps, validation and summary reports.
//!
//! A run writes `trace_<seed>.csv` per seed and one `summary.json` into the
//! output directory. Seeds run in parallel; each owns its trace file.

mod config;
mod validate;

pub use config::{
    central_box, matching_vectors_game, parse_seed_range, ExperimentConfig, InitialSpec,
    MissingSpec, Mode, Overrides, PolicySpec, ScheduleMode, ScheduleSpec, SeedList, Source,
    Tolerances, CENTRAL_BOX_HALF_WIDTH, PRESETS,
};
pub use validate::{validate, ValidationEntry, ValidationReport};

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::adversarial::{AdversarialPolicy, VectorPayoffGame};
use crate::engine::{
    run, write_trace_csv, CoreApproachPolicy, EngineConfig, EngineState, RewardPolicy, RunOutcome,
};
use crate::error::{Error, Result};
use crate::game::{
    build_core_with, core_membership_with, is_core_nonempty_with, CharacteristicFunction,
    CoreOptions,
};
use crate::network::{
    schedule_explicit, schedule_round_robin, schedule_static, schedule_static_edges, GraphSchedule,
};
use crate::optim::{find_feasible_point, Polyhedron};

use config::zero_based;

/// A config with every file loaded and every object built.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub game: Option<CharacteristicFunction>,
    pub core_options: CoreOptions,
    pub target: Polyhedron,
    pub schedule: GraphSchedule,
    pub policy: Box<dyn RewardPolicy>,
    pub initial: Vec<Vec<f64>>,
    pub engine: EngineConfig,
    pub seeds: Vec<u64>,
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment")
            .field("name", &self.config.name)
            .field("players", &self.players())
            .field("dim", &self.target.dim())
            .field("policy", &self.policy.name())
            .field("seeds", &self.seeds)
            .finish()
    }
}

impl ExperimentConfig {
    pub(crate) fn core_options(&self) -> CoreOptions {
        let mut opts = CoreOptions::default();
        if let Some(m) = self.missing {
            opts.missing = m.into();
        }
        opts
    }

    /// Loads the game (if any) and builds the target polyhedron.
    pub fn load_target(&self) -> Result<(Option<CharacteristicFunction>, Polyhedron)> {
        if let Some(src) = &self.game {
            let file = src.load(&self.base_dir)?;
            let cf = CharacteristicFunction::try_from(&file)?;
            let core = build_core_with(&cf, &self.core_options())?;
            return Ok((Some(cf), core));
        }
        match &self.target {
            Some(src) => Ok((None, src.load(&self.base_dir)?)),
            None => Err(Error::Config(
                "one of `game` or `target` is required".into(),
            )),
        }
    }

    pub(crate) fn player_count(&self, game: Option<&CharacteristicFunction>) -> Result<usize> {
        match (self.players, game) {
            (Some(p), Some(g)) if p != g.n_players() => Err(Error::Config(format!(
                "field `players`: {p} does not match the {}-player game",
                g.n_players()
            ))),
            (Some(p), _) => Ok(p),
            (None, Some(g)) => Ok(g.n_players()),
            (None, None) => Err(Error::Config(
                "field `players` is required with `target`".into(),
            )),
        }
    }

    pub fn build_schedule(&self, n: usize) -> Result<GraphSchedule> {
        let s = &self.schedule;
        let topology = || {
            s.topology
                .ok_or_else(|| Error::Config("field `schedule.topology` is required".into()))
        };
        match s.mode {
            ScheduleMode::Static => match &s.edges {
                Some(edges) => schedule_static_edges(n, zero_based(edges, n)?),
                None => schedule_static(n, topology()?),
            },
            ScheduleMode::RoundRobin => schedule_round_robin(n, topology()?, s.edges_per_step),
            ScheduleMode::Explicit => {
                if s.phases.is_empty() {
                    return Err(Error::Config(
                        "field `schedule.phases` is required in explicit mode".into(),
                    ));
                }
                let phases = s
                    .phases
                    .iter()
                    .map(|p| zero_based(p, n))
                    .collect::<Result<Vec<_>>>()?;
                schedule_explicit(n, phases)
            }
        }
    }

    pub fn build_policy(&self, dim: usize) -> Result<Box<dyn RewardPolicy>> {
        match &self.policy {
            PolicySpec::CoreApproach { alpha_min } => {
                Ok(Box::new(CoreApproachPolicy::new(*alpha_min)))
            }
            PolicySpec::Adversarial {
                game,
                opponent,
                margin,
            } => {
                let file = game.load(&self.base_dir)?;
                let g = VectorPayoffGame::try_from(&file)?;
                if g.dim() != dim {
                    return Err(Error::Config(format!(
                        "payoff vectors have dimension {}, target has {dim}",
                        g.dim()
                    )));
                }
                Ok(Box::new(AdversarialPolicy::new(g, *opponent, *margin)?))
            }
        }
    }

    pub fn initial_estimates(
        &self,
        n: usize,
        dim: usize,
        game: Option<&CharacteristicFunction>,
    ) -> Result<Vec<Vec<f64>>> {
        let spec = self.initial.clone().unwrap_or(match game {
            Some(_) => InitialSpec::SelfReward { scale: None },
            None => InitialSpec::Point(vec![0.0; dim]),
        });
        let initial = match spec {
            InitialSpec::SelfReward { scale } => {
                if dim != n {
                    return Err(Error::Config(format!(
                        "`self_reward` needs one coordinate per player ({n}), target has {dim}"
                    )));
                }
                let scale = match (scale, game) {
                    (Some(s), _) => s,
                    (None, Some(g)) => g.grand_value(),
                    (None, None) => 1.0,
                };
                (0..n)
                    .map(|i| {
                        let mut v = vec![0.0; n];
                        v[i] = scale;
                        v
                    })
                    .collect()
            }
            InitialSpec::Point(p) => vec![p; n],
            InitialSpec::Estimates(e) => e,
        };
        if initial.len() != n {
            return Err(Error::Config(format!(
                "field `initial`: {} estimates for {n} players",
                initial.len()
            )));
        }
        if let Some(bad) = initial.iter().find(|v| v.len() != dim) {
            return Err(Error::Config(format!(
                "field `initial`: estimate of dimension {}, target has {dim}",
                bad.len()
            )));
        }
        Ok(initial)
    }

    fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            projection_tol: self.tolerances.projection,
            lemma1_tol: self.tolerances.lemma1,
            lemma3_tol: self.tolerances.lemma3,
            strict: self.strict,
            ..EngineConfig::default()
        }
    }
}

/// Fails with "core is empty" (or "polyhedron is empty") when the target has
/// no point.
pub fn ensure_nonempty(
    game: Option<&CharacteristicFunction>,
    target: &Polyhedron,
    opts: &CoreOptions,
) -> Result<Vec<f64>> {
    match game {
        Some(cf) => is_core_nonempty_with(cf, opts)?
            .witness()
            .map(<[f64]>::to_vec)
            .ok_or(Error::EmptyCore),
        None => find_feasible_point(target)?.ok_or(Error::EmptyPolyhedron),
    }
}

impl Experiment {
    /// Builds everything and checks the target is nonempty. No step is run.
    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        config.check()?;
        let (game, target) = config.load_target()?;
        let core_options = config.core_options();
        ensure_nonempty(game.as_ref(), &target, &core_options)?;
        let n = config.player_count(game.as_ref())?;
        let schedule = config.build_schedule(n)?;
        let policy = config.build_policy(target.dim())?;
        let initial = config.initial_estimates(n, target.dim(), game.as_ref())?;
        Ok(Experiment {
            engine: config.engine_config(),
            seeds: config.seed_list()?,
            config: config.clone(),
            game,
            core_options,
            target,
            schedule,
            policy,
            initial,
        })
    }

    pub fn players(&self) -> usize {
        self.schedule.n()
    }

    pub fn run_seed(&self, seed: u64) -> Result<RunOutcome> {
        let state = EngineState::new(self.initial.clone(), seed)?;
        run(
            &self.engine,
            &self.schedule,
            self.policy.as_ref(),
            &self.target,
            state,
            self.config.steps,
        )
    }

    /// Final metrics of one run.
    pub fn summarize(&self, seed: u64, outcome: &RunOutcome) -> Result<RunSummary> {
        let last = outcome.last();
        let tol = &self.config.tolerances;
        let declared = last.consensus_error < tol.consensus;
        let consensus_point = declared.then(|| outcome.final_state.barycenter());
        let core_membership = match &consensus_point {
            Some(x) => Some(match &self.game {
                Some(cf) => core_membership_with(x, cf, tol.membership, &self.core_options)?,
                None => self.target.contains(x, tol.membership),
            }),
            None => None,
        };
        let checkpoint_distances = self
            .config
            .checkpoints
            .iter()
            .filter(|&&c| c >= 1 && c <= outcome.trace.len())
            .map(|&c| (c, outcome.trace[c - 1].total_distance))
            .collect();
        Ok(RunSummary {
            seed,
            trace_file: trace_file_name(seed),
            final_total_distance: last.total_distance,
            final_consensus_error: last.consensus_error,
            final_scaled_error: last.scaled_error,
            consensus_point,
            core_membership,
            checkpoint_distances,
            lemma1_violations: outcome.lemma1_violations,
            lemma3_violations: outcome.lemma3_violations,
            no_decrease_steps: outcome.no_decrease_steps,
            last_no_decrease: outcome.last_no_decrease,
        })
    }
}

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_{seed}.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub trace_file: String,
    pub final_total_distance: f64,
    pub final_consensus_error: f64,
    pub final_scaled_error: f64,
    /// Barycenter of the final estimates, present only when the consensus
    /// error is below the configured threshold.
    pub consensus_point: Option<Vec<f64>>,
    pub core_membership: Option<bool>,
    pub checkpoint_distances: BTreeMap<usize, f64>,
    pub lemma1_violations: usize,
    pub lemma3_violations: usize,
    pub no_decrease_steps: usize,
    pub last_no_decrease: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub median_total_distance: f64,
    pub mean_total_distance: f64,
    pub max_total_distance: f64,
    pub median_consensus_error: f64,
    pub mean_consensus_error: f64,
    pub consensus_declared: usize,
    pub core_members: usize,
    pub median_checkpoint_distances: BTreeMap<usize, f64>,
    pub lemma1_violations: usize,
    pub lemma3_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub name: Option<String>,
    pub mode: Mode,
    pub players: usize,
    pub dim: usize,
    pub steps: usize,
    pub tolerances: Tolerances,
    pub runs: Vec<RunSummary>,
    pub aggregate: Aggregate,
}

impl SummaryReport {
    pub fn has_violations(&self) -> bool {
        self.aggregate.lemma1_violations + self.aggregate.lemma3_violations > 0
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn aggregate(runs: &[RunSummary]) -> Aggregate {
    let dist: Vec<f64> = runs.iter().map(|r| r.final_total_distance).collect();
    let cons: Vec<f64> = runs.iter().map(|r| r.final_consensus_error).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut checkpoints: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in runs {
        for (&c, &d) in &r.checkpoint_distances {
            checkpoints.entry(c).or_default().push(d);
        }
    }
    Aggregate {
        runs: runs.len(),
        median_total_distance: median(&dist),
        mean_total_distance: mean(&dist),
        max_total_distance: dist.iter().copied().fold(0.0, f64::max),
        median_consensus_error: median(&cons),
        mean_consensus_error: mean(&cons),
        consensus_declared: runs.iter().filter(|r| r.consensus_point.is_some()).count(),
        core_members: runs
            .iter()
            .filter(|r| r.core_membership == Some(true))
            .count(),
        median_checkpoint_distances: checkpoints
            .into_iter()
            .map(|(c, v)| (c, median(&v)))
            .collect(),
        lemma1_violations: runs.iter().map(|r| r.lemma1_violations).sum(),
        lemma3_violations: runs.iter().map(|r| r.lemma3_violations).sum(),
    }
}

/// Runs every seed, writes `trace_<seed>.csv` and `summary.json` into the
/// output directory and returns the summary. The target is checked for
/// emptiness before any step.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SummaryReport> {
    let exp = Experiment::from_config(config)?;
    let out = config.output_dir();
    std::fs::create_dir_all(&out)?;
    let runs = exp
        .seeds
        .par_iter()
        .map(|&seed| {
            let outcome = exp.run_seed(seed)?;
            write_trace(&out.join(trace_file_name(seed)), &outcome)?;
            exp.summarize(seed, &outcome)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = SummaryReport {
        name: config.name.clone(),
        mode: config.mode(),
        players: exp.players(),
        dim: exp.target.dim(),
        steps: config.steps,
        tolerances: config.tolerances,
        aggregate: aggregate(&runs),
        runs,
    };
    let summary = File::create(out.join("summary.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(summary), &report)?;
    Ok(report)
}

fn write_trace(path: &Path, outcome: &RunOutcome) -> Result<()> {
    write_trace_csv(&outcome.trace, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn preset_builds() {
        let exp =
            Experiment::from_config(&ExperimentConfig::preset("paper-sim-4p").unwrap()).unwrap();
        assert_eq!(exp.players(), 4);
        assert_eq!(exp.initial[2], vec![0.0, 0.0, 10.0, 0.0]);
        let adv =
            Experiment::from_config(&ExperimentConfig::preset("adversarial-2x2").unwrap()).unwrap();
        assert_eq!(adv.seeds.len(), 30);
        assert_eq!(adv.schedule.period(), 2);
    }

    #[test]
    fn empty_core_rejected_before_running() {
        let mut cfg = ExperimentConfig::preset("paper-sim-4p").unwrap();
        cfg.game = Some(Source::Inline(crate::game::GameFile {
            n: 2,
            coalitions: vec![
                crate::game::CoalitionEntry {
                    members: vec![1],
                    value: 1.0,
                },
                crate::game::CoalitionEntry {
                    members: vec![2],
                    value: 1.0,
                },
            ],
            grand_value: 1.0,
        }));
        cfg.initial = None;
        let err = Experiment::from_config(&cfg).unwrap_err();
        assert_eq!(err.to_string(), "core is empty");
    }

    #[test]
    fn summary_declares_only_below_threshold() {
        let mut cfg = ExperimentConfig::preset("paper-sim-4p").unwrap();
        cfg.steps = 3;
        let exp = Experiment::from_config(&cfg).unwrap();
        let outcome = exp.run_seed(1).unwrap();
        let mut s = exp.summarize(1, &outcome).unwrap();
        assert_eq!(s.consensus_point.is_some(), s.final_consensus_error < 0.05);
        s.final_total_distance = 1.0;
        let agg = aggregate(&[s]);
        assert_eq!(agg.runs, 1);
        assert_eq!(agg.median_total_distance, 1.0);
    }
}
