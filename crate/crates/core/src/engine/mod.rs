//! The doubly averaging allocation process.
//!
//! At every step each player first averages the estimates of its neighbours,
//! `w_i(t) = Σ_j a_ij(t) x̂_j(t)`, then folds in a freshly generated reward:
//!
//! ```text
//! x̂_i(t+1) = t/(t+1) · w_i(t) + 1/(t+1) · x_i(t+1)
//! ```
//!
//! Alongside the estimates the engine keeps the running time-average of the
//! reward barycenters, which must coincide with the barycenter of the
//! estimates at every step, and checks after every step that space averaging
//! did not increase the total distance to the target set.

mod policy;
mod trace;

pub use policy::{
    core_approach_draw, ApproachDraw, ConstantPolicy, CoreApproachPolicy, RewardContext,
    RewardPolicy,
};
pub use trace::{read_trace_csv, trace_header, write_trace_csv, TraceRecord};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy, dist, max_abs_diff, mean, norm};
use crate::network::{GraphSchedule, WeightMatrix};
use crate::optim::{distance, Polyhedron};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub projection_tol: f64,
    /// Allowed excess of `Σ dist(w_i)` over `Σ dist(x̂_i)`.
    pub lemma1_tol: f64,
    /// Allowed gap between the estimate barycenter and the reward average.
    pub lemma3_tol: f64,
    /// Distances of `w_i` below this are treated as zero by the per-player
    /// decrease check.
    pub decrease_check_floor: f64,
    /// Turn invariant violations into errors instead of counting them.
    pub strict: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            projection_tol: 1e-9,
            lemma1_tol: 1e-7,
            lemma3_tol: 1e-9,
            decrease_check_floor: 1e-8,
            strict: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineState {
    t: usize,
    xhat: Vec<Vec<f64>>,
    reward_bary_avg: Vec<f64>,
    rngs: Vec<ChaCha8Rng>,
    /// `dist(x̂_i(t), X)`, filled on first use.
    distances: Option<Vec<f64>>,
}

impl EngineState {
    /// One estimate per player. Player `i` draws from stream `i` of a ChaCha8
    /// generator seeded with `seed`.
    pub fn new(initial: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let n = initial.len();
        if n == 0 {
            return Err(Error::Config("no players".into()));
        }
        let dim = initial[0].len();
        for (i, v) in initial.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if !all_finite(v) {
                return Err(Error::NonFinite {
                    t: 0,
                    player: i,
                    quantity: "initial estimate",
                });
            }
        }
        let rngs = (0..n)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                rng
            })
            .collect();
        Ok(EngineState {
            t: 0,
            reward_bary_avg: mean(&initial),
            xhat: initial,
            rngs,
            distances: None,
        })
    }

    /// Player `i` starts with `scale · b_i`: everything to itself.
    pub fn self_reward(n: usize, scale: f64, seed: u64) -> Result<Self> {
        let initial = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = scale;
                v
            })
            .collect();
        Self::new(initial, seed)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n_players(&self) -> usize {
        self.xhat.len()
    }

    pub fn dim(&self) -> usize {
        self.xhat[0].len()
    }

    pub fn estimates(&self) -> &[Vec<f64>] {
        &self.xhat
    }

    pub fn reward_barycenter_average(&self) -> &[f64] {
        &self.reward_bary_avg
    }

    pub fn barycenter(&self) -> Vec<f64> {
        mean(&self.xhat)
    }

    pub fn consensus_error(&self) -> f64 {
        let b = self.barycenter();
        self.xhat.iter().map(|x| dist(x, &b)).fold(0.0, f64::max)
    }
}

/// `w_i = Σ_j a_ij x̂_j` for every player.
pub fn space_average(xhat: &[Vec<f64>], weights: &WeightMatrix) -> Result<Vec<Vec<f64>>> {
    let n = xhat.len();
    if weights.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: weights.n(),
        });
    }
    let dim = xhat.first().map_or(0, Vec::len);
    Ok((0..n)
        .map(|i| {
            let mut w = vec![0.0; dim];
            for (a, x) in weights.row(i).iter().zip(xhat) {
                if *a != 0.0 {
                    axpy(*a, x, &mut w);
                }
            }
            w
        })
        .collect())
}

fn distances(points: &[Vec<f64>], target: &Polyhedron, tol: f64) -> Result<Vec<f64>> {
    points.iter().map(|x| distance(x, target, tol)).collect()
}

/// Invariant checks of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepChecks {
    pub lemma1_violated: bool,
    pub lemma3_violated: bool,
    /// Players whose distance did not drop below that of their space average.
    pub no_decrease: usize,
}

/// Advances `state` from `t` to `t + 1` and returns the trace record for
/// `t + 1`.
pub fn step(
    state: &mut EngineState,
    weights: &WeightMatrix,
    policy: &dyn RewardPolicy,
    target: &Polyhedron,
    cfg: &EngineConfig,
) -> Result<(TraceRecord, StepChecks)> {
    let t = state.t;
    let n = state.n_players();
    if target.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: state.dim(),
        });
    }
    let prev_dist = match state.distances.take() {
        Some(d) => d,
        None => distances(&state.xhat, target, cfg.projection_tol)?,
    };

    let w = space_average(&state.xhat, weights)?;
    let w_dist = distances(&w, target, cfg.projection_tol)?;

    let keep = t as f64 / (t as f64 + 1.0);
    let fresh = 1.0 / (t as f64 + 1.0);
    let mut next = Vec::with_capacity(n);
    let mut reward_sum = vec![0.0; state.dim()];
    for (i, wi) in w.iter().enumerate() {
        let ctx = RewardContext {
            t,
            player: i,
            space_average: wi,
            target,
            projection_tol: cfg.projection_tol,
        };
        let reward = policy.generate(&ctx, &mut state.rngs[i])?;
        if reward.len() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                got: reward.len(),
            });
        }
        if !all_finite(&reward) {
            return Err(Error::NonFinite {
                t,
                player: i,
                quantity: "reward",
            });
        }
        let r_norm = norm(&reward);
        if r_norm > policy.bound() {
            return Err(Error::PolicyBound {
                t,
                player: i,
                norm: r_norm,
                bound: policy.bound(),
            });
        }
        axpy(1.0, &reward, &mut reward_sum);
        let xi: Vec<f64> = wi
            .iter()
            .zip(&reward)
            .map(|(a, b)| keep * a + fresh * b)
            .collect();
        if !all_finite(&xi) {
            return Err(Error::NonFinite {
                t: t + 1,
                player: i,
                quantity: "estimate",
            });
        }
        next.push(xi);
    }

    let reward_bary: Vec<f64> = reward_sum.iter().map(|s| s / n as f64).collect();
    state
        .reward_bary_avg
        .iter_mut()
        .zip(&reward_bary)
        .for_each(|(avg, xb)| *avg = keep * *avg + fresh * xb);
    state.xhat = next;
    state.t = t + 1;

    let new_dist = distances(&state.xhat, target, cfg.projection_tol)?;
    let barycenter = state.barycenter();
    let consensus_error = state
        .xhat
        .iter()
        .map(|x| dist(x, &barycenter))
        .fold(0.0, f64::max);

    let lemma1_lhs: f64 = w_dist.iter().sum();
    let lemma1_rhs: f64 = prev_dist.iter().sum();
    let lemma3_gap = max_abs_diff(&barycenter, &state.reward_bary_avg);
    let checks = StepChecks {
        lemma1_violated: lemma1_lhs > lemma1_rhs + cfg.lemma1_tol,
        lemma3_violated: lemma3_gap > cfg.lemma3_tol,
        no_decrease: w_dist
            .iter()
            .zip(&new_dist)
            .filter(|(dw, dx)| **dw > cfg.decrease_check_floor && dx >= dw)
            .count(),
    };
    if cfg.strict {
        if checks.lemma1_violated {
            return Err(Error::InvariantViolation {
                t: t + 1,
                what: format!(
                    "space averaging increased total distance: {lemma1_lhs:e} > {lemma1_rhs:e}"
                ),
            });
        }
        if checks.lemma3_violated {
            return Err(Error::InvariantViolation {
                t: t + 1,
                what: format!("barycenter differs from reward average by {lemma3_gap:e}"),
            });
        }
    }

    let record = TraceRecord {
        t: t + 1,
        total_distance: new_dist.iter().sum(),
        distances: new_dist.clone(),
        consensus_error,
        scaled_error: (t + 1) as f64 * consensus_error,
        barycenter,
        lemma1_lhs,
        lemma1_rhs,
        lemma3_gap,
        estimates: state.xhat.clone(),
    };
    state.distances = Some(new_dist);
    Ok((record, checks))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Vec<TraceRecord>,
    pub final_state: EngineState,
    pub lemma1_violations: usize,
    pub lemma3_violations: usize,
    /// Steps where some player's distance failed to drop below that of its
    /// space average.
    pub no_decrease_steps: usize,
    pub last_no_decrease: Option<usize>,
}

impl RunOutcome {
    pub fn last(&self) -> &TraceRecord {
        self.trace.last().expect("runs have at least one step")
    }
}

/// Runs `steps` steps from `state`. Deterministic in the state's seed.
pub fn run(
    cfg: &EngineConfig,
    schedule: &GraphSchedule,
    policy: &dyn RewardPolicy,
    target: &Polyhedron,
    mut state: EngineState,
    steps: usize,
) -> Result<RunOutcome> {
    if steps == 0 {
        return Err(Error::Config("at least one step is required".into()));
    }
    if schedule.n() != state.n_players() {
        return Err(Error::DimensionMismatch {
            expected: state.n_players(),
            got: schedule.n(),
        });
    }
    let mut trace = Vec::with_capacity(steps);
    let mut lemma1_violations = 0;
    let mut lemma3_violations = 0;
    let mut no_decrease_steps = 0;
    let mut last_no_decrease = None;
    for _ in 0..steps {
        let weights = schedule.weights_at(state.t());
        let (record, checks) = step(&mut state, weights, policy, target, cfg)?;
        lemma1_violations += usize::from(checks.lemma1_violated);
        lemma3_violations += usize::from(checks.lemma3_violated);
        if checks.no_decrease > 0 {
            no_decrease_steps += 1;
            last_no_decrease = Some(record.t);
        }
        trace.push(record);
    }
    Ok(RunOutcome {
        trace,
        final_state: state,
        lemma1_violations,
        lemma3_violations,
        no_decrease_steps,
        last_no_decrease,
    })
}
