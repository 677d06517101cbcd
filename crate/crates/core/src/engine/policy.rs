use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{dot, norm, sub};
use crate::optim::{project, Polyhedron};

/// What a player sees when generating a new reward vector.
#[derive(Debug, Clone, Copy)]
pub struct RewardContext<'a> {
    /// Step index `t`; the generated vector is `x_i(t+1)`.
    pub t: usize,
    pub player: usize,
    /// Space average `w_i(t)`.
    pub space_average: &'a [f64],
    pub target: &'a Polyhedron,
    pub projection_tol: f64,
}

/// Generates the new reward `x_i(t+1)` of one player.
pub trait RewardPolicy: Send + Sync {
    fn generate(&self, ctx: &RewardContext<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<f64>>;

    /// Declared bound `L` on `‖x_i(t+1)‖`; the engine aborts a run on excess.
    fn bound(&self) -> f64;

    fn name(&self) -> &'static str;
}

/// Rewards placed past the projection of the space average:
/// `p + α (p − w) + v` with `p = P_X[w]`, `α ~ U[alpha_min, 1]` and `v` a
/// random displacement orthogonal to `w − p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreApproachPolicy {
    pub alpha_min: f64,
    /// Below this distance `w` counts as inside the target and `p` is returned.
    pub tolerance: f64,
    pub reward_bound: f64,
}

impl Default for CoreApproachPolicy {
    fn default() -> Self {
        CoreApproachPolicy {
            alpha_min: 0.05,
            tolerance: 1e-8,
            reward_bound: 1e4,
        }
    }
}

impl CoreApproachPolicy {
    pub fn new(alpha_min: f64) -> Self {
        CoreApproachPolicy {
            alpha_min,
            ..Default::default()
        }
    }
}

/// Output of one core-approach draw, exposed for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachDraw {
    pub projection: Vec<f64>,
    pub alpha: f64,
    pub drift: Vec<f64>,
    pub reward: Vec<f64>,
}

pub fn core_approach_draw(
    w: &[f64],
    target: &Polyhedron,
    projection_tol: f64,
    alpha_min: f64,
    tolerance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ApproachDraw> {
    let p = project(w, target, projection_tol)?;
    let lambda = sub(w, &p);
    let gap_sq = dot(&lambda, &lambda);
    if gap_sq.sqrt() <= tolerance {
        return Ok(ApproachDraw {
            reward: p.clone(),
            projection: p,
            alpha: 0.0,
            drift: vec![0.0; w.len()],
        });
    }
    let alpha = if alpha_min >= 1.0 {
        1.0
    } else {
        rng.random_range(alpha_min..=1.0)
    };
    let mut drift: Vec<f64> = (0..w.len()).map(|_| rng.random::<f64>()).collect();
    let along = dot(&drift, &lambda) / gap_sq;
    drift
        .iter_mut()
        .zip(&lambda)
        .for_each(|(v, l)| *v -= along * l);

    let reward: Vec<f64> = p
        .iter()
        .zip(&lambda)
        .zip(&drift)
        .map(|((pi, li), vi)| pi - alpha * li + vi)
        .collect();
    debug_assert!({
        let lhs = dot(&lambda, &sub(&reward, &p));
        (lhs + alpha * gap_sq).abs() <= 1e-9 * (1.0 + gap_sq) * (1.0 + norm(&reward))
    });
    Ok(ApproachDraw {
        projection: p,
        alpha,
        drift,
        reward,
    })
}

impl RewardPolicy for CoreApproachPolicy {
    fn generate(&self, ctx: &RewardContext<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        core_approach_draw(
            ctx.space_average,
            ctx.target,
            ctx.projection_tol,
            self.alpha_min,
            self.tolerance,
            rng,
        )
        .map(|d| d.reward)
    }

    fn bound(&self) -> f64 {
        self.reward_bound
    }

    fn name(&self) -> &'static str {
        "core_approach"
    }
}

/// Every player always receives the same vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantPolicy {
    pub reward: Vec<f64>,
    pub reward_bound: f64,
}

impl RewardPolicy for ConstantPolicy {
    fn generate(&self, _ctx: &RewardContext<'_>, _rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(self.reward.clone())
    }

    fn bound(&self) -> f64 {
        self.reward_bound
    }

    fn name(&self) -> &'static str {
        "constant"
    }
}
