//! Rewards as payoffs of a repeated game against an adversary.
//!
//! Each player plays a finite vector-payoff game `φ: S₁ × S₂ → ℝ^d` against
//! an external opponent. Given its space average `w`, the player looks along
//! `λ = w − P_X[w]`, solves the scalar zero-sum game `Φ_λ = [λ·φ(j,k)]` with
//! itself as the minimizer, and plays the minimax strategy. That strategy
//! keeps the expected reward on the far side of the supporting hyperplane at
//! `P_X[w]` whatever the opponent does, provided the game admits it.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::engine::{RewardContext, RewardPolicy};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};
use crate::optim::{find_feasible_point, project, solve_zero_sum, Polyhedron, ZeroSumSolution};

/// `φ(j, k) ∈ ℝ^dim` for row actions `j < s1` and column actions `k < s2`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPayoffGame {
    s1: usize,
    s2: usize,
    dim: usize,
    payoffs: Vec<Vec<Vec<f64>>>,
    bound: f64,
}

impl VectorPayoffGame {
    pub fn new(payoffs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let s1 = payoffs.len();
        let s2 = payoffs.first().map_or(0, Vec::len);
        let dim = payoffs.first().and_then(|r| r.first()).map_or(0, Vec::len);
        if s1 == 0 || s2 == 0 || dim == 0 {
            return Err(Error::InvalidGame(
                "empty action set or payoff vector".into(),
            ));
        }
        let mut bound: f64 = 0.0;
        for row in &payoffs {
            if row.len() != s2 {
                return Err(Error::InvalidGame("ragged payoff rows".into()));
            }
            for v in row {
                if v.len() != dim {
                    return Err(Error::InvalidGame("payoff vectors of mixed length".into()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidGame("non-finite payoff".into()));
                }
                bound = bound.max(norm(v));
            }
        }
        Ok(VectorPayoffGame {
            s1,
            s2,
            dim,
            payoffs,
            bound,
        })
    }

    /// A scalar game (`dim = 1`) from a plain matrix.
    pub fn scalar(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            matrix
                .into_iter()
                .map(|row| row.into_iter().map(|v| vec![v]).collect())
                .collect(),
        )
    }

    pub fn row_actions(&self) -> usize {
        self.s1
    }

    pub fn col_actions(&self) -> usize {
        self.s2
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `payoffs()[j][k]` is `φ(j, k)`.
    pub fn payoffs(&self) -> &[Vec<Vec<f64>>] {
        &self.payoffs
    }

    pub fn payoff(&self, j: usize, k: usize) -> &[f64] {
        &self.payoffs[j][k]
    }

    /// `max_{j,k} ‖φ(j,k)‖`
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: VectorGameFile = serde_json::from_str(text)?;
        Self::try_from(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&VectorGameFile::from(self)).expect("game serializes")
    }
}

/// On-disk form: `payoffs[j][k]` is the payoff vector for actions `(j, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorGameFile {
    pub s1: usize,
    pub s2: usize,
    pub n: usize,
    pub payoffs: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<&VectorGameFile> for VectorPayoffGame {
    type Error = Error;

    fn try_from(file: &VectorGameFile) -> Result<Self> {
        let g = VectorPayoffGame::new(file.payoffs.clone())?;
        if (g.s1, g.s2, g.dim) != (file.s1, file.s2, file.n) {
            return Err(Error::InvalidGame(format!(
                "declared shape {}×{}×{} does not match payoffs {}×{}×{}",
                file.s1, file.s2, file.n, g.s1, g.s2, g.dim
            )));
        }
        Ok(g)
    }
}

impl From<&VectorPayoffGame> for VectorGameFile {
    fn from(g: &VectorPayoffGame) -> Self {
        VectorGameFile {
            s1: g.s1,
            s2: g.s2,
            n: g.dim,
            payoffs: g.payoffs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidStrategy("no actions".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidStrategy(format!(
                "negative weight in {probs:?}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidStrategy(format!("weights sum to {total}")));
        }
        Ok(MixedStrategy(probs))
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        weights.iter_mut().for_each(|w| *w = w.max(0.0));
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidStrategy("all weights are zero".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(MixedStrategy(weights))
    }

    pub fn uniform(actions: usize) -> Self {
        MixedStrategy(vec![1.0 / actions as f64; actions])
    }

    pub fn pure(actions: usize, action: usize) -> Self {
        let mut p = vec![0.0; actions];
        p[action] = 1.0;
        MixedStrategy(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `[Φ_λ]_{jk} = λ·φ(j,k)`
pub fn scalarize(game: &VectorPayoffGame, lambda: &[f64]) -> Result<Vec<Vec<f64>>> {
    if lambda.len() != game.dim {
        return Err(Error::DimensionMismatch {
            expected: game.dim,
            got: lambda.len(),
        });
    }
    Ok(game
        .payoffs
        .iter()
        .map(|row| row.iter().map(|v| dot(lambda, v)).collect())
        .collect())
}

/// `Σ_j Σ_k p_j q_k φ(j,k)`
pub fn expected_payoff(
    game: &VectorPayoffGame,
    p: &MixedStrategy,
    q: &MixedStrategy,
) -> Result<Vec<f64>> {
    if p.len() != game.s1 {
        return Err(Error::DimensionMismatch {
            expected: game.s1,
            got: p.len(),
        });
    }
    if q.len() != game.s2 {
        return Err(Error::DimensionMismatch {
            expected: game.s2,
            got: q.len(),
        });
    }
    let mut out = vec![0.0; game.dim];
    for (j, pj) in p.probs().iter().enumerate() {
        for (k, qk) in q.probs().iter().enumerate() {
            let w = pj * qk;
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(&game.payoffs[j][k]) {
                    *o += w * v;
                }
            }
        }
    }
    Ok(out)
}

/// Inverse-CDF draw of an action index.
pub fn sample_action<R: Rng + ?Sized>(p: &MixedStrategy, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (j, pj) in p.probs().iter().enumerate() {
        cum += pj;
        if u < cum {
            return j;
        }
    }
    // Rounding left u ≥ Σp; fall back to the last action with weight.
    p.probs().iter().rposition(|pj| *pj > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackwellOptions {
    /// Required separation `φ`: the strategy must keep
    /// `λ·(𝔼x − P_X[w]) ≤ −margin` against every opponent.
    pub margin: f64,
    /// `‖λ‖` at or below this means `w` is already in `X`.
    pub vacuous_tol: f64,
    pub projection_tol: f64,
}

impl Default for BlackwellOptions {
    fn default() -> Self {
        BlackwellOptions {
            margin: 1e-6,
            vacuous_tol: 1e-8,
            projection_tol: 1e-9,
        }
    }
}

/// Everything the oracle computes at one space average.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackwellResponse {
    /// `w − P_X[w]`
    pub lambda: Vec<f64>,
    /// `P_X[w]`
    pub anchor: Vec<f64>,
    /// The scalarized game's solution; `None` in the vacuous case.
    pub solution: Option<ZeroSumSolution>,
    /// `v_λ − λ·P_X[w]`, the best guaranteed separation (zero when vacuous).
    pub slack: f64,
    pub strategy: MixedStrategy,
}

impl BlackwellResponse {
    pub fn is_vacuous(&self) -> bool {
        self.solution.is_none()
    }
}

pub fn blackwell_response(
    w: &[f64],
    target: &Polyhedron,
    game: &VectorPayoffGame,
    opts: &BlackwellOptions,
) -> Result<BlackwellResponse> {
    if w.len() != game.dim {
        return Err(Error::DimensionMismatch {
            expected: game.dim,
            got: w.len(),
        });
    }
    let anchor = project(w, target, opts.projection_tol)?;
    let lambda = sub(w, &anchor);
    if norm(&lambda) <= opts.vacuous_tol {
        return Ok(BlackwellResponse {
            lambda,
            anchor,
            solution: None,
            slack: 0.0,
            strategy: MixedStrategy::uniform(game.s1),
        });
    }
    let solution = solve_zero_sum(&scalarize(game, &lambda)?)?;
    let slack = solution.value - dot(&lambda, &anchor);
    let strategy = MixedStrategy::normalized(solution.row_strategy.clone())?;
    Ok(BlackwellResponse {
        lambda,
        anchor,
        solution: Some(solution),
        slack,
        strategy,
    })
}

/// The minimax strategy at `w`, or an error when no strategy achieves the
/// required separation `margin`.
pub fn blackwell_policy(
    w: &[f64],
    target: &Polyhedron,
    game: &VectorPayoffGame,
    margin: f64,
) -> Result<MixedStrategy> {
    let opts = BlackwellOptions {
        margin,
        ..Default::default()
    };
    blackwell_policy_with(w, target, game, &opts)
}

pub fn blackwell_policy_with(
    w: &[f64],
    target: &Polyhedron,
    game: &VectorPayoffGame,
    opts: &BlackwellOptions,
) -> Result<MixedStrategy> {
    let r = blackwell_response(w, target, game, opts)?;
    if r.is_vacuous() || r.slack <= -opts.margin {
        Ok(r.strategy)
    } else {
        Err(Error::ApproachabilityUnsatisfiable {
            value: r.solution.map_or(0.0, |s| s.value),
            threshold: dot(&r.lambda, &r.anchor) - opts.margin,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionCheck {
    /// Unit outward normal actually tested.
    pub lambda: Vec<f64>,
    pub boundary_point: Vec<f64>,
    /// `v_λ = min_p max_q p'Φ_λ q`
    pub value: f64,
    /// `λ·b`, the support value of `X` in direction `λ`.
    pub support: f64,
    /// `support − value`; negative means the opponent can keep payoffs
    /// strictly beyond this face.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub checks: Vec<DirectionCheck>,
    /// Sampled directions along which `X` is unbounded (nothing to check).
    pub recession_directions: usize,
    pub worst_margin: f64,
    pub all_passed: bool,
}

/// Samples unit directions `λ`, finds the boundary point `b` of `X` whose
/// outward normal is (close to) `λ` by projecting a far point along the ray,
/// and checks Blackwell's separation `v_λ ≤ λ·b` for that normal. A failure
/// certifies that `X` is not approachable; passing is evidence only.
pub fn certify_approachable<R: Rng + ?Sized>(
    game: &VectorPayoffGame,
    target: &Polyhedron,
    directions: usize,
    rng: &mut R,
) -> Result<CertificationReport> {
    if target.dim() != game.dim {
        return Err(Error::DimensionMismatch {
            expected: game.dim,
            got: target.dim(),
        });
    }
    let center = find_feasible_point(target)?.ok_or(Error::EmptyPolyhedron)?;
    let radius = 1e3 * (1.0 + norm(&center) + game.bound);
    let mut checks = Vec::with_capacity(directions);
    let mut recession_directions = 0;

    for _ in 0..directions.max(1) {
        let raw: Vec<f64> = loop {
            let v: Vec<f64> = (0..game.dim).map(|_| rng.sample(StandardNormal)).collect();
            if norm(&v) > 1e-12 {
                break v;
            }
        };
        let scale = norm(&raw);
        let ray: Vec<f64> = center
            .iter()
            .zip(&raw)
            .map(|(c, d)| c + radius * d / scale)
            .collect();
        let b = project(&ray, target, 1e-10)?;
        let normal = sub(&ray, &b);
        let len = norm(&normal);
        if len <= 1e-9 * radius {
            recession_directions += 1;
            continue;
        }
        let lambda: Vec<f64> = normal.iter().map(|v| v / len).collect();
        let sol = solve_zero_sum(&scalarize(game, &lambda)?)?;
        let support = dot(&lambda, &b);
        let margin = support - sol.value;
        checks.push(DirectionCheck {
            pass: margin >= -1e-9 * (1.0 + support.abs()),
            lambda,
            boundary_point: b,
            value: sol.value,
            support,
            margin,
        });
    }
    let worst_margin = checks
        .iter()
        .map(|c| c.margin)
        .fold(f64::INFINITY, f64::min);
    Ok(CertificationReport {
        all_passed: checks.iter().all(|c| c.pass),
        worst_margin,
        recession_directions,
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Opponent {
    /// Plays the maximizing (column) strategy of the same scalarized game.
    WorstCase,
    Uniform,
    Fixed(usize),
}

/// Reward policy for the adversarial setting: the player follows the
/// Blackwell oracle, the opponent one of the [`Opponent`] models, and the
/// reward is the realized payoff `φ(j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialPolicy {
    pub game: VectorPayoffGame,
    pub opponent: Opponent,
    pub options: BlackwellOptions,
    /// Accept a separation short of `margin` as long as `slack` stays at or
    /// below this value. Near `X` the fixed margin is unreachable because
    /// `λ·(𝔼x − P_X[w])` shrinks with `‖λ‖`.
    pub slack_limit: f64,
}

impl AdversarialPolicy {
    pub fn new(game: VectorPayoffGame, opponent: Opponent, margin: f64) -> Result<Self> {
        if let Opponent::Fixed(k) = opponent {
            if k >= game.col_actions() {
                return Err(Error::InvalidGame(format!(
                    "fixed opponent action {k} out of range for {} actions",
                    game.col_actions()
                )));
            }
        }
        Ok(AdversarialPolicy {
            game,
            opponent,
            options: BlackwellOptions {
                margin,
                ..Default::default()
            },
            slack_limit: 1e-9,
        })
    }

    /// Mixed strategies of both sides at space average `w`.
    pub fn strategies(
        &self,
        w: &[f64],
        target: &Polyhedron,
        projection_tol: f64,
    ) -> Result<(MixedStrategy, MixedStrategy)> {
        let opts = BlackwellOptions {
            projection_tol,
            ..self.options
        };
        let r = blackwell_response(w, target, &self.game, &opts)?;
        if !r.is_vacuous() && r.slack > -opts.margin && r.slack > self.slack_limit {
            return Err(Error::ApproachabilityUnsatisfiable {
                value: r.slack + dot(&r.lambda, &r.anchor),
                threshold: dot(&r.lambda, &r.anchor) - opts.margin,
            });
        }
        let s2 = self.game.col_actions();
        let q = match self.opponent {
            Opponent::WorstCase => match &r.solution {
                Some(sol) => MixedStrategy::normalized(sol.col_strategy.clone())?,
                None => MixedStrategy::uniform(s2),
            },
            Opponent::Uniform => MixedStrategy::uniform(s2),
            Opponent::Fixed(k) => MixedStrategy::pure(s2, k),
        };
        Ok((r.strategy, q))
    }
}

impl RewardPolicy for AdversarialPolicy {
    fn generate(&self, ctx: &RewardContext<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let (p, q) = self.strategies(ctx.space_average, ctx.target, ctx.projection_tol)?;
        let j = sample_action(&p, rng);
        let k = sample_action(&q, rng);
        Ok(self.game.payoff(j, k).to_vec())
    }

    fn bound(&self) -> f64 {
        self.game.bound
    }

    fn name(&self) -> &'static str {
        "adversarial"
    }
}
