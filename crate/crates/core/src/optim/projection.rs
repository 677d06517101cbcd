//! Euclidean projection onto a polyhedron.
//!
//! Dykstra's alternating projections cycle over the rows, each of which has a
//! closed-form projection. Every Dykstra correction for a halfspace or
//! hyperplane is a multiple of the row normal, so corrections are stored as
//! one scalar per row. Those scalars converge to the negated KKT multipliers,
//! which gives a guess of the optimal active set; whenever that guess yields a
//! point satisfying all KKT conditions the iteration stops early with the
//! exact solution of the equality-constrained subproblem.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{dist, dot};

use super::lp::find_feasible_point;
use super::polyhedron::{Polyhedron, Row};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    /// Attempt an active-set KKT solve from the Dykstra multipliers.
    pub polish: bool,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            tol: DEFAULT_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            polish: true,
        }
    }
}

impl ProjectionOptions {
    pub fn with_tol(tol: f64) -> Self {
        ProjectionOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    pub sweeps: usize,
    pub polished: bool,
}

pub fn project(x: &[f64], p: &Polyhedron, tol: f64) -> Result<Vec<f64>> {
    project_with(x, p, &ProjectionOptions::with_tol(tol)).map(|r| r.point)
}

pub fn distance(x: &[f64], p: &Polyhedron, tol: f64) -> Result<f64> {
    let proj = project(x, p, tol)?;
    Ok(dist(x, &proj))
}

/// A row of the polyhedron, flattened for the sweep.
struct SweepRow<'a> {
    row: &'a Row,
    norm_sq: f64,
    is_eq: bool,
}

pub fn project_with(x: &[f64], p: &Polyhedron, opts: &ProjectionOptions) -> Result<Projection> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("projection input".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!(
            "projection tolerance must be positive, got {}",
            opts.tol
        )));
    }

    let rows: Vec<SweepRow> = p
        .eq_rows()
        .iter()
        .map(|r| (r, true))
        .chain(p.ineq_rows().iter().map(|r| (r, false)))
        .map(|(row, is_eq)| SweepRow {
            row,
            norm_sq: dot(&row.coeffs, &row.coeffs),
            is_eq,
        })
        .collect();

    let normalized_violation = |y: &[f64]| {
        rows.iter()
            .map(|r| {
                let s = r.row.eval(y) - r.row.rhs;
                let v = if r.is_eq { s.abs() } else { (-s).max(0.0) };
                v / r.norm_sq.sqrt()
            })
            .fold(0.0, f64::max)
    };

    if normalized_violation(x) <= opts.tol * 1e-3 {
        return Ok(Projection {
            point: x.to_vec(),
            sweeps: 0,
            polished: false,
        });
    }

    let mut point = x.to_vec();
    let mut kappa = vec![0.0; rows.len()];
    let mut next_polish = 1;

    for sweep in 1..=opts.max_sweeps {
        let mut change_sq = 0.0;
        for (r, k) in rows.iter().zip(kappa.iter_mut()) {
            let a = &r.row.coeffs;
            // y = point + k·a ; s = a·y - rhs
            let s = r.row.eval(&point) + *k * r.norm_sq - r.row.rhs;
            let k_new = if r.is_eq || s < 0.0 {
                s / r.norm_sq
            } else {
                0.0
            };
            let step = *k - k_new;
            if step != 0.0 {
                for (pi, ai) in point.iter_mut().zip(a) {
                    *pi += step * ai;
                }
                change_sq += step * step * r.norm_sq;
            }
            *k = k_new;
        }

        if opts.polish && (sweep == next_polish || sweep % 64 == 0) {
            if sweep == next_polish {
                next_polish = next_polish.saturating_mul(2);
            }
            if let Some(exact) = kkt_polish(x, &rows, &kappa, opts.tol) {
                return Ok(Projection {
                    point: exact,
                    sweeps: sweep,
                    polished: true,
                });
            }
        }

        if change_sq <= opts.tol * opts.tol && normalized_violation(&point) <= opts.tol {
            if opts.polish {
                if let Some(exact) = kkt_polish(x, &rows, &kappa, opts.tol) {
                    return Ok(Projection {
                        point: exact,
                        sweeps: sweep,
                        polished: true,
                    });
                }
            }
            return Ok(Projection {
                point,
                sweeps: sweep,
                polished: false,
            });
        }
    }

    if find_feasible_point(p)?.is_none() {
        return Err(Error::EmptyPolyhedron);
    }
    Err(Error::ProjectionNonConvergence {
        iterations: opts.max_sweeps,
        residual: normalized_violation(&point),
    })
}

/// Solves `min ‖y − x‖²` with the guessed active rows held at equality and
/// returns the solution only if it satisfies every KKT condition of the full
/// problem. Makes a few primal-dual active-set corrections on the way.
fn kkt_polish(x: &[f64], rows: &[SweepRow], kappa: &[f64], tol: f64) -> Option<Vec<f64>> {
    // Ordered by priority: equalities, then the largest multipliers.
    let mut active: Vec<usize> = (0..rows.len())
        .filter(|&i| rows[i].is_eq || kappa[i] < 0.0)
        .collect();
    active.sort_by(|&a, &b| {
        (!rows[a].is_eq)
            .cmp(&!rows[b].is_eq)
            .then(kappa[a].total_cmp(&kappa[b]))
    });

    for _ in 0..2 * rows.len() + 4 {
        let selected = independent_subset(&active, rows);
        let (y, mu) = solve_active(x, rows, &selected)?;

        let mut worst_mu: Option<(usize, f64)> = None;
        for (&i, &m) in selected.iter().zip(&mu) {
            if !rows[i].is_eq {
                let scaled = m * rows[i].norm_sq.sqrt();
                if scaled < -tol && worst_mu.is_none_or(|(_, w)| scaled < w) {
                    worst_mu = Some((i, scaled));
                }
            }
        }
        let mut worst_viol: Option<(usize, f64)> = None;
        for (i, r) in rows.iter().enumerate() {
            let s = r.row.eval(&y) - r.row.rhs;
            let v = if r.is_eq { s.abs() } else { (-s).max(0.0) } / r.norm_sq.sqrt();
            if v > tol * 1e-1 && worst_viol.is_none_or(|(_, w)| v > w) {
                worst_viol = Some((i, v));
            }
        }

        match (worst_mu, worst_viol) {
            (None, None) => return Some(y),
            (Some((i, _)), _) => active.retain(|&j| j != i),
            (None, Some((i, _))) => {
                if rows[i].is_eq {
                    return None;
                }
                active.retain(|&j| j != i);
                let at = active.iter().take_while(|&&j| rows[j].is_eq).count();
                active.insert(at, i);
            }
        }
    }
    None
}

/// Greedy Gram-Schmidt selection of linearly independent rows in the given order.
fn independent_subset(active: &[usize], rows: &[SweepRow]) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut selected = Vec::new();
    for &i in active {
        let mut v = rows[i].row.coeffs.clone();
        for b in &basis {
            let c = dot(&v, b);
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj -= c * bj;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-9 * rows[i].norm_sq.sqrt() {
            v.iter_mut().for_each(|vj| *vj /= n);
            basis.push(v);
            selected.push(i);
        }
    }
    selected
}

fn solve_active(x: &[f64], rows: &[SweepRow], selected: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = selected.len();
    if k == 0 {
        return Some((x.to_vec(), Vec::new()));
    }
    let gram = DMatrix::from_fn(k, k, |a, b| {
        dot(&rows[selected[a]].row.coeffs, &rows[selected[b]].row.coeffs)
    });
    let rhs = DVector::from_fn(k, |a, _| {
        let r = rows[selected[a]].row;
        r.rhs - r.eval(x)
    });
    let mu = gram.cholesky()?.solve(&rhs);
    let mut y = x.to_vec();
    for (&i, m) in selected.iter().zip(mu.iter()) {
        for (yj, aj) in y.iter_mut().zip(&rows[i].row.coeffs) {
            *yj += m * aj;
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((y, mu.iter().copied().collect()))
}
