//! Values of finite two-player zero-sum matrix games.
//!
//! The row player chooses `p`, the column player `q`, and the row player pays
//! `p' M q`: rows minimize, columns maximize. Both sides are solved with the
//! classic positive-shift LP so the minimax and maximin values come from two
//! independent programs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lp::{solve_lp, LinearProgram, LpOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumSolution {
    /// `min_p max_q p' M q`
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// `max_q min_p p' M q` from the column LP.
    pub maximin_value: f64,
}

fn validate(m: &[Vec<f64>]) -> Result<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidGame("payoff matrix is empty".into()));
    }
    for r in m {
        if r.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("payoff matrix entry".into()));
        }
    }
    Ok((rows, cols))
}

fn normalize(mut weights: Vec<f64>) -> Vec<f64> {
    weights.iter_mut().for_each(|w| *w = w.max(0.0));
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    weights
}

pub fn solve_zero_sum(m: &[Vec<f64>]) -> Result<ZeroSumSolution> {
    let (rows, cols) = validate(m)?;
    let lo = m.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = m
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    // Shift so every entry is at least 1; the shifted value is then ≥ 1.
    let shift = 1.0 - lo + 1e-3 * (hi - lo);
    let shifted = |j: usize, k: usize| m[j][k] + shift;

    // Row player: u = p / v, max Σu s.t. Σ_j u_j M'_jk ≤ 1, u ≥ 0.
    let mut row_lp = LinearProgram::maximize(vec![1.0; rows]);
    for k in 0..cols {
        row_lp = row_lp.le((0..rows).map(|j| shifted(j, k)).collect(), 1.0);
    }
    // Column player: z = q / v, min Σz s.t. Σ_k M'_jk z_k ≥ 1, z ≥ 0.
    let mut col_lp = LinearProgram::minimize(vec![1.0; cols]);
    for j in 0..rows {
        col_lp = col_lp.ge((0..cols).map(|k| shifted(j, k)).collect(), 1.0);
    }

    let row = match solve_lp(&row_lp)? {
        LpOutcome::Optimal(s) => s,
        other => return Err(Error::LpNumerical(format!("row LP: {other:?}"))),
    };
    let col = match solve_lp(&col_lp)? {
        LpOutcome::Optimal(s) => s,
        other => return Err(Error::LpNumerical(format!("column LP: {other:?}"))),
    };
    if !(row.value > 0.0 && col.value > 0.0) {
        return Err(Error::LpNumerical("non-positive shifted game value".into()));
    }

    let row_strategy = normalize(row.x);
    let col_strategy = normalize(col.x);
    Ok(ZeroSumSolution {
        value: 1.0 / row.value - shift,
        maximin_value: 1.0 / col.value - shift,
        row_strategy,
        col_strategy,
    })
}

/// `p' M q`
pub fn bilinear(m: &[Vec<f64>], p: &[f64], q: &[f64]) -> f64 {
    m.iter()
        .zip(p)
        .map(|(row, pj)| pj * row.iter().zip(q).map(|(v, qk)| v * qk).sum::<f64>())
        .sum()
}

/// Best (largest) payoff the column player can extract against `p`.
pub fn best_column_response(m: &[Vec<f64>], p: &[f64]) -> (usize, f64) {
    let cols = m[0].len();
    (0..cols)
        .map(|k| (k, m.iter().zip(p).map(|(row, pj)| pj * row[k]).sum::<f64>()))
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        })
}

/// Best (smallest) payoff the row player can secure against `q`.
pub fn best_row_response(m: &[Vec<f64>], q: &[f64]) -> (usize, f64) {
    m.iter()
        .map(|row| row.iter().zip(q).map(|(v, qk)| v * qk).sum::<f64>())
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies() {
        let s = solve_zero_sum(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(s.value.abs() < 1e-12);
        for v in s.row_strategy.iter().chain(&s.col_strategy) {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_minimize() {
        // min_p max_q: p = (½, ½), q = (¾, ¼), value 3/2.
        let m = vec![vec![2.0, 0.0], vec![1.0, 3.0]];
        let s = solve_zero_sum(&m).unwrap();
        assert!((s.value - 1.5).abs() < 1e-10);
        assert!((s.maximin_value - 1.5).abs() < 1e-10);
        assert!((s.row_strategy[0] - 0.5).abs() < 1e-10);
        assert!((s.col_strategy[0] - 0.75).abs() < 1e-10);
        assert!((best_column_response(&m, &s.row_strategy).1 - 1.5).abs() < 1e-10);
        assert!((best_row_response(&m, &s.col_strategy).1 - 1.5).abs() < 1e-10);
    }

    #[test]
    fn one_by_one() {
        let s = solve_zero_sum(&[vec![-4.25]]).unwrap();
        assert!((s.value + 4.25).abs() < 1e-12);
        assert_eq!(s.row_strategy, vec![1.0]);
        assert_eq!(s.col_strategy, vec![1.0]);
    }

    #[test]
    fn constant_matrix() {
        let s = solve_zero_sum(&[vec![3.0, 3.0], vec![3.0, 3.0]]).unwrap();
        assert!((s.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn dominated_row_is_avoided() {
        // Row 1 is worse for the minimizer in every column.
        let s = solve_zero_sum(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!((s.value - 2.0).abs() < 1e-10);
        assert!((s.row_strategy[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(solve_zero_sum(&[]).is_err());
        assert!(solve_zero_sum(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(solve_zero_sum(&[vec![f64::INFINITY]]).is_err());
    }
}
