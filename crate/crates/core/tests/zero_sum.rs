mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{dot, grid_value, random_matrix, random_polyhedron, rng};
use tu_consensus::optim::{
    find_feasible_point, solve_lp, solve_zero_sum, LinearProgram, LpOutcome, Polyhedron,
};

fn column_payoffs(m: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    (0..m[0].len())
        .map(|k| m.iter().zip(p).map(|(row, pj)| pj * row[k]).sum())
        .collect()
}

fn row_payoffs(m: &[Vec<f64>], q: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, q)).collect()
}

#[test]
fn saddle_conditions_on_random_matrices() {
    let mut r = rng(21);
    for _ in 0..60 {
        let (rows, cols) = (r.random_range(1..=6), r.random_range(1..=6));
        let m = random_matrix(&mut r, rows, cols);
        let s = solve_zero_sum(&m).unwrap();
        assert!((s.value - s.maximin_value).abs() < 1e-8);
        // p guarantees at most v against every column, q at least v against every row.
        let worst_col = column_payoffs(&m, &s.row_strategy)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let worst_row = row_payoffs(&m, &s.col_strategy)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert!((worst_col - s.value).abs() < 1e-8);
        assert!((worst_row - s.value).abs() < 1e-8);
        for strat in [&s.row_strategy, &s.col_strategy] {
            assert!(strat.iter().all(|&v| v >= -1e-12));
            assert!((strat.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn grid_oracle_agrees() {
    let mut r = rng(22);
    for _ in 0..40 {
        let small = r.random_range(1..=3);
        let big = r.random_range(1..=6);
        let (rows, cols) = if r.random_bool(0.5) {
            (small, big)
        } else {
            (big, small)
        };
        let m = random_matrix(&mut r, rows, cols);
        let v = solve_zero_sum(&m).unwrap().value;
        let g = grid_value(&m, 400);
        assert!((v - g).abs() < 6e-3, "{v} vs grid {g} on {m:?}");
    }
}

#[test]
fn transposed_negated_game_has_negated_value() {
    let mut r = rng(23);
    for _ in 0..20 {
        let m = random_matrix(&mut r, 3, 4);
        let t: Vec<Vec<f64>> = (0..4).map(|k| (0..3).map(|j| -m[j][k]).collect()).collect();
        let a = solve_zero_sum(&m).unwrap().value;
        let b = solve_zero_sum(&t).unwrap().value;
        assert!((a + b).abs() < 1e-9);
    }
}

#[test]
fn lp_duality_on_random_box_problems() {
    // max c·x s.t. Ax ≤ b, x ≥ 0 with A, b, c > 0 is bounded and feasible;
    // its dual min b·y s.t. Aᵀy ≥ c, y ≥ 0 has the same value.
    let mut r = rng(24);
    for _ in 0..30 {
        let (m, n) = (r.random_range(1..=5), r.random_range(1..=5));
        let a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| r.random_range(0.1..2.0)).collect())
            .collect();
        let b: Vec<f64> = (0..m).map(|_| r.random_range(0.5..3.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| r.random_range(0.1..2.0)).collect();
        let mut primal = LinearProgram::maximize(c.clone());
        for (row, &rhs) in a.iter().zip(&b) {
            primal = primal.le(row.clone(), rhs);
        }
        let mut dual = LinearProgram::minimize(b.clone());
        for j in 0..n {
            dual = dual.ge(a.iter().map(|row| row[j]).collect(), c[j]);
        }
        let p = solve_lp(&primal).unwrap().optimal().unwrap();
        let d = solve_lp(&dual).unwrap().optimal().unwrap();
        assert!(
            (p.value - d.value).abs() < 1e-8,
            "{} vs {}",
            p.value,
            d.value
        );
    }
}

#[test]
fn contradictory_system_is_infeasible() {
    let lp = LinearProgram::minimize(vec![1.0, 1.0])
        .all_free()
        .ge(vec![1.0, 1.0], 2.0)
        .le(vec![1.0, 1.0], 1.0);
    assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
    let empty = Polyhedron::whole_space(1)
        .with_ge(vec![1.0], 1.0)
        .and_then(|p| p.with_le(vec![1.0], 0.0))
        .unwrap();
    assert_eq!(find_feasible_point(&empty).unwrap(), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feasible_point_lies_in_polyhedron(seed in any::<u64>(), dim in 1usize..=5) {
        let mut r = rng(seed);
        let (poly, _) = random_polyhedron(&mut r, dim, 6);
        let x = find_feasible_point(&poly).unwrap();
        prop_assert!(x.is_some());
        prop_assert!(poly.contains(&x.unwrap(), 1e-7));
    }

    #[test]
    fn adding_a_constant_shifts_the_value(seed in any::<u64>(), shift in -5.0f64..5.0) {
        let mut r = rng(seed);
        let m = random_matrix(&mut r, 3, 3);
        let shifted: Vec<Vec<f64>> = m.iter().map(|row| row.iter().map(|v| v + shift).collect()).collect();
        let a = solve_zero_sum(&m).unwrap().value;
        let b = solve_zero_sum(&shifted).unwrap().value;
        prop_assert!((a + shift - b).abs() < 1e-8);
    }
}
