//! Test oracles and random instance generators. Nothing here calls the
//! solvers under test.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tu_consensus::adversarial::{MixedStrategy, VectorPayoffGame};
use tu_consensus::game::{CharacteristicFunction, Coalition};
use tu_consensus::optim::{Polyhedron, Row};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Gaussian elimination with partial pivoting. `None` when the matrix is
/// singular relative to its largest entry.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exact Euclidean projection by active-set enumeration: every subset of
/// inequality rows is tried as tight together with all equality rows; the
/// equality-constrained least-squares point is kept when it is feasible
/// and its inequality multipliers have the right sign.
pub fn project_oracle(x: &[f64], p: &Polyhedron) -> Option<Vec<f64>> {
    let dim = p.dim();
    let ineq = p.ineq_rows();
    assert!(ineq.len() <= 20, "oracle is exponential in the row count");
    let feas_tol = 1e-9 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << ineq.len()) {
        let active: Vec<&Row> = p
            .eq_rows()
            .iter()
            .chain(
                (0..ineq.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| &ineq[i]),
            )
            .collect();
        if active.len() > dim {
            continue;
        }
        let n_eq = p.eq_rows().len();
        // y = x − Aᵀμ with (AAᵀ)μ = Ax − b.
        let (y, mu) = if active.is_empty() {
            (x.to_vec(), Vec::new())
        } else {
            let gram: Vec<Vec<f64>> = active
                .iter()
                .map(|ri| {
                    active
                        .iter()
                        .map(|rj| dot(&ri.coeffs, &rj.coeffs))
                        .collect()
                })
                .collect();
            let rhs: Vec<f64> = active.iter().map(|r| dot(&r.coeffs, x) - r.rhs).collect();
            let Some(mu) = solve_linear(gram, rhs) else {
                continue;
            };
            let mut y = x.to_vec();
            for (r, m) in active.iter().zip(&mu) {
                for (yi, a) in y.iter_mut().zip(&r.coeffs) {
                    *yi -= m * a;
                }
            }
            (y, mu)
        };
        // Inequality rows a·y ≥ b need y − x = κa with κ ≥ 0, i.e. μ ≤ 0.
        if mu[n_eq..].iter().any(|&m| m > 1e-9) {
            continue;
        }
        let feasible = p
            .eq_rows()
            .iter()
            .all(|r| (dot(&r.coeffs, &y) - r.rhs).abs() <= feas_tol)
            && ineq.iter().all(|r| dot(&r.coeffs, &y) - r.rhs >= -feas_tol);
        if !feasible {
            continue;
        }
        let d = dist(x, &y);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, y));
        }
    }
    best.map(|(_, y)| y)
}

/// Row-minimizer value by brute force over a grid of the smaller side's
/// simplex with spacing `1/steps`. Supports up to 3 strategies on that side.
pub fn grid_value(m: &[Vec<f64>], steps: usize) -> f64 {
    let rows = m.len();
    let cols = m[0].len();
    let h = 1.0 / steps as f64;
    if rows <= cols {
        // min over p of max_k (pᵀM)_k
        let payoff = |p: &[f64]| {
            (0..cols)
                .map(|k| (0..rows).map(|j| p[j] * m[j][k]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        simplex_grid(rows, steps, h)
            .map(|p| payoff(&p))
            .fold(f64::INFINITY, f64::min)
    } else {
        // max over q of min_j (Mq)_j
        let payoff = |q: &[f64]| {
            m.iter()
                .map(|row| dot(row, q))
                .fold(f64::INFINITY, f64::min)
        };
        simplex_grid(cols, steps, h)
            .map(|q| payoff(&q))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn simplex_grid(d: usize, steps: usize, h: f64) -> Box<dyn Iterator<Item = Vec<f64>>> {
    match d {
        1 => Box::new(std::iter::once(vec![1.0])),
        2 => Box::new((0..=steps).map(move |i| vec![i as f64 * h, 1.0 - i as f64 * h])),
        3 => Box::new((0..=steps).flat_map(move |i| {
            (0..=steps - i).map(move |j| {
                let (a, b) = (i as f64 * h, j as f64 * h);
                vec![a, b, (1.0 - a - b).max(0.0)]
            })
        })),
        _ => panic!("grid oracle supports at most 3 strategies"),
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// A random polyhedron in `dim ≤ 4` that contains the returned center:
/// up to `max_rows` inequalities and sometimes one equality through it.
pub fn random_polyhedron(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_rows: usize,
) -> (Polyhedron, Vec<f64>) {
    let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut eq = Vec::new();
    if dim >= 2 && rng.random_bool(0.3) {
        let a = random_direction(rng, dim);
        eq.push(Row::new(a.clone(), dot(&a, &center)));
    }
    let count = rng.random_range(1..=max_rows);
    let ineq = (0..count)
        .map(|_| {
            let a = random_direction(rng, dim);
            let slack = if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(0.0..1.5)
            };
            Row::new(a.clone(), dot(&a, &center) - slack)
        })
        .collect();
    (
        Polyhedron::new(dim, eq, ineq).expect("generated polyhedron is valid"),
        center,
    )
}

/// Nonzero direction with integer-ish entries mixed with random reals.
fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let a: Vec<f64> = (0..dim)
            .map(|_| {
                if rng.random_bool(0.3) {
                    rng.random_range(-1i32..=1) as f64
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        if a.iter().map(|v| v * v).sum::<f64>() > 1e-2 {
            return a;
        }
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-scale..scale)).collect()
}

/// A game whose core contains the returned allocation: every listed
/// coalition's value sits at or below that allocation's coalition payoff.
pub fn random_nonempty_game(rng: &mut ChaCha8Rng, n: usize) -> (CharacteristicFunction, Vec<f64>) {
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    let total: f64 = x.iter().sum();
    let mut cf = CharacteristicFunction::new(n, total).unwrap();
    for mask in 1..(1u32 << n) - 1 {
        if !rng.random_bool(0.6) {
            continue;
        }
        let c = Coalition::from_mask(mask);
        let tight = rng.random_bool(0.2);
        let slack = if tight {
            0.0
        } else {
            rng.random_range(0.0..1.0)
        };
        cf.set(&c.members(), c.payoff(&x) - slack).unwrap();
    }
    (cf, x)
}

/// Connected graph on `n` vertices: a random spanning tree plus extra edges.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.25) && !edges.contains(&(a, b)) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// The four-player game used throughout the docs.
pub fn four_player_game() -> CharacteristicFunction {
    CharacteristicFunction::new(4, 10.0)
        .unwrap()
        .with_value(&[0], 2.0)
        .unwrap()
        .with_value(&[1], 2.0)
        .unwrap()
        .with_value(&[2], 2.0)
        .unwrap()
        .with_value(&[3], 2.0)
        .unwrap()
        .with_value(&[0, 1], 5.0)
        .unwrap()
        .with_value(&[2, 3], 5.0)
        .unwrap()
        .with_value(&[0, 1, 2], 7.0)
        .unwrap()
}

pub fn random_game(r: &mut ChaCha8Rng, s1: usize, s2: usize, dim: usize) -> VectorPayoffGame {
    VectorPayoffGame::new(
        (0..s1)
            .map(|_| {
                (0..s2)
                    .map(|_| (0..dim).map(|_| r.random_range(-2.0..2.0)).collect())
                    .collect()
            })
            .collect(),
    )
    .unwrap()
}

/// A polyhedron in which every row keeps at least `depth` of slack at
/// `center`, scaled by the row norm.
pub fn deep_polyhedron(r: &mut ChaCha8Rng, dim: usize, center: &[f64], depth: f64) -> Polyhedron {
    let rows = (0..r.random_range(dim + 1..=dim + 4))
        .map(|_| {
            let a: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
            let len = dot(&a, &a).sqrt().max(1e-3);
            let slack = depth + r.random_range(0.0..1.0);
            Row::new(a.clone(), dot(&a, center) - slack * len)
        })
        .collect();
    Polyhedron::new(dim, Vec::new(), rows).unwrap()
}

/// A game, target and outside point for which Blackwell's condition holds
/// with room to spare: row `safe` only pays points deep inside `X`.
pub fn satisfiable_triple(r: &mut ChaCha8Rng) -> (VectorPayoffGame, Polyhedron, Vec<f64>) {
    let dim = r.random_range(2..=3);
    let (s1, s2) = (r.random_range(2..=4), r.random_range(2..=4));
    let center: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
    let x = deep_polyhedron(r, dim, &center, 0.3);
    let safe = r.random_range(0..s1);
    let mut payoffs = random_game(r, s1, s2, dim).payoffs().to_vec();
    for k in 0..s2 {
        payoffs[safe][k] = center
            .iter()
            .map(|c| c + r.random_range(-0.05..0.05))
            .collect();
    }
    let game = VectorPayoffGame::new(payoffs).unwrap();
    let w = loop {
        let w: Vec<f64> = (0..dim).map(|_| r.random_range(-4.0..4.0)).collect();
        let p = project_oracle(&w, &x).unwrap();
        if dist(&w, &p) > 0.1 {
            break w;
        }
    };
    (game, x, w)
}

/// `λ·(𝔼x(p, k) − P_X[w])` for every pure opponent action, with `λ` and the
/// projection from the oracle.
pub fn separations(
    game: &VectorPayoffGame,
    x: &Polyhedron,
    w: &[f64],
    p: &MixedStrategy,
) -> Vec<f64> {
    let anchor = project_oracle(w, x).unwrap();
    let lambda: Vec<f64> = w.iter().zip(&anchor).map(|(a, b)| a - b).collect();
    (0..game.col_actions())
        .map(|k| {
            let diff: Vec<f64> = (0..game.dim())
                .map(|c| {
                    let e: f64 = (0..game.row_actions())
                        .map(|j| p.probs()[j] * game.payoff(j, k)[c])
                        .sum();
                    e - anchor[c]
                })
                .collect();
            dot(&lambda, &diff)
        })
        .collect()
}
