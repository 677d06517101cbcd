//! Time-varying communication graphs and doubly stochastic weights.
//!
//! Players are indexed `0..n`. Edges are undirected and stored as `(i, j)`
//! with `i < j`; every player always averages with itself.

use std::fmt;
use std::str::FromStr;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Edge = (usize, usize);

const STOCHASTIC_TOL: f64 = 1e-12;

/// Sorts, deduplicates and orients edges as `(min, max)`.
pub fn normalize_edges(edges: &[Edge], n: usize) -> Result<Vec<Edge>> {
    let mut out = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a == b {
            return Err(Error::InvalidSchedule(format!("self-loop at node {a}")));
        }
        if a >= n || b >= n {
            return Err(Error::PlayerOutOfRange {
                index: a.max(b),
                players: n,
            });
        }
        out.push((a.min(b), a.max(b)));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Cycle,
    Complete,
    Path,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(Topology::Cycle),
            "complete" => Ok(Topology::Complete),
            "path" => Ok(Topology::Path),
            other => Err(Error::UnsupportedTopology(other.to_string())),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Cycle => "cycle",
            Topology::Complete => "complete",
            Topology::Path => "path",
        })
    }
}

/// Edge list of a topology, in a fixed order: the cycle lists `(0,1), (1,2),
/// …, (n-2,n-1)` and then the closing edge `(n-1, 0)`.
pub fn topology_edges(n: usize, topology: Topology) -> Vec<Edge> {
    match topology {
        Topology::Path => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        Topology::Cycle => {
            let mut e = topology_edges(n, Topology::Path);
            if n > 2 {
                e.push((0, n - 1));
            }
            e
        }
        Topology::Complete => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
    }
}

/// A random connected graph: a shuffled spanning tree plus each remaining
/// pair independently with probability `extra`.
pub fn random_connected_edges<R: Rng + ?Sized>(n: usize, extra: f64, rng: &mut R) -> Vec<Edge> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<Edge> = (1..n)
        .map(|k| {
            let parent = order[rng.random_range(0..k)];
            (parent.min(order[k]), parent.max(order[k]))
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.random_bool(extra.clamp(0.0, 1.0)) {
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// An `n × n` row-major weight matrix `A(t)`; `a_ij` is the weight player
/// `i` puts on player `j`'s estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    data: Vec<f64>,
    alpha: f64,
}

impl WeightMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        (0..n).for_each(|i| data[i * n + i] = 1.0);
        WeightMatrix {
            n,
            data,
            alpha: 1.0,
        }
    }

    /// Builds from rows and validates the doubly stochastic invariants.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        let alpha = data
            .iter()
            .copied()
            .filter(|v| *v > 0.0)
            .fold(f64::INFINITY, f64::min);
        let w = WeightMatrix { n, data, alpha };
        let problems = w.invariant_violations(None);
        if let Some(p) = problems.into_iter().next() {
            return Err(Error::InvalidWeights(p));
        }
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Lower bound on every positive entry.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Every broken invariant, described; empty when the matrix is valid.
    /// With `edges`, positive off-diagonal entries must sit on an edge.
    pub fn invariant_violations(&self, edges: Option<&[Edge]>) -> Vec<String> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            let row: f64 = self.row(i).iter().sum();
            let col: f64 = (0..n).map(|k| self.get(k, i)).sum();
            if (row - 1.0).abs() > STOCHASTIC_TOL {
                out.push(format!("row {i} sums to {row}"));
            }
            if (col - 1.0).abs() > STOCHASTIC_TOL {
                out.push(format!("column {i} sums to {col}"));
            }
            if self.get(i, i) <= 0.0 {
                out.push(format!("diagonal entry {i} is not positive"));
            }
            for j in 0..n {
                let a = self.get(i, j);
                if a < 0.0 {
                    out.push(format!("entry ({i},{j}) is negative"));
                }
                if a > 0.0 && a < self.alpha - STOCHASTIC_TOL {
                    out.push(format!("entry ({i},{j}) below alpha {}", self.alpha));
                }
                if let Some(edges) = edges {
                    let linked = i == j || edges.contains(&(i.min(j), i.max(j)));
                    if a > 0.0 && !linked {
                        out.push(format!("entry ({i},{j}) positive without an edge"));
                    }
                }
            }
        }
        out
    }
}

/// Metropolis-Hastings weights: `a_ij = 1/(1 + max(deg_i, deg_j))` on edges,
/// the remainder on the diagonal. Symmetric, hence doubly stochastic.
pub fn metropolis_weights(edges: &[Edge], n: usize) -> Result<WeightMatrix> {
    let edges = normalize_edges(edges, n)?;
    let mut degree = vec![0usize; n];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut data = vec![0.0; n * n];
    for &(a, b) in &edges {
        let w = 1.0 / (1 + degree[a].max(degree[b])) as f64;
        data[a * n + b] = w;
        data[b * n + a] = w;
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| data[i * n + j]).sum();
        data[i * n + i] = 1.0 - off;
    }
    let max_degree = degree.iter().copied().max().unwrap_or(0);
    Ok(WeightMatrix {
        n,
        data,
        alpha: 1.0 / (1 + max_degree) as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Static,
    RoundRobin,
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
struct Phase {
    edges: Vec<Edge>,
    weights: WeightMatrix,
}

/// A periodic sequence of graphs `E(t)`; step `t` uses phase `t mod len`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSchedule {
    n: usize,
    kind: ScheduleKind,
    phases: Vec<Phase>,
}

impl GraphSchedule {
    fn from_phases(n: usize, kind: ScheduleKind, parts: Vec<Vec<Edge>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSchedule("no players".into()));
        }
        if parts.is_empty() {
            return Err(Error::InvalidSchedule("schedule has no steps".into()));
        }
        let phases = parts
            .into_iter()
            .map(|e| {
                let edges = normalize_edges(&e, n)?;
                let weights = metropolis_weights(&edges, n)?;
                Ok(Phase { edges, weights })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphSchedule { n, kind, phases })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn edges_at(&self, t: usize) -> &[Edge] {
        &self.phases[t % self.phases.len()].edges
    }

    pub fn weights_at(&self, t: usize) -> &WeightMatrix {
        &self.phases[t % self.phases.len()].weights
    }

    /// Number of distinct steps before the schedule repeats.
    pub fn period(&self) -> usize {
        self.phases.len()
    }

    /// The smallest window length that is guaranteed to work for generated
    /// schedules: 1 for static graphs, the cycle length otherwise.
    pub fn period_hint(&self) -> usize {
        match self.kind {
            ScheduleKind::Static => 1,
            _ => self.phases.len(),
        }
    }
}

pub fn schedule_static(n: usize, topology: Topology) -> Result<GraphSchedule> {
    GraphSchedule::from_phases(n, ScheduleKind::Static, vec![topology_edges(n, topology)])
}

pub fn schedule_static_edges(n: usize, edges: Vec<Edge>) -> Result<GraphSchedule> {
    GraphSchedule::from_phases(n, ScheduleKind::Static, vec![edges])
}

/// Splits the topology's edge list into consecutive chunks of
/// `edges_per_step` and activates one chunk per step, cyclically.
pub fn schedule_round_robin(
    n: usize,
    topology: Topology,
    edges_per_step: usize,
) -> Result<GraphSchedule> {
    if edges_per_step == 0 {
        return Err(Error::InvalidSchedule("edges_per_step must be ≥ 1".into()));
    }
    let edges = topology_edges(n, topology);
    let parts = if edges.is_empty() {
        vec![Vec::new()]
    } else {
        edges.chunks(edges_per_step).map(<[Edge]>::to_vec).collect()
    };
    GraphSchedule::from_phases(n, ScheduleKind::RoundRobin, parts)
}

/// User-supplied graphs, repeated cyclically.
pub fn schedule_explicit(n: usize, steps: Vec<Vec<Edge>>) -> Result<GraphSchedule> {
    GraphSchedule::from_phases(n, ScheduleKind::Explicit, steps)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectivityReport {
    pub connected: bool,
    pub first_failing_window: Option<usize>,
    pub windows_checked: usize,
}

/// Checks that the union graph over every complete window
/// `[kQ, (k+1)Q − 1]` inside `0..horizon` is connected.
pub fn verify_joint_connectivity(
    schedule: &GraphSchedule,
    q: usize,
    horizon: usize,
) -> ConnectivityReport {
    let n = schedule.n();
    let q = q.max(1);
    let windows = horizon / q;
    // Windows repeat once the schedule period and Q align.
    let distinct = windows.min(lcm(schedule.period(), q) / q);
    for k in 0..distinct {
        let mut uf = UnionFind::<usize>::new(n);
        for t in k * q..(k + 1) * q {
            for &(a, b) in schedule.edges_at(t) {
                uf.union(a, b);
            }
        }
        let root = uf.find(0);
        if (1..n).any(|i| uf.find(i) != root) {
            return ConnectivityReport {
                connected: false,
                first_failing_window: Some(k),
                windows_checked: k + 1,
            };
        }
    }
    ConnectivityReport {
        connected: true,
        first_failing_window: None,
        windows_checked: windows,
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
