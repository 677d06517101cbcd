//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Sized for the problems in this crate: tens of rows, a handful of columns.

use crate::error::{Error, Result};
use crate::linalg::dot;

use super::polyhedron::{Polyhedron, Row};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `optimize objective · x` subject to equality, `≥` and `≤` rows and
/// per-variable lower bounds (`None` marks a free variable).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    eq: Vec<Row>,
    ge: Vec<Row>,
    le: Vec<Row>,
    lower_bounds: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// All variables default to `x ≥ 0`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            eq: Vec::new(),
            ge: Vec::new(),
            le: Vec::new(),
            lower_bounds: vec![Some(0.0); n],
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    /// Feasibility problem over a polyhedron: zero objective, free variables.
    pub fn feasibility(p: &Polyhedron) -> Self {
        let mut lp = Self::minimize(vec![0.0; p.dim()]).all_free();
        lp.eq.extend(p.eq_rows().iter().cloned());
        lp.ge.extend(p.ineq_rows().iter().cloned());
        lp
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn eq(mut self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.eq.push(Row::new(coeffs, rhs));
        self
    }

    pub fn ge(mut self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.ge.push(Row::new(coeffs, rhs));
        self
    }

    pub fn le(mut self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.le.push(Row::new(coeffs, rhs));
        self
    }

    pub fn lower_bound(mut self, var: usize, bound: Option<f64>) -> Self {
        self.lower_bounds[var] = bound;
        self
    }

    pub fn all_free(mut self) -> Self {
        self.lower_bounds.iter_mut().for_each(|b| *b = None);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        for row in self.eq.iter().chain(&self.ge).chain(&self.le) {
            if row.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.coeffs.len(),
                });
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteInput("LP row".into()));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite())
            || self.lower_bounds.iter().flatten().any(|b| !b.is_finite())
        {
            return Err(Error::NonFiniteInput("LP objective or bounds".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Eq,
    Ge,
    Le,
}

/// Maps original variables onto nonnegative tableau columns.
enum VarMap {
    Shifted { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                row.iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(v, pv)| *v -= f * pv);
                row[e] = 0.0;
            }
        }
        let f = self.obj[e];
        if f != 0.0 {
            self.obj
                .iter_mut()
                .zip(&pivot_row)
                .for_each(|(v, pv)| *v -= f * pv);
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
    }

    /// Sets the objective row from a cost vector over all columns.
    fn price(&mut self, cost: &[f64]) {
        self.obj = cost.to_vec();
        self.obj.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (v, t) in self.obj.iter_mut().zip(&self.rows[i]) {
                    *v -= cb * t;
                }
            }
        }
    }

    /// Runs Bland-rule pivots until optimal; `Ok(false)` means unbounded.
    fn optimize(&mut self, allowed: usize, pivots: &mut usize) -> Result<bool> {
        loop {
            let Some(e) = (0..allowed).find(|&j| self.obj[j] < -COST_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][e];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, e);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::LpNumerical(format!(
                    "pivot limit {MAX_PIVOTS} exceeded"
                )));
            }
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;

    let mut ncols = 0;
    let vars: Vec<VarMap> = lp
        .lower_bounds
        .iter()
        .map(|b| match b {
            Some(lower) => {
                ncols += 1;
                VarMap::Shifted {
                    col: ncols - 1,
                    lower: *lower,
                }
            }
            None => {
                ncols += 2;
                VarMap::Split {
                    pos: ncols - 2,
                    neg: ncols - 1,
                }
            }
        })
        .collect();
    let structural = ncols;

    let constraints: Vec<(&Row, Kind)> = lp
        .eq
        .iter()
        .map(|r| (r, Kind::Eq))
        .chain(lp.ge.iter().map(|r| (r, Kind::Ge)))
        .chain(lp.le.iter().map(|r| (r, Kind::Le)))
        .collect();
    let n_slack = constraints.iter().filter(|(_, k)| *k != Kind::Eq).count();
    let m = constraints.len();
    let art0 = structural + n_slack;
    let width = art0 + m;

    let mut rows = Vec::with_capacity(m);
    let mut slack = structural;
    for (i, (row, kind)) in constraints.iter().enumerate() {
        let mut t = vec![0.0; width + 1];
        let mut rhs = row.rhs;
        for (j, map) in vars.iter().enumerate() {
            let a = row.coeffs[j];
            match *map {
                VarMap::Shifted { col, lower } => {
                    t[col] = a;
                    rhs -= a * lower;
                }
                VarMap::Split { pos, neg } => {
                    t[pos] = a;
                    t[neg] = -a;
                }
            }
        }
        match kind {
            Kind::Ge => {
                t[slack] = -1.0;
                slack += 1;
            }
            Kind::Le => {
                t[slack] = 1.0;
                slack += 1;
            }
            Kind::Eq => {}
        }
        t[width] = rhs;
        if rhs < 0.0 {
            t.iter_mut().for_each(|v| *v = -*v);
        }
        t[art0 + i] = 1.0;
        rows.push(t);
    }

    let mut tab = Tableau {
        rows,
        obj: Vec::new(),
        basis: (art0..art0 + m).collect(),
        width,
    };
    let mut pivots = 0;

    // Phase 1: drive the artificial sum to zero.
    let mut phase1_cost = vec![0.0; width];
    phase1_cost[art0..].iter_mut().for_each(|c| *c = 1.0);
    tab.price(&phase1_cost);
    if !tab.optimize(width, &mut pivots)? {
        return Err(Error::LpNumerical("phase 1 reported unbounded".into()));
    }
    let infeasibility = -tab.obj[width];
    let scale = 1.0
        + constraints
            .iter()
            .map(|(r, _)| r.rhs.abs())
            .fold(0.0, f64::max);
    if infeasibility > FEAS_TOL * scale {
        return Ok(LpOutcome::Infeasible);
    }

    // Pivot remaining artificials out of the basis, dropping redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= art0 {
            match (0..art0).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // Phase 2 over structural and slack columns only.
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; width];
    for (j, map) in vars.iter().enumerate() {
        let c = sign * lp.objective[j];
        match *map {
            VarMap::Shifted { col, .. } => cost[col] = c,
            VarMap::Split { pos, neg } => {
                cost[pos] = c;
                cost[neg] = -c;
            }
        }
    }
    tab.price(&cost);
    if !tab.optimize(art0, &mut pivots)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut col_values = vec![0.0; width];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_values[b] = tab.rhs(i).max(0.0);
    }
    let x: Vec<f64> = vars
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, lower } => lower + col_values[col],
            VarMap::Split { pos, neg } => col_values[pos] - col_values[neg],
        })
        .collect();
    let value = dot(&lp.objective, &x);
    Ok(LpOutcome::Optimal(LpSolution { x, value }))
}

/// Returns a point of `p`, `None` when it is empty.
pub fn find_feasible_point(p: &Polyhedron) -> Result<Option<Vec<f64>>> {
    match solve_lp(&LinearProgram::feasibility(p))? {
        LpOutcome::Optimal(s) => Ok(Some(s.x)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::LpNumerical(
            "zero objective reported unbounded".into(),
        )),
    }
}
