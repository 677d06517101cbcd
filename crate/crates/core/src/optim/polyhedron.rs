use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;

/// A single linear row `coeffs · x (= | ≥) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Row { coeffs, rhs }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x)
    }
}

/// `{ x ∈ ℝ^dim : eq_rows hold with equality, ineq_rows hold as coeffs·x ≥ rhs }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolyhedron")]
pub struct Polyhedron {
    dim: usize,
    eq_rows: Vec<Row>,
    ineq_rows: Vec<Row>,
}

#[derive(Deserialize)]
struct RawPolyhedron {
    dim: usize,
    #[serde(default)]
    eq_rows: Vec<Row>,
    #[serde(default)]
    ineq_rows: Vec<Row>,
}

impl TryFrom<RawPolyhedron> for Polyhedron {
    type Error = Error;

    fn try_from(raw: RawPolyhedron) -> Result<Self> {
        Polyhedron::new(raw.dim, raw.eq_rows, raw.ineq_rows)
    }
}

impl Polyhedron {
    pub fn new(dim: usize, eq_rows: Vec<Row>, ineq_rows: Vec<Row>) -> Result<Self> {
        let p = Polyhedron {
            dim,
            eq_rows,
            ineq_rows,
        };
        p.validate()?;
        Ok(p)
    }

    /// All of ℝ^dim.
    pub fn whole_space(dim: usize) -> Self {
        Polyhedron {
            dim,
            eq_rows: Vec::new(),
            ineq_rows: Vec::new(),
        }
    }

    pub fn with_eq(mut self, coeffs: Vec<f64>, rhs: f64) -> Result<Self> {
        self.eq_rows.push(Row::new(coeffs, rhs));
        self.validate()?;
        Ok(self)
    }

    pub fn with_ge(mut self, coeffs: Vec<f64>, lower: f64) -> Result<Self> {
        self.ineq_rows.push(Row::new(coeffs, lower));
        self.validate()?;
        Ok(self)
    }

    /// Adds `coeffs · x ≤ upper`, stored as `-coeffs · x ≥ -upper`.
    pub fn with_le(self, coeffs: Vec<f64>, upper: f64) -> Result<Self> {
        let neg = coeffs.into_iter().map(|c| 0.0 - c).collect();
        self.with_ge(neg, 0.0 - upper)
    }

    /// The probability simplex in ℝ^dim.
    pub fn simplex(dim: usize) -> Self {
        let mut ineq = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            ineq.push(Row::new(e, 0.0));
        }
        Polyhedron {
            dim,
            eq_rows: vec![Row::new(vec![1.0; dim], 1.0)],
            ineq_rows: ineq,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for row in self.eq_rows.iter().chain(&self.ineq_rows) {
            if row.coeffs.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: row.coeffs.len(),
                });
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteInput("polyhedron row".into()));
            }
            if row.coeffs.iter().all(|c| *c == 0.0) {
                return Err(Error::NonFiniteInput(
                    "polyhedron row with all-zero coefficients".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eq_rows(&self) -> &[Row] {
        &self.eq_rows
    }

    pub fn ineq_rows(&self) -> &[Row] {
        &self.ineq_rows
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rows.len() + self.ineq_rows.len()
    }

    /// Largest violation over all rows, measured in the row's own scale.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self
            .eq_rows
            .iter()
            .map(|r| (r.eval(x) - r.rhs).abs())
            .fold(0.0, f64::max);
        let ineq = self
            .ineq_rows
            .iter()
            .map(|r| (r.rhs - r.eval(x)).max(0.0))
            .fold(0.0, f64::max);
        eq.max(ineq)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim && self.max_violation(x) <= tol
    }

    /// The same set shifted by `offset`.
    pub fn translate(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: offset.len(),
            });
        }
        let shift = |r: &Row| Row::new(r.coeffs.clone(), r.rhs + dot(&r.coeffs, offset));
        Ok(Polyhedron {
            dim: self.dim,
            eq_rows: self.eq_rows.iter().map(shift).collect(),
            ineq_rows: self.ineq_rows.iter().map(shift).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let err = Polyhedron::new(2, vec![Row::new(vec![1.0], 1.0)], vec![]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn le_rows_are_negated() {
        let p = Polyhedron::whole_space(1).with_le(vec![1.0], 0.0).unwrap();
        assert!(p.contains(&[-3.0], 0.0));
        assert!(!p.contains(&[0.5], 1e-9));
        assert_eq!(p.ineq_rows()[0], Row::new(vec![-1.0], 0.0));
    }

    #[test]
    fn simplex_membership() {
        let s = Polyhedron::simplex(3);
        assert!(s.contains(&[0.2, 0.3, 0.5], 1e-12));
        assert!(!s.contains(&[0.6, 0.6, -0.2], 1e-12));
        assert!((s.max_violation(&[1.0, 1.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn translation_moves_members() {
        let s = Polyhedron::simplex(2);
        let t = s.translate(&[1.0, -1.0]).unwrap();
        assert!(t.contains(&[1.5, -0.5], 1e-12));
        assert!(!t.contains(&[0.5, 0.5], 1e-9));
    }

    #[test]
    fn serde_round_trip() {
        let s = Polyhedron::simplex(3);
        let text = serde_json::to_string(&s).unwrap();
        let back: Polyhedron = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn deserialize_validates() {
        let bad = r#"{"dim": 2, "ineq_rows": [{"coeffs": [0.0, 0.0], "rhs": 1.0}]}"#;
        assert!(serde_json::from_str::<Polyhedron>(bad).is_err());
        let ragged = r#"{"dim": 2, "eq_rows": [{"coeffs": [1.0], "rhs": 1.0}]}"#;
        assert!(serde_json::from_str::<Polyhedron>(ragged).is_err());
    }
}
