//! Linear programs in row form and a dense bounded-variable revised simplex.
//!
//! Problems are always minimisations:
//!
//! ```text
//! min  c'x   s.t.  a_i'x {<=, >=, =} b_i,   l <= x <= u
//! ```
//!
//! Row duals follow the usual sensitivity convention: `dual[i]` is the
//! derivative of the optimal objective with respect to `b_i`.

mod simplex;

use serde::Serialize;
use thiserror::Error;

pub use simplex::{solve, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LinearProgram {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn add_column(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        self.columns.push(Column {
            name: name.into(),
            cost,
            lower,
            upper,
        });
        self.columns.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        kind: RowKind,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            kind,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn count_rows(&self, kind: RowKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    /// Checks the structural invariants: finite data and `lower <= upper`.
    pub fn check(&self) -> Result<(), LpError> {
        for c in &self.columns {
            if !c.cost.is_finite() || c.lower.is_nan() || c.upper.is_nan() || c.lower > c.upper {
                return Err(LpError::Malformed(format!("column {}", c.name)));
            }
            if c.lower == f64::INFINITY || c.upper == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("column {}", c.name)));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite()
                || r.coeffs
                    .iter()
                    .any(|&(j, a)| j >= self.columns.len() || !a.is_finite())
            {
                return Err(LpError::Malformed(format!("row {}", r.name)));
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.cost * v).sum()
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// One per row.
    pub duals: Vec<f64>,
    /// Reduced cost per column at the optimum.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    /// Value of the bounded dual `b'y + sum_j (l_j d_j^+ - u_j d_j^-)`.
    ///
    /// Row duals must carry the sign their row sense allows (`<=` rows
    /// non-positive, `>=` rows non-negative) and a reduced cost may only
    /// price a finite bound; otherwise the dual point is infeasible and the
    /// result is `-inf`. `tol` absorbs round-off in those sign checks.
    pub fn dual_objective(&self, lp: &LinearProgram, tol: f64) -> f64 {
        let mut value = 0.0;
        for (r, &y) in lp.rows.iter().zip(&self.duals) {
            let sign_ok = match r.kind {
                RowKind::Le => y <= tol,
                RowKind::Ge => y >= -tol,
                RowKind::Eq => true,
            };
            if !sign_ok {
                return f64::NEG_INFINITY;
            }
            value += r.rhs * y;
        }
        for (c, &d) in lp.columns.iter().zip(&self.reduced_costs) {
            if d > tol {
                if !c.lower.is_finite() {
                    return f64::NEG_INFINITY;
                }
                value += d * c.lower;
            } else if d < -tol {
                if !c.upper.is_finite() {
                    return f64::NEG_INFINITY;
                }
                value += d * c.upper;
            }
        }
        value
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("infeasible: constraint '{row}' cannot be satisfied")]
    Infeasible { row: String },
    #[error("unbounded: column '{column}' can improve the objective without limit")]
    Unbounded { column: String },
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}
