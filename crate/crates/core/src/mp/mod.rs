//! Self-contained dense LP/MIP kernel.
//!
//! Sized for the small programs this solver generates: tens of variables,
//! hundreds of constraints. LPs go through a two-phase dense simplex; MIPs
//! through depth-first branch-and-bound over binary variables with LP
//! relaxation bounding and a rounding heuristic. Everything is

//! deterministic: ties break toward the lowest index and branching picks
//! the lowest-index fractional binary first.

mod mip;
mod simplex;

use crate::config::Tolerances;
use crate::error::MpError;
use serde::{Deserialize, Serialize};

/// Objective direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Min,
    Max,
}

/// Constraint comparison operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

/// One dense constraint row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// Canonical LP/MIP description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MathProgram {
    sense: Sense,
    objective: Vec<f64>,
    rows: Vec<Row>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    binary: Vec<bool>,
    warm_start: Option<Vec<f64>>,
}

/// Solution status. `IterationLimit` and `NodeLimit` signal numerical
/// trouble; callers must treat them as failures, not answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NodeLimit,
}

/// Solver output: optimal solutions carry the assignment; other statuses
/// carry whatever partial information exists (objective is meaningless
/// unless `Optimal`).
#[derive(Debug, Clone)]
pub struct MpSolution {
    pub status: MpStatus,
    pub objective: f64,
    pub assignment: Vec<f64>,
}

impl MpSolution {
    pub(crate) fn of_status(status: MpStatus) -> MpSolution {
        MpSolution {
            status,
            objective: f64::NAN,
            assignment: Vec::new(),
        }
    }

    /// Unwraps an optimal solution, failing loudly otherwise.
    pub fn expect_optimal(self) -> Result<MpSolution, MpError> {
        match self.status {
            MpStatus::Optimal => Ok(self),
            other => Err(MpError::NotOptimal(format!("{other:?}"))),
        }
    }
}

impl MathProgram {
    pub fn new(sense: Sense, num_vars: usize) -> MathProgram {
        MathProgram {
            sense,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            lower: vec![f64::NEG_INFINITY; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            binary: vec![false; num_vars],
            warm_start: None,
        }
    }

    pub fn minimize(num_vars: usize) -> MathProgram {
        MathProgram::new(Sense::Min, num_vars)
    }

    pub fn maximize(num_vars: usize) -> MathProgram {
        MathProgram::new(Sense::Max, num_vars)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn set_objective(&mut self, j: usize, coeff: f64) {
        self.objective[j] = coeff;
    }

    pub fn objective_coeffs(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    /// Declares variable `j` binary (bounds become `[0, 1]`).
    pub fn set_binary(&mut self, j: usize) {
        self.binary[j] = true;
        self.lower[j] = 0.0;
        self.upper[j] = 1.0;
    }

    pub fn binary_indices(&self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&j| self.binary[j]).collect()
    }

    pub fn has_binaries(&self) -> bool {
        self.binary.iter().any(|&b| b)
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.num_vars());
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    /// Convenience: sparse terms expanded into a dense row.
    pub fn add_row_sparse(&mut self, terms: &[(usize, f64)], cmp: Cmp, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_row(coeffs, cmp, rhs);
    }

    /// Feasible starting point used by branch-and-bound as the initial
    /// incumbent. Must satisfy every constraint and integrality.
    pub fn set_warm_start(&mut self, assignment: Vec<f64>) {
        debug_assert_eq!(assignment.len(), self.num_vars());
        self.warm_start = Some(assignment);
    }

    pub(crate) fn warm_start(&self) -> Option<&[f64]> {
        self.warm_start.as_deref()
    }

    pub(crate) fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub(crate) fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    pub(crate) fn rows(&self) -> &[Row] {
        &self.rows
    }

    fn validate(&self) -> Result<(), MpError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(MpError::BadProgram("no variables".into()));
        }
        for (j, &c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(MpError::BadProgram(format!("objective coeff {j} is {c}")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(MpError::BadProgram(format!(
                    "row {i} has {} coeffs, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(MpError::BadProgram(format!("row {i} has non-finite data")));
            }
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(MpError::BadProgram(format!("variable {j} has NaN bound")));
            }
        }
        if let Some(ws) = &self.warm_start {
            if ws.len() != n {
                return Err(MpError::BadProgram(format!(
                    "warm start has {} entries, expected {n}",
                    ws.len()
                )));
            }
        }
        Ok(())
    }

    /// Objective value of an arbitrary assignment (in the program's own
    /// sense, no direction flip).
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Maximum constraint/bound violation of an assignment.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let viol = match row.cmp {
                Cmp::Le => lhs - row.rhs,
                Cmp::Ge => row.rhs - lhs,
                Cmp::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]);
            worst = worst.max(x[j] - self.upper[j]);
        }
        worst
    }

    /// Solves a pure LP. Errors if any variable is binary.
    pub fn solve_lp(&self, tol: &Tolerances) -> Result<MpSolution, MpError> {
        self.validate()?;
        if self.has_binaries() {
            return Err(MpError::BadProgram(
                "program declares binaries; use solve_mip".into(),
            ));
        }
        simplex::solve_with_bounds(self, &self.lower, &self.upper, tol)
    }

    /// Solves a mixed binary program by branch-and-bound.
    pub fn solve_mip(&self, tol: &Tolerances) -> Result<MpSolution, MpError> {
        self.validate()?;
        if !self.has_binaries() {
            return simplex::solve_with_bounds(self, &self.lower, &self.upper, tol);
        }
        mip::branch_and_bound(self, tol)
    }

    /// Textual dump in CPLEX LP format for debugging against external
    /// solvers.
    pub fn to_lp_format(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("\\ Problem: {name}\n"));
        out.push_str(match self.sense {
            Sense::Min => "Minimize\n",
            Sense::Max => "Maximize\n",
        });
        out.push_str(&format!(
            " obj:{}\n",
            lp_terms(&self.objective)
        ));
        out.push_str("Subject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            let op = match row.cmp {
                Cmp::Le => "<=",
                Cmp::Eq => "=",
                Cmp::Ge => ">=",
            };
            out.push_str(&format!(" c{i}:{} {op} {}\n", lp_terms(&row.coeffs), row.rhs));
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
                out.push_str(&format!(" x{j} free\n"));
            } else if lo == f64::NEG_INFINITY {
                out.push_str(&format!(" -infinity <= x{j} <= {hi}\n"));
            } else if hi == f64::INFINITY {
                out.push_str(&format!(" x{j} >= {lo}\n"));
            } else {
                out.push_str(&format!(" {lo} <= x{j} <= {hi}\n"));
            }
        }
        let bins = self.binary_indices();
        if !bins.is_empty() {
            out.push_str("Binaries\n ");
            out.push_str(
                &bins
                    .iter()
                    .map(|j| format!("x{j}"))
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push('\n');
        }
        out.push_str("End\n");
        out
    }
}

fn lp_terms(coeffs: &[f64]) -> String {
    let mut s = String::new();
    let mut wrote = false;
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        if c < 0.0 {
            s.push_str(&format!(" - {} x{j}", -c));
        } else if wrote {
            s.push_str(&format!(" + {c} x{j}"));
        } else {
            s.push_str(&format!(" {c} x{j}"));
        }
        wrote = true;
    }
    if !wrote {
        s.push_str(" 0 x0");
    }
    s
}
