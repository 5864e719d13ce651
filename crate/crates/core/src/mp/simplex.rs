//! Two-phase dense tableau simplex with general variable bounds.
//!
//! Variables are reduced to the standard non-negative form: finite lower
//! bounds shift, upper-only variables mirror, free variables split, and
//! fixed variables fold into the right-hand side. Anti-cycling follows the
//! configured policy: Dantzig pricing until the degenerate-pivot budget is
//! spent, Bland's rule afterwards.

use super::{Cmp, MathProgram, MpSolution, MpStatus, Sense};
use crate::config::Tolerances;
use crate::error::MpError;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-9;
const DEGENERATE_EPS: f64 = 1e-9;
const FIXED_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
enum VarMap {
    Fixed(f64),
    Shifted { col: usize, lo: f64 },
    Mirrored { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

/// Solves the program as a pure LP with the given bound vectors (which may
/// tighten the program's own bounds during branch-and-bound).
pub(crate) fn solve_with_bounds(
    p: &MathProgram,
    lower: &[f64],
    upper: &[f64],
    tol: &Tolerances,
) -> Result<MpSolution, MpError> {
    let n = p.num_vars();

    // Map variables to standard-form columns.
    let mut maps = Vec::with_capacity(n);
    let mut n_struct = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lower[j], upper[j]);
        if lo > hi + FIXED_EPS {
            return Ok(MpSolution::of_status(MpStatus::Infeasible));
        }
        if lo.is_finite() && hi.is_finite() && hi - lo <= FIXED_EPS {
            maps.push(VarMap::Fixed(lo));
        } else if lo.is_finite() {
            maps.push(VarMap::Shifted { col: n_struct, lo });
            if hi.is_finite() {
                bound_rows.push((n_struct, hi - lo));
            }
            n_struct += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirrored { col: n_struct, hi });
            n_struct += 1;
        } else {
            maps.push(VarMap::Split {
                pos: n_struct,
                neg: n_struct + 1,
            });
            n_struct += 2;
        }
    }

    // Constraint rows over structural columns.
    struct StdRow {
        coeffs: Vec<f64>,
        cmp: Cmp,
        rhs: f64,
    }
    let mut std_rows: Vec<StdRow> = Vec::new();
    for row in p.rows() {
        let mut coeffs = vec![0.0; n_struct];
        let mut rhs = row.rhs;
        for (j, &a) in row.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Fixed(v) => rhs -= a * v,
                VarMap::Shifted { col, lo } => {
                    coeffs[col] += a;
                    rhs -= a * lo;
                }
                VarMap::Mirrored { col, hi } => {
                    coeffs[col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        if coeffs.iter().all(|c| c.abs() <= FIXED_EPS) {
            // Variable-free row: consistency check only.
            let violated = match row.cmp {
                Cmp::Le => -rhs > tol.feasibility,
                Cmp::Ge => rhs > tol.feasibility,
                Cmp::Eq => rhs.abs() > tol.feasibility,
            };
            if violated {
                return Ok(MpSolution::of_status(MpStatus::Infeasible));
            }
            continue;
        }
        std_rows.push(StdRow {
            coeffs,
            cmp: row.cmp,
            rhs,
        });
    }
    for (col, ub) in bound_rows {
        let mut coeffs = vec![0.0; n_struct];
        coeffs[col] = 1.0;
        std_rows.push(StdRow {
            coeffs,
            cmp: Cmp::Le,
            rhs: ub,
        });
    }

    // Objective over structural columns (internally minimized).
    let flip = match p.sense() {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut c = vec![0.0; n_struct];
    for j in 0..n {
        let oc = flip * p.objective_coeffs()[j];
        if oc == 0.0 {
            continue;
        }
        match maps[j] {
            VarMap::Fixed(_) => {}
            VarMap::Shifted { col, .. } => c[col] += oc,
            VarMap::Mirrored { col, .. } => c[col] -= oc,
            VarMap::Split { pos, neg } => {
                c[pos] += oc;
                c[neg] -= oc;
            }
        }
    }

    let m = std_rows.len();
    if n_struct == 0 || m == 0 {
        // Everything fixed or unconstrained. With no rows, any in-bounds
        // point is feasible; minimize each split/shifted var greedily.
        let mut x = vec![0.0; n];
        for j in 0..n {
            x[j] = match maps[j] {
                VarMap::Fixed(v) => v,
                VarMap::Shifted { lo, .. } => {
                    let oc = flip * p.objective_coeffs()[j];
                    if oc >= 0.0 {
                        lo
                    } else if upper[j].is_finite() {
                        upper[j]
                    } else {
                        return Ok(MpSolution::of_status(MpStatus::Unbounded));
                    }
                }
                VarMap::Mirrored { hi, .. } => {
                    let oc = flip * p.objective_coeffs()[j];
                    if oc <= 0.0 {
                        hi
                    } else {
                        return Ok(MpSolution::of_status(MpStatus::Unbounded));
                    }
                }
                VarMap::Split { .. } => {
                    let oc = flip * p.objective_coeffs()[j];
                    if oc != 0.0 {
                        return Ok(MpSolution::of_status(MpStatus::Unbounded));
                    }
                    0.0
                }
            };
        }
        if m > 0 {
            // rows exist but no structural columns: already checked above
        }
        let objective = p.objective_value(&x);
        return Ok(MpSolution {
            status: MpStatus::Optimal,
            objective,
            assignment: x,
        });
    }

    // Slack columns, then sign-normalize rhs.
    let mut n_slack = 0usize;
    let slack_col: Vec<Option<usize>> = std_rows
        .iter()
        .map(|r| match r.cmp {
            Cmp::Le | Cmp::Ge => {
                let col = n_struct + n_slack;
                n_slack += 1;
                Some(col)
            }
            Cmp::Eq => None,
        })
        .collect();
    let n_before_art = n_struct + n_slack;

    // Assemble rows; decide basis column per row (slack if usable,
    // artificial otherwise).
    let mut rows_data: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut basis_plan: Vec<Option<usize>> = Vec::with_capacity(m);
    let mut n_art = 0usize;
    for (i, r) in std_rows.iter().enumerate() {
        let mut row = vec![0.0; n_before_art];
        row[..n_struct].copy_from_slice(&r.coeffs);
        let mut b = r.rhs;
        let mut slack_sign = 0.0;
        if let Some(col) = slack_col[i] {
            slack_sign = match r.cmp {
                Cmp::Le => 1.0,
                Cmp::Ge => -1.0,
                Cmp::Eq => unreachable!(),
            };
            row[col] = slack_sign;
        }
        if b < 0.0 {
            for v in &mut row {
                *v = -*v;
            }
            b = -b;
            slack_sign = -slack_sign;
        }
        let basic = if slack_sign > 0.0 {
            Some(slack_col[i].unwrap())
        } else {
            n_art += 1;
            None
        };
        basis_plan.push(basic);
        rows_data.push(row);
        rhs.push(b);
    }

    let n_total = n_before_art + n_art;
    let width = n_total + 1; // + rhs column
    let mut tab = vec![0.0; (m + 1) * width]; // last row = cost row
    let mut basis = vec![0usize; m];
    let mut art_i = 0usize;
    for i in 0..m {
        let off = i * width;
        tab[off..off + n_before_art].copy_from_slice(&rows_data[i]);
        tab[off + n_total] = rhs[i];
        basis[i] = match basis_plan[i] {
            Some(col) => col,
            None => {
                let col = n_before_art + art_i;
                art_i += 1;
                tab[off + col] = 1.0;
                col
            }
        };
    }

    let mut t = Tableau {
        tab,
        m,
        width,
        n_total,
        basis,
        pivots: 0,
        degenerate: 0,
        pivot_cap: tol.lp_pivot_cap,
        bland_threshold: tol.bland_threshold,
    };

    // Phase 1: minimize the sum of artificials (skipped when none).
    if n_art > 0 {
        let cost_off = m * width;
        for v in &mut t.tab[cost_off..cost_off + width] {
            *v = 0.0;
        }
        for i in 0..m {
            if t.basis[i] >= n_before_art {
                let row_off = i * width;
                for j in 0..width {
                    t.tab[cost_off + j] -= t.tab[row_off + j];
                }
            }
        }
        // artificial columns cost 1
        for j in n_before_art..n_total {
            t.tab[cost_off + j] += 1.0;
        }
        match t.run(n_total)? {
            LoopEnd::Optimal => {}
            LoopEnd::Unbounded => {
                return Err(MpError::BadProgram(
                    "phase-1 objective unbounded (internal)".into(),
                ))
            }
        }
        let phase1_obj = -t.tab[m * width + n_total];
        if phase1_obj > tol.feasibility {
            return Ok(MpSolution::of_status(MpStatus::Infeasible));
        }
        // Drive artificials out of the basis where possible; rows where no
        // structural pivot exists are redundant and keep a zero-valued
        // artificial that is never allowed to re-enter.
        for i in 0..m {
            if t.basis[i] >= n_before_art {
                let row_off = i * width;
                let col = (0..n_before_art)
                    .find(|&j| t.tab[row_off + j].abs() > PIVOT_EPS);
                if let Some(j) = col {
                    t.pivot(i, j);
                }
            }
        }
    }

    // Phase 2 cost row for the real objective.
    {
        let cost_off = m * width;
        for j in 0..width {
            t.tab[cost_off + j] = 0.0;
        }
        for (j, &cj) in c.iter().enumerate() {
            t.tab[cost_off + j] = cj;
        }
        for i in 0..m {
            let bj = t.basis[i];
            let cb = if bj < n_struct { c[bj] } else { 0.0 };
            if cb != 0.0 {
                let row_off = i * width;
                for j in 0..width {
                    t.tab[cost_off + j] -= cb * t.tab[row_off + j];
                }
            }
        }
    }

    let status = match t.run(n_before_art)? {
        LoopEnd::Optimal => MpStatus::Optimal,
        LoopEnd::Unbounded => return Ok(MpSolution::of_status(MpStatus::Unbounded)),
    };

    // Extract structural values and map back to the original variables.
    let mut x_std = vec![0.0; n_struct];
    for i in 0..m {
        if t.basis[i] < n_struct {
            x_std[t.basis[i]] = t.tab[i * width + n_total];
        }
    }
    let mut x = vec![0.0; n];
    for j in 0..n {
        x[j] = match maps[j] {
            VarMap::Fixed(v) => v,
            VarMap::Shifted { col, lo } => x_std[col] + lo,
            VarMap::Mirrored { col, hi } => hi - x_std[col],
            VarMap::Split { pos, neg } => x_std[pos] - x_std[neg],
        };
    }
    let objective = p.objective_value(&x);
    Ok(MpSolution {
        status,
        objective,
        assignment: x,
    })
}

enum LoopEnd {
    Optimal,
    Unbounded,
}

struct Tableau {
    tab: Vec<f64>,
    m: usize,
    width: usize,
    n_total: usize,
    basis: Vec<usize>,
    pivots: usize,
    degenerate: usize,
    pivot_cap: usize,
    bland_threshold: usize,
}

impl Tableau {
    /// Pivot loop over entering columns `0..col_limit`.
    fn run(&mut self, col_limit: usize) -> Result<LoopEnd, MpError> {
        loop {
            if self.pivots >= self.pivot_cap {
                return Err(MpError::IterationLimit(self.pivots));
            }
            let cost_off = self.m * self.width;
            let bland = self.degenerate >= self.bland_threshold;
            let entering = if bland {
                (0..col_limit).find(|&j| self.tab[cost_off + j] < -COST_EPS)
            } else {
                let mut best = -COST_EPS;
                let mut best_j = None;
                for j in 0..col_limit {
                    let d = self.tab[cost_off + j];
                    if d < best {
                        best = d;
                        best_j = Some(j);
                    }
                }
                best_j
            };
            let Some(col) = entering else {
                return Ok(LoopEnd::Optimal);
            };
            // Ratio test; ties break toward the lowest basis index.
            let mut best_ratio = f64::INFINITY;
            let mut leave: Option<usize> = None;
            for i in 0..self.m {
                let a = self.tab[i * self.width + col];
                if a > PIVOT_EPS {
                    let ratio = self.tab[i * self.width + self.n_total] / a;
                    let better = match leave {
                        None => true,
                        Some(r) => {
                            ratio < best_ratio - 1e-12
                                || (ratio < best_ratio + 1e-12 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(row) = leave else {
                return Ok(LoopEnd::Unbounded);
            };
            if self.tab[row * self.width + self.n_total] <= DEGENERATE_EPS {
                self.degenerate += 1;
            }
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        self.pivots += 1;
        let width = self.width;
        let row_off = row * width;
        let pv = self.tab[row_off + col];
        debug_assert!(pv.abs() > 1e-13);
        let inv = 1.0 / pv;
        for j in 0..width {
            self.tab[row_off + j] *= inv;
        }
        self.tab[row_off + col] = 1.0;
        for i in 0..=self.m {
            if i == row {
                continue;
            }
            let off = i * width;
            let factor = self.tab[off + col];
            if factor != 0.0 {
                for j in 0..width {
                    self.tab[off + j] -= factor * self.tab[row_off + j];
                }
                self.tab[off + col] = 0.0;
            }
        }
        self.basis[row] = col;
    }
}
