//! Depth-first branch-and-bound over binary variables.
//!
//! Bounding comes from the LP relaxation; branching always picks the
//! lowest-index fractional binary, exploring the nearer bound first. At
//! every fractional node a rounding heuristic (multiple-choice groups take
//! their largest member, loose binaries round to nearest) is completed by
//! an LP over the continuous variables; feasible completions become
//! incumbents, which gives strong pruning on the big-M programs this
//! kernel exists for.

use super::{simplex, Cmp, MathProgram, MpSolution, MpStatus, Sense};
use crate::config::Tolerances;
use crate::error::MpError;

pub(crate) fn branch_and_bound(
    p: &MathProgram,
    tol: &Tolerances,
) -> Result<MpSolution, MpError> {
    let n = p.num_vars();
    let binaries = p.binary_indices();
    let flip = match p.sense() {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let sos1 = detect_sos1_groups(p, &binaries);

    // Incumbent objective is tracked in min-sense.
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    if let Some(ws) = p.warm_start() {
        if p.max_violation(ws) > tol.feasibility {
            return Err(MpError::BadProgram(format!(
                "warm start violates constraints by {:.3e}",
                p.max_violation(ws)
            )));
        }
        for &j in &binaries {
            if (ws[j] - ws[j].round()).abs() > tol.integrality {
                return Err(MpError::BadProgram(format!(
                    "warm start is fractional at binary {j}"
                )));
            }
        }
        incumbent = Some((flip * p.objective_value(ws), ws.to_vec()));
    }

    struct Node {
        lower: Vec<f64>,
        upper: Vec<f64>,
    }
    let mut stack = vec![Node {
        lower: p.lower_bounds().to_vec(),
        upper: p.upper_bounds().to_vec(),
    }];
    let mut nodes = 0usize;

    while let Some(node) = stack.pop() {
        nodes += 1;
        if nodes > tol.mip_node_cap {
            return Ok(MpSolution::of_status(MpStatus::NodeLimit));
        }
        let relax = simplex::solve_with_bounds(p, &node.lower, &node.upper, tol)?;
        match relax.status {
            MpStatus::Infeasible => continue,
            MpStatus::Unbounded => return Ok(MpSolution::of_status(MpStatus::Unbounded)),
            MpStatus::Optimal => {}
            other => return Ok(MpSolution::of_status(other)),
        }
        let bound = flip * relax.objective;
        if let Some((best, _)) = &incumbent {
            if bound >= best - tol.optimality_gap {
                continue;
            }
        }
        let frac = binaries
            .iter()
            .copied()
            .find(|&j| (relax.assignment[j] - relax.assignment[j].round()).abs() > tol.integrality);
        let Some(branch_var) = frac else {
            // Integral: new incumbent (strict improvement guaranteed by the
            // pruning test above).
            let mut x = relax.assignment;
            for &j in &binaries {
                x[j] = x[j].round();
            }
            incumbent = Some((bound, x));
            continue;
        };

        // Rounding heuristic.
        if let Some(candidate) =
            rounding_heuristic(p, &node.lower, &node.upper, &relax.assignment, &sos1, &binaries, tol)?
        {
            let obj = flip * p.objective_value(&candidate);
            let improves = match &incumbent {
                None => true,
                Some((best, _)) => obj < best - tol.optimality_gap,
            };
            if improves {
                incumbent = Some((obj, candidate));
            }
        }

        let frac_val = relax.assignment[branch_var];
        let near = frac_val.round().clamp(0.0, 1.0);
        let far = 1.0 - near;
        for v in [far, near] {
            // pushed far-first so the nearer bound pops first
            let mut lower = node.lower.clone();
            let mut upper = node.upper.clone();
            lower[branch_var] = v;
            upper[branch_var] = v;
            stack.push(Node { lower, upper });
        }
    }

    match incumbent {
        Some((obj, x)) => Ok(MpSolution {
            status: MpStatus::Optimal,
            objective: flip * obj,
            assignment: x,
        }),
        None => Ok(MpSolution::of_status(MpStatus::Infeasible)),
    }
}

/// Indices of binary groups tied by a multiple-choice row
/// (`sum of group = 1` with unit coefficients).
fn detect_sos1_groups(p: &MathProgram, binaries: &[usize]) -> Vec<Vec<usize>> {
    let is_binary: Vec<bool> = {
        let mut v = vec![false; p.num_vars()];
        for &j in binaries {
            v[j] = true;
        }
        v
    };
    let mut groups = Vec::new();
    for row in p.rows() {
        if row.cmp != Cmp::Eq || (row.rhs - 1.0).abs() > 1e-12 {
            continue;
        }
        let mut members = Vec::new();
        let mut ok = true;
        for (j, &a) in row.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            if (a - 1.0).abs() > 1e-12 || !is_binary[j] {
                ok = false;
                break;
            }
            members.push(j);
        }
        if ok && members.len() > 1 {
            groups.push(members);
        }
    }
    groups
}

/// Rounds the relaxation to an integral assignment and re-optimizes the
/// continuous variables. Returns `None` when the rounded program is
/// infeasible.
fn rounding_heuristic(
    p: &MathProgram,
    lower: &[f64],
    upper: &[f64],
    relax: &[f64],
    sos1: &[Vec<usize>],
    binaries: &[usize],
    tol: &Tolerances,
) -> Result<Option<Vec<f64>>, MpError> {
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    let mut decided = vec![false; p.num_vars()];
    for group in sos1 {
        // Skip groups whose members are already pinned by branching.
        let mut winner = None;
        let mut best = f64::NEG_INFINITY;
        for &j in group {
            if lo[j] >= 1.0 - 1e-12 {
                winner = Some(j);
                break;
            }
            if hi[j] <= 1e-12 {
                continue;
            }
            if relax[j] > best + 1e-15 {
                best = relax[j];
                winner = Some(j);
            }
        }
        let Some(w) = winner else {
            return Ok(None);
        };
        for &j in group {
            let v = if j == w { 1.0 } else { 0.0 };
            if v < lo[j] - 1e-12 || v > hi[j] + 1e-12 {
                return Ok(None);
            }
            lo[j] = v;
            hi[j] = v;
            decided[j] = true;
        }
    }
    for &j in binaries {
        if decided[j] {
            continue;
        }
        let v = relax[j].round().clamp(lo[j], hi[j]).round();
        lo[j] = v;
        hi[j] = v;
    }
    let sol = simplex::solve_with_bounds(p, &lo, &hi, tol)?;
    if sol.status != MpStatus::Optimal || p.max_violation(&sol.assignment) > tol.feasibility {
        return Ok(None);
    }
    let mut x = sol.assignment;
    for &j in binaries {
        x[j] = x[j].round();
    }
    Ok(Some(x))
}
