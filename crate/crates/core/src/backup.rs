//! Backup of a concave value function through one leader action: cross-sum
//! over reachable `(z', s^L')` branches and follower actions, then removal
//! of vectors that never attain the lower envelope.
//!
//! Pruning runs interleaved with the cross-sum (incremental-pruning style)
//! to keep intermediate sets small; a final pass assigns one witness belief
//! per surviving vector via a maximum-margin LP.

use crate::config::Tolerances;
use crate::error::{PosgError, Result};
use crate::model::{Belief, PosgModel};
use crate::mp::{Cmp, MathProgram, MpStatus};
use crate::value::{ConcaveValueFunction, GammaVector, ParentChoice};

/// Builds the backed-up vector set for `(s^L, a^L)`:
/// one vector per follower action and per choice of successor vector on
/// each reachable `(z', s^L')` branch, pruned as it grows. Vectors carry
/// the `(a^L, a^F)` tag and the branch-to-parent choice map.
pub fn cross_sum_backup(
    model: &PosgModel,
    vnext: &ConcaveValueFunction,
    s_l: usize,
    a_l: usize,
    tol: &Tolerances,
) -> Result<Vec<GammaVector>> {
    let n = model.num_follower_states();
    let beta = model.discount();
    let mut out: Vec<GammaVector> = Vec::new();

    for a_f in 0..model.num_follower_actions() {
        // Reachable branches and their discounted, transition-weighted
        // successor vectors: one weighted vector per candidate parent.
        let mut branches: Vec<((usize, usize), Vec<Vec<f64>>)> = Vec::new();
        for z in 0..model.num_observations() {
            for s_l2 in 0..model.num_leader_states() {
                if model.branch_mass(s_l, a_l, a_f, z, s_l2) <= tol.sigma_zero {
                    continue;
                }
                let next = vnext.slice(s_l2)?;
                if next.vectors.is_empty() {
                    return Err(PosgError::EmptyStructure(format!(
                        "successor slice {s_l2} is empty but reachable from (s^L={s_l}, a=({a_l},{a_f}))"
                    )));
                }
                let weighted: Vec<Vec<f64>> = next
                    .vectors
                    .iter()
                    .map(|g| {
                        (0..n)
                            .map(|s_f| {
                                let mut acc = 0.0;
                                for s_f2 in 0..n {
                                    acc += model.kernel_prob(s_l, s_f, a_l, a_f, z, s_l2, s_f2)
                                        * g.values[s_f2];
                                }
                                beta * acc
                            })
                            .collect()
                    })
                    .collect();
                branches.push(((z, s_l2), weighted));
            }
        }

        let base = GammaVector {
            values: model.reward_vector(s_l, a_l, a_f),
            leader_action: a_l,
            follower_action: a_f,
            parent_choice: Some(ParentChoice::new()),
        };
        let mut partial = vec![base];
        for ((z, s_l2), weighted) in &branches {
            let mut grown = Vec::with_capacity(partial.len() * weighted.len());
            for vec_so_far in &partial {
                for (idx, w) in weighted.iter().enumerate() {
                    let values: Vec<f64> = vec_so_far
                        .values
                        .iter()
                        .zip(w)
                        .map(|(a, b)| a + b)
                        .collect();
                    let mut choice = vec_so_far.parent_choice.clone().unwrap_or_default();
                    choice.insert((*z, *s_l2), idx);
                    grown.push(GammaVector {
                        values,
                        leader_action: a_l,
                        follower_action: a_f,
                        parent_choice: Some(choice),
                    });
                }
            }
            partial = prune_envelope(grown, tol)?;
        }
        out.extend(partial);
    }
    Ok(out)
}

/// Removes redundant vectors, keeping the lower envelope intact, and
/// returns one witness belief per kept vector: a point where the vector is
/// strictly below every other kept vector.
pub fn purge(g: Vec<GammaVector>, tol: &Tolerances) -> Result<(Vec<GammaVector>, Vec<Belief>)> {
    if g.is_empty() {
        return Err(PosgError::EmptyStructure("purge of an empty set".into()));
    }
    let dim = g[0].values.len();
    let kept = prune_envelope(g, tol)?;
    let mut witnesses = Vec::with_capacity(kept.len());
    if kept.len() == 1 {
        // Any simplex point witnesses a singleton.
        witnesses.push(Belief::uniform(dim));
        return Ok((kept, witnesses));
    }
    for i in 0..kept.len() {
        let others: Vec<&GammaVector> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v)
            .collect();
        let (margin, x) = witness_lp(&kept[i], &others, tol)?;
        if margin <= tol.purge_margin {
            // The prune already certified a strict witness against a
            // superset of `others`; a failure here is numerical drift.
            return Err(PosgError::Internal(format!(
                "kept vector {i} lost its witness margin ({margin:.3e})"
            )));
        }
        witnesses.push(x);
    }
    Ok((kept, witnesses))
}

/// Envelope-preserving prune: exact duplicates collapse to the lowest
/// `(a^F, parent)` tag, then every vector must earn a strict witness
/// against the rest of the current set.
fn prune_envelope(g: Vec<GammaVector>, tol: &Tolerances) -> Result<Vec<GammaVector>> {
    let mut kept = dedup_exact(g, tol.duplicate);
    if kept.len() <= 1 {
        return Ok(kept);
    }
    let mut i = 0;
    while i < kept.len() {
        if kept.len() == 1 {
            break;
        }
        let others: Vec<&GammaVector> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v)
            .collect();
        let (margin, _) = witness_lp(&kept[i], &others, tol)?;
        if margin <= tol.purge_margin {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(kept)
}

fn dedup_exact(g: Vec<GammaVector>, dup_tol: f64) -> Vec<GammaVector> {
    let mut kept: Vec<GammaVector> = Vec::with_capacity(g.len());
    for cand in g {
        let mut duplicate = false;
        for existing in &mut kept {
            let close = existing
                .values
                .iter()
                .zip(&cand.values)
                .all(|(a, b)| (a - b).abs() <= dup_tol);
            if close {
                duplicate = true;
                if cand.dedup_tag() < existing.dedup_tag() {
                    *existing = cand.clone();
                }
                break;
            }
        }
        if !duplicate {
            kept.push(cand);
        }
    }
    kept
}

/// Maximum-margin witness LP: over simplex beliefs `x`, maximize `d` such
/// that `x·γ' − x·γ ≥ d` for every other vector `γ'`. A positive optimum
/// certifies that `γ` strictly attains the envelope somewhere.
fn witness_lp(
    gamma: &GammaVector,
    others: &[&GammaVector],
    tol: &Tolerances,
) -> Result<(f64, Belief)> {
    let dim = gamma.values.len();
    // vars: x_0..x_{dim-1}, d
    let mut p = MathProgram::maximize(dim + 1);
    for j in 0..dim {
        p.set_bounds(j, 0.0, 1.0);
    }
    p.set_objective(dim, 1.0);
    let mut simplex_row = vec![0.0; dim + 1];
    for c in simplex_row.iter_mut().take(dim) {
        *c = 1.0;
    }
    p.add_row(simplex_row, Cmp::Eq, 1.0);
    for other in others {
        let mut row = vec![0.0; dim + 1];
        for j in 0..dim {
            row[j] = other.values[j] - gamma.values[j];
        }
        row[dim] = -1.0;
        p.add_row(row, Cmp::Ge, 0.0);
    }
    let sol = p.solve_lp(tol)?;
    match sol.status {
        MpStatus::Optimal => {
            let x = Belief::snap(&sol.assignment[..dim], tol.simplex_snap)?;
            Ok((sol.objective, x))
        }
        other => Err(crate::error::MpError::NotOptimal(format!(
            "witness LP ended {other:?}"
        ))
        .into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::belief_update;
    use crate::value::{eval_concave, ConcaveSlice, ConcaveValueFunction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gv(values: &[f64]) -> GammaVector {
        GammaVector::new(values.to_vec(), 0, 0)
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn purge_drops_dominated_constant() {
        let g = vec![gv(&[1.0, 0.0]), gv(&[0.0, 1.0]), gv(&[2.0, 2.0])];
        let (kept, wit) = purge(g, &tols()).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(wit.len(), 2);
        assert!(kept.iter().any(|v| v.values == vec![1.0, 0.0]));
        assert!(kept.iter().any(|v| v.values == vec![0.0, 1.0]));
    }

    #[test]
    fn purge_singleton_passes_through() {
        let (kept, wit) = purge(vec![gv(&[3.0, -1.0])], &tols()).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(wit.len(), 1);
    }

    #[test]
    fn purge_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g: Vec<GammaVector> = (0..15)
            .map(|_| {
                gv(&[
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ])
            })
            .collect();
        let (once, _) = purge(g, &tols()).unwrap();
        let (twice, _) = purge(once.clone(), &tols()).unwrap();
        assert_eq!(once.len(), twice.len());
        for (a, b) in once.iter().zip(&twice) {
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn purge_preserves_envelope_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let g: Vec<GammaVector> = (0..20)
                .map(|_| {
                    gv(&[
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ])
                })
                .collect();
            let (kept, witnesses) = purge(g.clone(), &tols()).unwrap();
            assert!(kept.len() <= g.len());
            let grid = fixtures::simplex_grid(3, 43);
            for x in grid.iter().take(1000) {
                let full = crate::value::envelope_min(&g, x);
                let pruned = crate::value::envelope_min(&kept, x);
                assert!((full - pruned).abs() < 1e-8);
            }
            // Witness property: each kept vector strictly lowest at its witness.
            for (i, w) in witnesses.iter().enumerate() {
                let mine = kept[i].dot(w);
                for (j, other) in kept.iter().enumerate() {
                    if i != j {
                        assert!(
                            mine < other.dot(w) + 1e-12,
                            "vector {i} not strict at witness"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_discount_backup_returns_reward_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m0 = fixtures::random_model(2, 2, 2, 2, 2, 0.9, &mut rng).unwrap();
        let m = crate::model::PosgModel::new(
            2,
            2,
            2,
            2,
            2,
            m0.kernel_table().to_vec(),
            m0.reward_table().to_vec(),
            0.0,
            m0.initial_belief().clone(),
        )
        .unwrap();
        let vnext = ConcaveValueFunction::new(vec![
            ConcaveSlice::new(vec![gv(&[5.0, -2.0]), gv(&[0.0, 1.0])]),
            ConcaveSlice::new(vec![gv(&[1.0, 1.0])]),
        ]);
        let g = cross_sum_backup(&m, &vnext, 0, 1, &tols()).unwrap();
        // With beta = 0 every surviving vector is an immediate-reward vector.
        for v in &g {
            let expect = m.reward_vector(0, 1, v.follower_action);
            for (a, b) in v.values.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // At most one vector per follower action after dedup.
        assert!(g.len() <= m.num_follower_actions());
    }

    #[test]
    fn single_branch_backup_has_no_cross_sum_blowup() {
        // |Z^L| = 1, |S^L| = 1, singleton successor set: one vector per a^F.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = fixtures::random_model(1, 2, 2, 3, 1, 0.5, &mut rng).unwrap();
        let gamma_next = gv(&[2.0, -1.0]);
        let vnext = ConcaveValueFunction::new(vec![ConcaveSlice::new(vec![gamma_next.clone()])]);
        let g = cross_sum_backup(&m, &vnext, 0, 0, &tols()).unwrap();
        assert!(g.len() <= 3);
        for v in &g {
            let a_f = v.follower_action;
            for s_f in 0..2 {
                let mut expect = m.reward(0, s_f, 0, a_f);
                for s_f2 in 0..2 {
                    expect +=
                        0.5 * m.kernel_prob(0, s_f, 0, a_f, 0, 0, s_f2) * gamma_next.values[s_f2];
                }
                assert!((v.values[s_f] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn backup_matches_pointwise_bellman_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let m = fixtures::random_model(2, 2, 2, 2, 2, 0.9, &mut rng).unwrap();
        let vnext = ConcaveValueFunction::new(vec![
            ConcaveSlice::new(vec![gv(&[1.0, -0.5]), gv(&[-0.5, 1.0])]),
            ConcaveSlice::new(vec![gv(&[0.3, 0.3]), gv(&[1.0, 0.0])]),
        ]);
        for a_l in 0..2 {
            let g = cross_sum_backup(&m, &vnext, 0, a_l, &tols()).unwrap();
            let (g, _) = purge(g, &tols()).unwrap();
            for _ in 0..50 {
                let x = Belief::random(2, &mut rng);
                let pruned_env = crate::value::envelope_min(&g, &x);
                // One-step Bellman evaluation through belief updates.
                let mut bellman = f64::INFINITY;
                for a_f in 0..2 {
                    let mut q = x.dot(&m.reward_vector(0, a_l, a_f));
                    for z in 0..2 {
                        for s_l2 in 0..2 {
                            let up = belief_update(&m, 0, &x, (a_l, a_f), z, s_l2).unwrap();
                            if let Some(post) = up.posterior {
                                q += m.discount()
                                    * up.sigma
                                    * eval_concave(&vnext, s_l2, &post).unwrap();
                            }
                        }
                    }
                    bellman = bellman.min(q);
                }
                assert!(
                    (pruned_env - bellman).abs() < 1e-9,
                    "envelope {pruned_env} vs bellman {bellman}"
                );
            }
        }
    }

    #[test]
    fn backup_vectors_match_their_own_parents() {
        // Each vector's value decomposes through its recorded parent choice.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = fixtures::random_model(2, 2, 2, 2, 2, 0.8, &mut rng).unwrap();
        let vnext = ConcaveValueFunction::new(vec![
            ConcaveSlice::new(vec![gv(&[1.0, 0.0]), gv(&[0.0, 1.0])]),
            ConcaveSlice::new(vec![gv(&[0.5, 0.5])]),
        ]);
        let g = cross_sum_backup(&m, &vnext, 1, 0, &tols()).unwrap();
        for v in &g {
            let choice = v.parent_choice.as_ref().unwrap();
            for _ in 0..10 {
                let x = Belief::random(2, &mut rng);
                let mut expect = x.dot(&m.reward_vector(1, 0, v.follower_action));
                for (&(z, s_l2), &idx) in choice {
                    let up = belief_update(&m, 1, &x, (0, v.follower_action), z, s_l2).unwrap();
                    if let Some(post) = up.posterior {
                        let parent = &vnext.slice(s_l2).unwrap().vectors[idx];
                        expect += m.discount() * up.sigma * parent.dot(&post);
                    }
                }
                assert!((v.dot(&x) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_successor_slice_is_structural_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = fixtures::random_model(2, 2, 2, 2, 2, 0.9, &mut rng).unwrap();
        let vnext = ConcaveValueFunction::new(vec![
            ConcaveSlice::new(vec![gv(&[1.0, 0.0])]),
            ConcaveSlice::new(vec![]),
        ]);
        assert!(matches!(
            cross_sum_backup(&m, &vnext, 0, 0, &tols()),
            Err(PosgError::EmptyStructure(_))
        ));
    }
}
