//! Removal of dominated action sets.
//!
//! Two passes per leader state: a pairwise pass keeps only sets not
//! pointwise-dominated by another retained set (feasibility LPs over convex
//! combinations), then a joint pass drops sets that never attain the
//! max-min envelope (one MIP per candidate set).

use crate::config::Tolerances;
use crate::error::{PosgError, Result};
use crate::model::Belief;
use crate::mp::{Cmp, MathProgram, MpStatus, Sense};
use crate::value::{GammaSet, GammaVector, LayeredSlice};
use rand::Rng;

/// True iff the lower envelope of `g_a` sits below the lower envelope of
/// `g_b` everywhere on the simplex, i.e. `g_a` is pairwise dominated by
/// `g_b`. Checked by one feasibility LP per vector of `g_b`: a convex
/// combination of `g_a` must fit under that vector componentwise. The
/// caller is responsible for orienting the pair (dominance candidate
/// first), as the surrounding procedure fixes orientation from a random
/// belief evaluation.
pub fn pairwise_dominated(
    g_a: &[GammaVector],
    g_b: &[GammaVector],
    tol: &Tolerances,
) -> Result<bool> {
    if g_a.is_empty() || g_b.is_empty() {
        return Err(PosgError::EmptyStructure(
            "pairwise dominance over an empty set".into(),
        ));
    }
    let dim = g_a[0].values.len();
    for gamma in g_b {
        // vars: lambda_1..lambda_n over g_a
        let n = g_a.len();
        let mut p = MathProgram::minimize(n);
        for j in 0..n {
            p.set_bounds(j, 0.0, 1.0);
        }
        for s_f in 0..dim {
            let coeffs: Vec<f64> = g_a.iter().map(|w| w.values[s_f]).collect();
            p.add_row(coeffs, Cmp::Le, gamma.values[s_f]);
        }
        p.add_row(vec![1.0; n], Cmp::Eq, 1.0);
        let sol = p.solve_lp(tol)?;
        match sol.status {
            MpStatus::Optimal => {}
            MpStatus::Infeasible => return Ok(false),
            other => {
                return Err(crate::error::MpError::NotOptimal(format!(
                    "dominance feasibility LP ended {other:?}"
                ))
                .into())
            }
        }
    }
    Ok(true)
}

fn min_env(set: &GammaSet, x: &Belief) -> f64 {
    set.vectors
        .iter()
        .map(|g| g.dot(x))
        .fold(f64::INFINITY, f64::min)
}

/// Builds the candidate superset for one leader state from the purged
/// per-action sets: seeds with the set that looks best at a random belief,
/// then admits each remaining set unless an already-retained set pairwise
/// dominates it, evicting retained sets the newcomer dominates.
pub fn build_superset<R: Rng + ?Sized>(
    sets_by_action: Vec<GammaSet>,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<LayeredSlice> {
    if sets_by_action.is_empty() {
        return Err(PosgError::EmptyStructure("no action sets".into()));
    }
    for s in &sets_by_action {
        if s.is_empty() {
            return Err(PosgError::EmptyStructure(format!(
                "action set {} is empty",
                s.leader_action
            )));
        }
    }
    let dim = sets_by_action[0].vectors[0].values.len();
    let x0 = Belief::random(dim, rng);
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, s) in sets_by_action.iter().enumerate() {
        let v = min_env(s, &x0);
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }

    let mut retained: Vec<GammaSet> = vec![sets_by_action[best_idx].clone()];
    for (i, candidate) in sets_by_action.into_iter().enumerate() {
        if i == best_idx {
            continue;
        }
        let x_probe = Belief::random(dim, rng);
        let cand_val = min_env(&candidate, &x_probe);
        let retained_vals: Vec<f64> = retained.iter().map(|s| min_env(s, &x_probe)).collect();

        let mut is_dominated = false;
        for (k1, set) in retained.iter().enumerate() {
            if retained_vals[k1] >= cand_val
                && pairwise_dominated(&candidate.vectors, &set.vectors, tol)?
            {
                is_dominated = true;
                break;
            }
        }
        if is_dominated {
            continue;
        }
        // Evict previously retained sets the newcomer dominates.
        let mut keep_flags = Vec::with_capacity(retained.len());
        for (k1, set) in retained.iter().enumerate() {
            let evict = retained_vals[k1] < cand_val
                && pairwise_dominated(&set.vectors, &candidate.vectors, tol)?;
            keep_flags.push(!evict);
        }
        let mut it = keep_flags.into_iter();
        retained.retain(|_| it.next().unwrap());
        retained.push(candidate);
    }
    Ok(LayeredSlice::new(retained))
}

/// Joint-dominance MIP for one candidate set against the whole layered
/// structure: minimizes `z1 - z2` over simplex beliefs, where `z1` is the
/// max-min value of the structure (one vector picked per set through
/// binary indicators) and `z2` the min value of the candidate. A positive
/// optimum means the candidate never attains the upper envelope.
pub fn dominance_mip(candidate_k1: usize, all_sets: &LayeredSlice, tol: &Tolerances) -> Result<f64> {
    let candidate = all_sets
        .sets
        .get(candidate_k1)
        .ok_or_else(|| PosgError::IndexOutOfRange(format!("set {candidate_k1}")))?;
    if candidate.is_empty() {
        return Err(PosgError::EmptyStructure("candidate set is empty".into()));
    }
    let dim = candidate.vectors[0].values.len();
    let total: usize = all_sets.total_vectors();
    let big_m = big_m_for(all_sets.all_vectors());

    // vars: rho (total binaries), x (dim), z1, z2
    let nv = total + dim + 2;
    let x0 = total;
    let z1 = total + dim;
    let z2 = z1 + 1;
    let mut p = MathProgram::minimize(nv);
    for j in 0..total {
        p.set_binary(j);
    }
    for j in 0..dim {
        p.set_bounds(x0 + j, 0.0, 1.0);
    }
    p.set_objective(z1, 1.0);
    p.set_objective(z2, -1.0);

    // z2 <= x . gamma for every candidate vector
    for g in &candidate.vectors {
        let mut row = vec![0.0; nv];
        for j in 0..dim {
            row[x0 + j] = -g.values[j];
        }
        row[z2] = 1.0;
        p.add_row(row, Cmp::Le, 0.0);
    }
    // z1 >= x . gamma - M (1 - rho) for every vector of every set
    let mut rho = 0;
    for set in &all_sets.sets {
        let first = rho;
        for g in &set.vectors {
            let mut row = vec![0.0; nv];
            for j in 0..dim {
                row[x0 + j] = g.values[j];
            }
            row[z1] = -1.0;
            row[rho] = big_m;
            p.add_row(row, Cmp::Le, big_m);
            rho += 1;
        }
        // exactly one vector selected per set
        let mut choice = vec![0.0; nv];
        for j in first..rho {
            choice[j] = 1.0;
        }
        p.add_row(choice, Cmp::Eq, 1.0);
    }
    // x on the simplex
    let mut simplex_row = vec![0.0; nv];
    for j in 0..dim {
        simplex_row[x0 + j] = 1.0;
    }
    p.add_row(simplex_row, Cmp::Eq, 1.0);

    let sol = p.solve_mip(tol)?.expect_optimal()?;
    Ok(sol.objective)
}

/// Scans candidate sets in index order against the current retained
/// structure, removing those whose joint-dominance objective exceeds the
/// removal threshold. The set attaining the max at any belief survives, so
/// the result is never empty.
pub fn prune_sets(superset: LayeredSlice, tol: &Tolerances) -> Result<LayeredSlice> {
    let mut retained = superset;
    if retained.sets.is_empty() {
        return Err(PosgError::EmptyStructure("superset has no sets".into()));
    }
    let mut k1 = 0;
    while k1 < retained.sets.len() {
        if retained.sets.len() == 1 {
            break;
        }
        let u = dominance_mip(k1, &retained, tol)?;
        if u > tol.set_removal {
            retained.sets.remove(k1);
        } else {
            k1 += 1;
        }
    }
    debug_assert!(!retained.sets.is_empty());
    Ok(retained)
}

/// Instance-scaled big-M: twice the largest vertex magnitude plus one.
pub(crate) fn big_m_for<'a>(vectors: impl Iterator<Item = &'a GammaVector>) -> f64 {
    let mut max_abs = 0.0f64;
    for g in vectors {
        for &v in &g.values {
            max_abs = max_abs.max(v.abs());
        }
    }
    2.0 * (1.0 + max_abs)
}

/// Full dominance step: superset by pairwise dominance, then joint MIP
/// pruning.
pub fn dominance_step<R: Rng + ?Sized>(
    sets_by_action: Vec<GammaSet>,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<LayeredSlice> {
    let superset = build_superset(sets_by_action, rng, tol)?;
    prune_sets(superset, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gv(values: &[f64]) -> GammaVector {
        GammaVector::new(values.to_vec(), 0, 0)
    }

    fn set(a: usize, vs: &[&[f64]]) -> GammaSet {
        GammaSet::new(
            a,
            vs.iter()
                .map(|v| GammaVector::new(v.to_vec(), a, 0))
                .collect(),
        )
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn pairwise_trivial_cases() {
        let a = vec![gv(&[0.0, 0.0])];
        let b = vec![gv(&[1.0, 1.0])];
        assert!(pairwise_dominated(&a, &b, &tols()).unwrap());
        let c = vec![gv(&[0.0, 2.0])];
        let d = vec![gv(&[2.0, 0.0])];
        assert!(!pairwise_dominated(&c, &d, &tols()).unwrap());
    }

    #[test]
    fn pairwise_convex_combination_case() {
        // (1,1) sits above the midpoint of (0,0) and (2,2).
        let a = vec![gv(&[0.0, 0.0]), gv(&[2.0, 2.0])];
        let b = vec![gv(&[1.0, 1.0])];
        assert!(pairwise_dominated(&a, &b, &tols()).unwrap());
    }

    #[test]
    fn pairwise_matches_grid_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let grid = fixtures::simplex_grid(2, 400);
        for trial in 0..30 {
            let g_a: Vec<GammaVector> = (0..3)
                .map(|_| {
                    gv(&[
                        rand::Rng::random_range(&mut rng, -1.0..1.0),
                        rand::Rng::random_range(&mut rng, -1.0..1.0),
                    ])
                })
                .collect();
            // Half the trials: g_b is g_a shifted up (dominated pair).
            let g_b: Vec<GammaVector> = if trial % 2 == 0 {
                g_a.iter()
                    .map(|g| gv(&[g.values[0] + 0.5, g.values[1] + 0.5]))
                    .collect()
            } else {
                (0..3)
                    .map(|_| {
                        gv(&[
                            rand::Rng::random_range(&mut rng, -1.0..1.0),
                            rand::Rng::random_range(&mut rng, -1.0..1.0),
                        ])
                    })
                    .collect()
            };
            let lp_says = pairwise_dominated(&g_a, &g_b, &tols()).unwrap();
            let grid_says = grid.iter().all(|x| {
                crate::value::envelope_min(&g_a, x)
                    <= crate::value::envelope_min(&g_b, x) + 1e-9
            });
            assert_eq!(lp_says, grid_says, "trial {trial}");
        }
    }

    #[test]
    fn superset_collapses_identical_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sets = vec![
            set(0, &[&[1.0, 0.5]]),
            set(1, &[&[1.0, 0.5]]),
            set(2, &[&[1.0, 0.5]]),
        ];
        let sup = build_superset(sets, &mut rng, &tols()).unwrap();
        assert_eq!(sup.k1(), 1);
    }

    #[test]
    fn superset_keeps_higher_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sets = vec![set(0, &[&[1.0, 1.0]]), set(1, &[&[2.0, 2.0]])];
        let sup = build_superset(sets, &mut rng, &tols()).unwrap();
        assert_eq!(sup.k1(), 1);
        assert_eq!(sup.sets[0].leader_action, 1);
    }

    #[test]
    fn superset_keeps_crossing_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sets = vec![
            set(0, &[&[2.0, 0.0]]),
            set(1, &[&[0.0, 2.0]]),
            set(2, &[&[1.1, 1.1]]),
        ];
        let sup = build_superset(sets, &mut rng, &tols()).unwrap();
        assert_eq!(sup.k1(), 3, "no set is pointwise below another");
        // Grid check: none pairwise dominated.
        let grid = fixtures::simplex_grid(2, 200);
        for i in 0..sup.sets.len() {
            for j in 0..sup.sets.len() {
                if i != j {
                    let everywhere_below = grid.iter().all(|x| {
                        min_env(&sup.sets[i], x) <= min_env(&sup.sets[j], x) + 1e-9
                    });
                    assert!(!everywhere_below, "set {i} dominated by {j}");
                }
            }
        }
    }

    #[test]
    fn dominance_mip_trivial_cases() {
        // A = {(1,1)}, B = {(2,2)}: A never supports, u = 1.
        let slice = LayeredSlice::new(vec![set(0, &[&[1.0, 1.0]]), set(1, &[&[2.0, 2.0]])]);
        let u = dominance_mip(0, &slice, &tols()).unwrap();
        assert!((u - 1.0).abs() < 1e-6);

        // Single-set input: z1 == z2 identically.
        let single = LayeredSlice::new(vec![set(0, &[&[1.0, -1.0], &[0.0, 0.5]])]);
        let u = dominance_mip(0, &single, &tols()).unwrap();
        assert!(u.abs() < 1e-7);
    }

    #[test]
    fn dominance_mip_keeps_supporting_set() {
        // A = {(1,1)}, B = {(0,3),(3,0)}: at e_1 the max-min equals
        // min_A = 1, so u <= 0 and A stays.
        let slice = LayeredSlice::new(vec![
            set(0, &[&[1.0, 1.0]]),
            set(1, &[&[0.0, 3.0], &[3.0, 0.0]]),
        ]);
        let u = dominance_mip(0, &slice, &tols()).unwrap();
        assert!(u <= 1e-9, "u = {u}");
    }

    #[test]
    fn prune_sets_trivial_and_envelope_preserving() {
        let single = LayeredSlice::new(vec![set(0, &[&[1.0, 0.0]])]);
        let out = prune_sets(single, &tols()).unwrap();
        assert_eq!(out.k1(), 1);

        let two = LayeredSlice::new(vec![set(0, &[&[1.0, 1.0]]), set(1, &[&[2.0, 2.0]])]);
        let out = prune_sets(two, &tols()).unwrap();
        assert_eq!(out.k1(), 1);
        assert_eq!(out.sets[0].leader_action, 1);
    }

    #[test]
    fn prune_sets_preserves_maxmin_envelope_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..8 {
            let sets: Vec<GammaSet> = (0..4)
                .map(|a| {
                    GammaSet::new(
                        a,
                        (0..3)
                            .map(|_| {
                                GammaVector::new(
                                    vec![
                                        rand::Rng::random_range(&mut rng, -1.0..1.0),
                                        rand::Rng::random_range(&mut rng, -1.0..1.0),
                                    ],
                                    a,
                                    0,
                                )
                            })
                            .collect(),
                    )
                })
                .collect();
            let before = LayeredSlice::new(sets);
            let after = prune_sets(before.clone(), &tols()).unwrap();
            for x in fixtures::simplex_grid(2, 300) {
                let vb = before.eval_with_argmax(&x).unwrap().0;
                let va = after.eval_with_argmax(&x).unwrap().0;
                assert!((vb - va).abs() < 1e-7, "envelope changed at {x:?}");
            }
        }
    }

    /// Dual-space check used only by tests: in two dimensions the negative
    /// convex hull of a point set is the chain of Pareto-minimal hull
    /// vertices; if two chains intersect, the primal envelopes must cross.
    mod dual_space {
        use super::*;

        type Pt = (f64, f64);

        fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        }

        /// Lower-left chain of the convex hull: the hull boundary supported
        /// by directions with two positive components, i.e. the lower hull
        /// truncated at its minimum-ordinate vertex.
        fn nco_chain(points: &[Pt]) -> Vec<Pt> {
            let mut pts: Vec<Pt> = points.to_vec();
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            let mut hull: Vec<Pt> = Vec::new();
            for &p in &pts {
                while hull.len() >= 2
                    && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
                {
                    hull.pop();
                }
                hull.push(p);
            }
            // keep through the first vertex attaining the minimum ordinate
            let min_y = hull.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let cut = hull.iter().position(|p| p.1 <= min_y + 1e-15).unwrap();
            hull.truncate(cut + 1);
            hull
        }

        fn segments_intersect(a: (Pt, Pt), b: (Pt, Pt)) -> bool {
            fn orient(p: Pt, q: Pt, r: Pt) -> f64 {
                (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
            }
            let d1 = orient(a.0, a.1, b.0);
            let d2 = orient(a.0, a.1, b.1);
            let d3 = orient(b.0, b.1, a.0);
            let d4 = orient(b.0, b.1, a.1);
            d1 * d2 <= 0.0 && d3 * d4 <= 0.0
        }

        fn chain_segments(chain: &[Pt]) -> Vec<(Pt, Pt)> {
            if chain.len() == 1 {
                vec![(chain[0], chain[0])]
            } else {
                chain.windows(2).map(|w| (w[0], w[1])).collect()
            }
        }

        /// Nonempty intersection of the two negative-hull chains.
        fn chains_intersect(a: &[GammaVector], b: &[GammaVector]) -> bool {
            let pa = nco_chain(
                &a.iter().map(|g| (g.values[0], g.values[1])).collect::<Vec<_>>(),
            );
            let pb = nco_chain(
                &b.iter().map(|g| (g.values[0], g.values[1])).collect::<Vec<_>>(),
            );
            for sa in chain_segments(&pa) {
                for sb in chain_segments(&pb) {
                    if segments_intersect(sa, sb) {
                        return true;
                    }
                }
            }
            false
        }

        /// All candidate extrema of the envelope difference: simplex
        /// endpoints plus every pairwise line crossing inside either set
        /// (the difference is piecewise linear, so its extrema sit there).
        fn breakpoints(sets: [&[GammaVector]; 2]) -> Vec<f64> {
            let mut thetas = vec![0.0, 1.0];
            for set in sets {
                for i in 0..set.len() {
                    for j in i + 1..set.len() {
                        let (g, h) = (&set[i].values, &set[j].values);
                        let denom = (g[0] - h[0]) - (g[1] - h[1]);
                        if denom.abs() > 1e-14 {
                            let t = (h[1] - g[1]) / denom;
                            if (0.0..=1.0).contains(&t) {
                                thetas.push(t);
                            }
                        }
                    }
                }
            }
            thetas
        }

        #[test]
        fn dual_intersection_implies_primal_crossing() {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let mut hits = 0;
            for _ in 0..40 {
                let draw = |rng: &mut ChaCha8Rng| -> Vec<GammaVector> {
                    (0..3)
                        .map(|_| {
                            gv(&[
                                rand::Rng::random_range(rng, -1.0..1.0),
                                rand::Rng::random_range(rng, -1.0..1.0),
                            ])
                        })
                        .collect()
                };
                let g_a = draw(&mut rng);
                let g_b = draw(&mut rng);
                if chains_intersect(&g_a, &g_b) {
                    hits += 1;
                    // The envelope difference must attain both signs (or
                    // zero) somewhere; its extrema sit at breakpoints.
                    let mut low = f64::INFINITY;
                    let mut high = f64::NEG_INFINITY;
                    for t in breakpoints([&g_a, &g_b]) {
                        let x = Belief::new(vec![t, 1.0 - t]).unwrap();
                        let d = crate::value::envelope_min(&g_a, &x)
                            - crate::value::envelope_min(&g_b, &x);
                        low = low.min(d);
                        high = high.max(d);
                    }
                    assert!(
                        low <= 1e-9 && high >= -1e-9,
                        "dual intersection without primal crossing: diff range [{low}, {high}]\n\
                         a = {:?}\nb = {:?}\nchain_a = {:?}\nchain_b = {:?}",
                        g_a.iter().map(|g| g.values.clone()).collect::<Vec<_>>(),
                        g_b.iter().map(|g| g.values.clone()).collect::<Vec<_>>(),
                        nco_chain(&g_a.iter().map(|g| (g.values[0], g.values[1])).collect::<Vec<_>>()),
                        nco_chain(&g_b.iter().map(|g| (g.values[0], g.values[1])).collect::<Vec<_>>())
                    );
                }
            }
            assert!(hits > 0, "test never exercised the dual intersection path");
        }
    }
}
