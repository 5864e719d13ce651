//! Small model generators and belief grids shared by tests, benchmarks,
//! and the acceptance suite.

use crate::error::Result;
use crate::model::{Belief, PosgModel};
use rand::Rng;

/// Uniformly random valid model with rewards in `[0, 1)`.
///
/// Each `(s, a)` kernel row is an independent random distribution over
/// `(z', s')`, so every branch is reachable with probability one.
pub fn random_model<R: Rng + ?Sized>(
    num_leader_states: usize,
    num_follower_states: usize,
    num_leader_actions: usize,
    num_follower_actions: usize,
    num_observations: usize,
    discount: f64,
    rng: &mut R,
) -> Result<PosgModel> {
    let rows = num_leader_states * num_follower_states * num_leader_actions * num_follower_actions;
    let row_len = num_observations * num_leader_states * num_follower_states;
    let mut kernel = Vec::with_capacity(rows * row_len);
    for _ in 0..rows {
        let mut row: Vec<f64> = (0..row_len).map(|_| rng.random::<f64>() + 1e-3).collect();
        let sum: f64 = row.iter().sum();
        for p in &mut row {
            *p /= sum;
        }
        kernel.extend(row);
    }
    let reward: Vec<f64> = (0..rows).map(|_| rng.random::<f64>()).collect();
    let x0 = Belief::random(num_follower_states, rng);
    PosgModel::new(
        num_leader_states,
        num_follower_states,
        num_leader_actions,
        num_follower_actions,
        num_observations,
        kernel,
        reward,
        discount,
        x0,
    )
}

/// Single-leader-state model from a follower transition matrix and an
/// observation channel `P(z' | s^F')`; one action per agent, zero rewards.
/// Handy for pinning belief-update arithmetic.
pub fn channel_model<const N: usize, const Z: usize>(
    transition: &[[f64; N]],
    channel: &[[f64; Z]],
) -> PosgModel {
    let n = transition.len();
    let z_count = channel[0].len();
    let mut kernel = vec![0.0; n * z_count * n];
    for s_f in 0..n {
        for s_f2 in 0..n {
            for z in 0..z_count {
                kernel[(s_f * z_count + z) * n + s_f2] = transition[s_f][s_f2] * channel[s_f2][z];
            }
        }
    }
    PosgModel::new(
        1,
        n,
        1,
        1,
        z_count,
        kernel,
        vec![0.0; n],
        0.9,
        Belief::uniform(n),
    )
    .expect("channel model is valid by construction")
}

/// Model whose rewards are a single constant everywhere; the value function
/// collapses to a geometric series.
pub fn constant_reward_model<R: Rng + ?Sized>(
    constant: f64,
    discount: f64,
    rng: &mut R,
) -> PosgModel {
    let mut m = random_model(2, 2, 2, 2, 2, discount, rng).expect("valid random model");
    let rows = m.reward_table().len();
    m = PosgModel::new(
        m.num_leader_states(),
        m.num_follower_states(),
        m.num_leader_actions(),
        m.num_follower_actions(),
        m.num_observations(),
        m.kernel_table().to_vec(),
        vec![constant; rows],
        discount,
        m.initial_belief().clone(),
    )
    .expect("constant-reward model is valid");
    m
}

/// Model with a strictly dominant leader action: action 0 earns a bonus on
/// top of the shared base reward while transitions ignore the leader action
/// entirely. Every backup stage then has one pairwise-dominant set, which
/// forces a zero approximation error.
pub fn dominant_action_model<R: Rng + ?Sized>(
    num_leader_states: usize,
    num_follower_states: usize,
    num_follower_actions: usize,
    num_observations: usize,
    discount: f64,
    bonus: f64,
    rng: &mut R,
) -> Result<PosgModel> {
    let num_leader_actions = 2;
    let rows = num_leader_states * num_follower_states * num_leader_actions * num_follower_actions;
    let row_len = num_observations * num_leader_states * num_follower_states;
    let mut kernel = vec![0.0; rows * row_len];
    let mut reward = vec![0.0; rows];
    for s_l in 0..num_leader_states {
        for s_f in 0..num_follower_states {
            for a_f in 0..num_follower_actions {
                // shared row for both leader actions
                let mut row: Vec<f64> = (0..row_len).map(|_| rng.random::<f64>() + 1e-3).collect();
                let sum: f64 = row.iter().sum();
                for p in &mut row {
                    *p /= sum;
                }
                let base: f64 = rng.random::<f64>();
                for a_l in 0..num_leader_actions {
                    let r_idx = ((s_l * num_follower_states + s_f) * num_leader_actions + a_l)
                        * num_follower_actions
                        + a_f;
                    reward[r_idx] = if a_l == 0 { base + bonus } else { base };
                    let k_off = r_idx * row_len;
                    kernel[k_off..k_off + row_len].copy_from_slice(&row);
                }
            }
        }
    }
    PosgModel::new(
        num_leader_states,
        num_follower_states,
        num_leader_actions,
        num_follower_actions,
        num_observations,
        kernel,
        reward,
        discount,
        Belief::uniform(num_follower_states),
    )
}

/// Barycentric lattice of the `(dim-1)`-simplex at the given resolution:
/// all points whose coordinates are multiples of `1/resolution`.
pub fn simplex_grid(dim: usize, resolution: usize) -> Vec<Belief> {
    let mut out = Vec::new();
    let mut point = vec![0usize; dim];
    fill_grid(dim, resolution, 0, resolution, &mut point, &mut out);
    out
}

fn fill_grid(
    dim: usize,
    resolution: usize,
    idx: usize,
    remaining: usize,
    point: &mut Vec<usize>,
    out: &mut Vec<Belief>,
) {
    if idx == dim - 1 {
        point[idx] = remaining;
        let v: Vec<f64> = point.iter().map(|&c| c as f64 / resolution as f64).collect();
        out.push(Belief::new(v).expect("lattice point is a valid belief"));
        return;
    }
    for c in 0..=remaining {
        point[idx] = c;
        fill_grid(dim, resolution, idx + 1, remaining - c, point, out);
    }
}

/// Choose a lattice resolution so the grid carries at least `target` points.
pub fn grid_resolution_for(dim: usize, target: usize) -> usize {
    let mut res = 1;
    while simplex_grid_len(dim, res) < target {
        res += 1;
    }
    res
}

fn simplex_grid_len(dim: usize, res: usize) -> usize {
    // C(res + dim - 1, dim - 1)
    let mut n = 1usize;
    for i in 0..dim - 1 {
        n = n * (res + i + 1) / (i + 1);
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        assert_eq!(simplex_grid(2, 4).len(), 5);
        assert_eq!(simplex_grid(3, 3).len(), 10);
        assert_eq!(simplex_grid(2, 4).len(), simplex_grid_len(2, 4));
        assert_eq!(simplex_grid(4, 5).len(), simplex_grid_len(4, 5));
    }

    #[test]
    fn grid_resolution_reaches_target() {
        let res = grid_resolution_for(3, 1000);
        assert!(simplex_grid(3, res).len() >= 1000);
    }
}
