//! Game model and belief arithmetic.
//!
//! A two-agent game where the leader observes its own state exactly and the
//! follower's state only through a noisy observation channel. The joint
//! kernel gives `P(z', s' | s, a)` for joint states `s = (s^L, s^F)` and
//! action pairs `a = (a^L, a^F)`. The pair `(s^L, belief over S^F)` is a
//! sufficient statistic for the leader, so beliefs are vectors over the
//! follower's state space only.

use crate::config::Tolerances;
use crate::error::{PosgError, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tolerance used when validating that probability vectors sum to one.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Probability vector over the follower's states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief(Vec<f64>);

impl Belief {
    /// Validates non-negativity and unit sum (within `1e-9`).
    pub fn new(probs: Vec<f64>) -> Result<Belief> {
        if probs.is_empty() {
            return Err(PosgError::InvalidBelief("empty belief vector".into()));
        }
        let mut sum = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(PosgError::InvalidBelief(format!(
                    "entry {i} is {p}, must be finite and non-negative"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(PosgError::InvalidBelief(format!(
                "entries sum to {sum}, expected 1 within {PROB_SUM_TOL:e}"
            )));
        }
        Ok(Belief(probs))
    }

    /// The extreme point `e_i` of the simplex.
    pub fn extreme(dim: usize, i: usize) -> Belief {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Belief(v)
    }

    /// Uniform belief over `dim` states.
    pub fn uniform(dim: usize) -> Belief {
        Belief(vec![1.0 / dim as f64; dim])
    }

    /// Uniform (Dirichlet(1,..,1)) random point of the simplex.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Belief {
        // Exponential spacings normalized to 1.
        let mut v: Vec<f64> = (0..dim)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let sum: f64 = v.iter().sum();
        for x in &mut v {
            *x /= sum;
        }
        Belief(v)
    }

    /// Clips negative round-off, renormalizes, and validates. Used to bring
    /// beliefs returned by MIPs back onto the simplex.
    pub fn snap(values: &[f64], tol: f64) -> Result<Belief> {
        let mut v = values.to_vec();
        for x in &mut v {
            if *x < 0.0 {
                if *x < -tol.max(1e-6) {
                    return Err(PosgError::InvalidBelief(format!(
                        "cannot snap: entry {x} too far below zero"
                    )));
                }
                *x = 0.0;
            }
        }
        let sum: f64 = v.iter().sum();
        if sum <= 0.0 {
            return Err(PosgError::InvalidBelief("cannot snap zero vector".into()));
        }
        for x in &mut v {
            *x /= sum;
        }
        Ok(Belief(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    /// Dot product with a coefficient vector of the same length.
    pub fn dot(&self, coeffs: &[f64]) -> f64 {
        debug_assert_eq!(self.0.len(), coeffs.len());
        self.0.iter().zip(coeffs).map(|(x, c)| x * c).sum()
    }

    /// Componentwise maximum distance to another belief.
    pub fn linf_distance(&self, other: &Belief) -> f64 {
        self.0
            .iter()
            .zip(other.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for Belief {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Finite leader-follower game model.
///
/// Indices are dense and zero-based; display names live in the I/O layer.
/// The kernel is stored flat with layout
/// `[s^L][s^F][a^L][a^F][z'][s^L'][s^F']`, rewards as `[s^L][s^F][a^L][a^F]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosgModel {
    num_leader_states: usize,
    num_follower_states: usize,
    num_leader_actions: usize,
    num_follower_actions: usize,
    num_observations: usize,
    kernel: Vec<f64>,
    reward: Vec<f64>,
    discount: f64,
    initial_belief: Belief,
}

impl PosgModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_leader_states: usize,
        num_follower_states: usize,
        num_leader_actions: usize,
        num_follower_actions: usize,
        num_observations: usize,
        kernel: Vec<f64>,
        reward: Vec<f64>,
        discount: f64,
        initial_belief: Belief,
    ) -> Result<PosgModel> {
        let m = PosgModel {
            num_leader_states,
            num_follower_states,
            num_leader_actions,
            num_follower_actions,
            num_observations,
            kernel,
            reward,
            discount,
            initial_belief,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let dims = [
            ("leader states", self.num_leader_states),
            ("follower states", self.num_follower_states),
            ("leader actions", self.num_leader_actions),
            ("follower actions", self.num_follower_actions),
            ("observations", self.num_observations),
        ];
        for (name, n) in dims {
            if n == 0 {
                return Err(PosgError::InvalidModel(format!("no {name}")));
            }
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(PosgError::InvalidModel(format!(
                "discount {} outside [0, 1]",
                self.discount
            )));
        }
        let expect_kernel = self.num_leader_states
            * self.num_follower_states
            * self.num_leader_actions
            * self.num_follower_actions
            * self.num_observations
            * self.num_leader_states
            * self.num_follower_states;
        if self.kernel.len() != expect_kernel {
            return Err(PosgError::InvalidModel(format!(
                "kernel has {} entries, expected {expect_kernel}",
                self.kernel.len()
            )));
        }
        let expect_reward = self.num_leader_states
            * self.num_follower_states
            * self.num_leader_actions
            * self.num_follower_actions;
        if self.reward.len() != expect_reward {
            return Err(PosgError::InvalidModel(format!(
                "reward table has {} entries, expected {expect_reward}",
                self.reward.len()
            )));
        }
        for (i, &r) in self.reward.iter().enumerate() {
            if !r.is_finite() {
                return Err(PosgError::InvalidModel(format!(
                    "reward entry {i} is {r}"
                )));
            }
        }
        if self.initial_belief.dim() != self.num_follower_states {
            return Err(PosgError::InvalidModel(format!(
                "initial belief has dimension {}, expected {}",
                self.initial_belief.dim(),
                self.num_follower_states
            )));
        }
        // Every (s, a) row of the kernel must be a probability distribution
        // over (z', s').
        for s_l in 0..self.num_leader_states {
            for s_f in 0..self.num_follower_states {
                for a_l in 0..self.num_leader_actions {
                    for a_f in 0..self.num_follower_actions {
                        let mut sum = 0.0;
                        for z in 0..self.num_observations {
                            for s_l2 in 0..self.num_leader_states {
                                for s_f2 in 0..self.num_follower_states {
                                    let p = self.kernel_prob(s_l, s_f, a_l, a_f, z, s_l2, s_f2);
                                    if !p.is_finite() || p < 0.0 {
                                        return Err(PosgError::InvalidModel(format!(
                                            "kernel(s=({s_l},{s_f}), a=({a_l},{a_f}), z'={z}, s'=({s_l2},{s_f2})) = {p}"
                                        )));
                                    }
                                    sum += p;
                                }
                            }
                        }
                        if (sum - 1.0).abs() > PROB_SUM_TOL {
                            return Err(PosgError::InvalidModel(format!(
                                "kernel row (s=({s_l},{s_f}), a=({a_l},{a_f})) sums to {sum}, expected 1"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_leader_states(&self) -> usize {
        self.num_leader_states
    }
    pub fn num_follower_states(&self) -> usize {
        self.num_follower_states
    }
    pub fn num_leader_actions(&self) -> usize {
        self.num_leader_actions
    }
    pub fn num_follower_actions(&self) -> usize {
        self.num_follower_actions
    }
    pub fn num_observations(&self) -> usize {
        self.num_observations
    }
    pub fn discount(&self) -> f64 {
        self.discount
    }
    pub fn initial_belief(&self) -> &Belief {
        &self.initial_belief
    }
    pub fn kernel_table(&self) -> &[f64] {
        &self.kernel
    }
    pub fn reward_table(&self) -> &[f64] {
        &self.reward
    }

    #[inline]
    fn kernel_index(
        &self,
        s_l: usize,
        s_f: usize,
        a_l: usize,
        a_f: usize,
        z: usize,
        s_l2: usize,
        s_f2: usize,
    ) -> usize {
        ((((((s_l * self.num_follower_states + s_f) * self.num_leader_actions + a_l)
            * self.num_follower_actions
            + a_f)
            * self.num_observations
            + z)
            * self.num_leader_states
            + s_l2)
            * self.num_follower_states)
            + s_f2
    }

    /// `P(z', s^L', s^F' | (s^L, s^F), (a^L, a^F))`.
    #[inline]
    pub fn kernel_prob(
        &self,
        s_l: usize,
        s_f: usize,
        a_l: usize,
        a_f: usize,
        z: usize,
        s_l2: usize,
        s_f2: usize,
    ) -> f64 {
        self.kernel[self.kernel_index(s_l, s_f, a_l, a_f, z, s_l2, s_f2)]
    }

    /// `r((s^L, s^F), (a^L, a^F))`.
    #[inline]
    pub fn reward(&self, s_l: usize, s_f: usize, a_l: usize, a_f: usize) -> f64 {
        self.reward[((s_l * self.num_follower_states + s_f) * self.num_leader_actions + a_l)
            * self.num_follower_actions
            + a_f]
    }

    /// Immediate-reward vector over follower states for `(s^L, a^L, a^F)`.
    pub fn reward_vector(&self, s_l: usize, a_l: usize, a_f: usize) -> Vec<f64> {
        (0..self.num_follower_states)
            .map(|s_f| self.reward(s_l, s_f, a_l, a_f))
            .collect()
    }

    /// Total kernel mass on a `(z', s^L')` branch summed over all current
    /// and successor follower states. Zero mass means the branch is
    /// unreachable from `(s^L, a)` regardless of belief.
    pub fn branch_mass(&self, s_l: usize, a_l: usize, a_f: usize, z: usize, s_l2: usize) -> f64 {
        let mut total = 0.0;
        for s_f in 0..self.num_follower_states {
            for s_f2 in 0..self.num_follower_states {
                total += self.kernel_prob(s_l, s_f, a_l, a_f, z, s_l2, s_f2);
            }
        }
        total
    }

    fn check_indices(
        &self,
        s_l: usize,
        a_l: usize,
        a_f: usize,
        z: usize,
        s_l2: usize,
    ) -> Result<()> {
        if s_l >= self.num_leader_states || s_l2 >= self.num_leader_states {
            return Err(PosgError::IndexOutOfRange(format!(
                "leader state {s_l}/{s_l2} (|S^L| = {})",
                self.num_leader_states
            )));
        }
        if a_l >= self.num_leader_actions {
            return Err(PosgError::IndexOutOfRange(format!(
                "leader action {a_l} (|A^L| = {})",
                self.num_leader_actions
            )));
        }
        if a_f >= self.num_follower_actions {
            return Err(PosgError::IndexOutOfRange(format!(
                "follower action {a_f} (|A^F| = {})",
                self.num_follower_actions
            )));
        }
        if z >= self.num_observations {
            return Err(PosgError::IndexOutOfRange(format!(
                "observation {z} (|Z^L| = {})",
                self.num_observations
            )));
        }
        Ok(())
    }
}

/// Outcome of a Bayes step: the probability `sigma` of the `(z', s^L')`
/// branch and, when that probability is positive, the posterior belief.
#[derive(Debug, Clone)]
pub struct BeliefUpdate {
    pub sigma: f64,
    /// `None` when `sigma` is (numerically) zero: the branch is
    /// unreachable, which is a valid flagged outcome rather than an error.
    pub posterior: Option<Belief>,
}

/// One-step Bayes update of the leader's belief.
///
/// `sigma` is the joint probability of observing `z'` and moving to leader
/// state `s^L'` under action pair `a` from `(s^L, x)`; the posterior is the
/// normalized distribution of the successor follower state.
pub fn belief_update(
    model: &PosgModel,
    s_l: usize,
    x: &Belief,
    a: (usize, usize),
    z: usize,
    s_l2: usize,
) -> Result<BeliefUpdate> {
    belief_update_tol(model, s_l, x, a, z, s_l2, Tolerances::default().sigma_zero)
}

/// [`belief_update`] with an explicit zero-branch threshold.
pub fn belief_update_tol(
    model: &PosgModel,
    s_l: usize,
    x: &Belief,
    a: (usize, usize),
    z: usize,
    s_l2: usize,
    sigma_zero: f64,
) -> Result<BeliefUpdate> {
    let (a_l, a_f) = a;
    model.check_indices(s_l, a_l, a_f, z, s_l2)?;
    if x.dim() != model.num_follower_states() {
        return Err(PosgError::InvalidBelief(format!(
            "belief dimension {} does not match |S^F| = {}",
            x.dim(),
            model.num_follower_states()
        )));
    }
    let n = model.num_follower_states();
    let mut unnormalized = vec![0.0; n];
    for s_f in 0..n {
        let w = x[s_f];
        if w == 0.0 {
            continue;
        }
        for s_f2 in 0..n {
            unnormalized[s_f2] += w * model.kernel_prob(s_l, s_f, a_l, a_f, z, s_l2, s_f2);
        }
    }
    let sigma: f64 = unnormalized.iter().sum();
    if sigma <= sigma_zero {
        return Ok(BeliefUpdate {
            sigma,
            posterior: None,
        });
    }
    for p in &mut unnormalized {
        *p /= sigma;
    }
    Ok(BeliefUpdate {
        sigma,
        posterior: Some(Belief(unnormalized)),
    })
}
