//! Piecewise-linear value-function representations.
//!
//! Two forms appear in the recursion:
//!
//! * a layered (max-min) function: per leader state, an ordered family of
//!   vector sets, each set tied to one leader action; the value at a belief
//!   is the maximum over sets of the minimum dot product within a set;
//! * a concave under-approximation: per leader state, a single vector set
//!   evaluated as a plain minimum.

use crate::error::{PosgError, Result};
use crate::model::Belief;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Choice function recording, for each reachable `(z', s^L')` branch, the
/// index of the successor-stage vector a backup vector was built from.
pub type ParentChoice = BTreeMap<(usize, usize), usize>;

/// One linear piece of a value function over the belief simplex, tagged
/// with the action pair that generated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaVector {
    /// One coefficient per follower state.
    pub values: Vec<f64>,
    pub leader_action: usize,
    pub follower_action: usize,
    /// Present on vectors produced by a backup; absent on hand-built ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_choice: Option<ParentChoice>,
}

impl GammaVector {
    pub fn new(values: Vec<f64>, leader_action: usize, follower_action: usize) -> GammaVector {
        GammaVector {
            values,
            leader_action,
            follower_action,
            parent_choice: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn dot(&self, x: &Belief) -> f64 {
        x.dot(&self.values)
    }

    /// Tag used to break ties among exact duplicates: lowest
    /// `(a^F, parent choice)` wins (the leader action is constant within
    /// one backup set; it participates only to make the order total).
    pub(crate) fn dedup_tag(&self) -> (usize, usize, &Option<ParentChoice>) {
        (self.leader_action, self.follower_action, &self.parent_choice)
    }
}

/// A set of vectors sharing one leader action, evaluated as a minimum.
/// `witnesses` (when present) are the pruning byproducts: one belief per
/// vector at which that vector strictly attains the envelope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaSet {
    pub leader_action: usize,
    pub vectors: Vec<GammaVector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Belief>,
}

impl GammaSet {
    pub fn new(leader_action: usize, vectors: Vec<GammaVector>) -> GammaSet {
        GammaSet {
            leader_action,
            vectors,
            witnesses: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Minimum dot product over the set with the index of the attaining
    /// vector (lowest index on ties).
    pub fn min_value(&self, x: &Belief) -> Result<(f64, usize)> {
        if self.vectors.is_empty() {
            return Err(PosgError::EmptyStructure(
                "gamma set holds no vectors".into(),
            ));
        }
        let mut best = f64::INFINITY;
        let mut best_k = 0;
        for (k, g) in self.vectors.iter().enumerate() {
            let v = g.dot(x);
            if v < best {
                best = v;
                best_k = k;
            }
        }
        Ok((best, best_k))
    }
}

/// Per-leader-state slice of a layered value function.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LayeredSlice {
    pub sets: Vec<GammaSet>,
}

impl LayeredSlice {
    pub fn new(sets: Vec<GammaSet>) -> LayeredSlice {
        LayeredSlice { sets }
    }

    /// Number of sets (`K1`).
    pub fn k1(&self) -> usize {
        self.sets.len()
    }

    /// Set sizes (`K2` per set).
    pub fn k2(&self) -> Vec<usize> {
        self.sets.iter().map(|s| s.len()).collect()
    }

    /// Total vector count.
    pub fn total_vectors(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }

    /// All vectors in `(k1, k2)` order.
    pub fn all_vectors(&self) -> impl Iterator<Item = &GammaVector> {
        self.sets.iter().flat_map(|s| s.vectors.iter())
    }

    /// Max over sets of min over vectors, with the attaining `(k1, k2)`
    /// pair; ties resolved toward the lowest `k1`, then lowest `k2`.
    pub fn eval_with_argmax(&self, x: &Belief) -> Result<(f64, usize, usize)> {
        if self.sets.is_empty() {
            return Err(PosgError::EmptyStructure("layered slice has no sets".into()));
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_k1 = 0;
        let mut best_k2 = 0;
        for (k1, set) in self.sets.iter().enumerate() {
            let (v, k2) = set.min_value(x)?;
            if v > best {
                best = v;
                best_k1 = k1;
                best_k2 = k2;
            }
        }
        Ok((best, best_k1, best_k2))
    }
}

/// Layered (max-min) value function across all leader states.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LayeredValueFunction {
    pub slices: Vec<LayeredSlice>,
}

impl LayeredValueFunction {
    pub fn new(slices: Vec<LayeredSlice>) -> LayeredValueFunction {
        LayeredValueFunction { slices }
    }

    /// The all-zero function: one set with one zero vector per state.
    pub fn zero(num_leader_states: usize, num_follower_states: usize) -> LayeredValueFunction {
        let slices = (0..num_leader_states)
            .map(|_| {
                LayeredSlice::new(vec![GammaSet::new(
                    0,
                    vec![GammaVector::new(vec![0.0; num_follower_states], 0, 0)],
                )])
            })
            .collect();
        LayeredValueFunction { slices }
    }

    pub fn slice(&self, s_l: usize) -> Result<&LayeredSlice> {
        self.slices
            .get(s_l)
            .ok_or_else(|| PosgError::IndexOutOfRange(format!("leader state {s_l}")))
    }
}

/// Max-min evaluation of a layered function at `(s^L, x)`.
pub fn eval_layered(v: &LayeredValueFunction, s_l: usize, x: &Belief) -> Result<f64> {
    Ok(v.slice(s_l)?.eval_with_argmax(x)?.0)
}

/// Per-leader-state slice of a concave under-approximation, together with
/// one witness belief per vector and the stage approximation error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcaveSlice {
    pub vectors: Vec<GammaVector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Belief>,
    /// Maximum certified gap to the layered function it approximates.
    pub epsilon: f64,
}

impl ConcaveSlice {
    pub fn new(vectors: Vec<GammaVector>) -> ConcaveSlice {
        ConcaveSlice {
            vectors,
            witnesses: Vec::new(),
            epsilon: 0.0,
        }
    }

    /// Minimum dot product over the slice (lowest index on ties).
    pub fn min_value(&self, x: &Belief) -> Result<(f64, usize)> {
        if self.vectors.is_empty() {
            return Err(PosgError::EmptyStructure(
                "concave slice holds no vectors".into(),
            ));
        }
        let mut best = f64::INFINITY;
        let mut best_k = 0;
        for (k, g) in self.vectors.iter().enumerate() {
            let v = g.dot(x);
            if v < best {
                best = v;
                best_k = k;
            }
        }
        Ok((best, best_k))
    }
}

/// Concave (min-of-linear) value function across all leader states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcaveValueFunction {
    pub slices: Vec<ConcaveSlice>,
}

impl ConcaveValueFunction {
    pub fn new(slices: Vec<ConcaveSlice>) -> ConcaveValueFunction {
        ConcaveValueFunction { slices }
    }

    /// The all-zero terminal function.
    pub fn zero(num_leader_states: usize, num_follower_states: usize) -> ConcaveValueFunction {
        let slices = (0..num_leader_states)
            .map(|_| ConcaveSlice::new(vec![GammaVector::new(vec![0.0; num_follower_states], 0, 0)]))
            .collect();
        ConcaveValueFunction { slices }
    }

    pub fn slice(&self, s_l: usize) -> Result<&ConcaveSlice> {
        self.slices
            .get(s_l)
            .ok_or_else(|| PosgError::IndexOutOfRange(format!("leader state {s_l}")))
    }

    /// Largest per-state epsilon.
    pub fn max_epsilon(&self) -> f64 {
        self.slices.iter().map(|s| s.epsilon).fold(0.0, f64::max)
    }
}

/// Min evaluation of a concave function at `(s^L, x)`.
pub fn eval_concave(v: &ConcaveValueFunction, s_l: usize, x: &Belief) -> Result<f64> {
    Ok(v.slice(s_l)?.min_value(x)?.0)
}

/// Lower envelope of a bare vector list; shared by tests and pruning.
pub(crate) fn envelope_min(vectors: &[GammaVector], x: &Belief) -> f64 {
    vectors
        .iter()
        .map(|g| g.dot(x))
        .fold(f64::INFINITY, f64::min)
}
