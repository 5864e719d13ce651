//! Solver for two-agent leader-follower partially observable stochastic
//! games under a worst-case follower.
//!
//! The leader knows its own state and tracks a belief over the follower's
//! state. A backward recursion builds, per stage, a layered max-min value
//! function (one vector set per surviving leader action), then selects a
//! concave under-approximation so the next stage can back it up like a
//! POMDP. The result is a certified lower bound of the leader's optimal
//! worst-case value together with an executable policy.
//!
//! Module map:
//!
//! * [`model`] / [`value`] — game model, beliefs, value-function forms
//! * [`mp`] — embedded dense LP/MIP kernel
//! * [`backup`] — cross-sum backup and vector pruning (with witnesses)
//! * [`dominance`] — pairwise and joint removal of dominated action sets
//! * [`approx`] — concave under-approximation with certification MIPs
//! * [`solver`] — finite-horizon recursion and infinite-horizon loop
//! * [`policy`] — action extraction from solved artifacts
//! * [`simulate`] — Monte Carlo rollouts and the three-policy study
//! * [`oracle`] — brute-force exact values for validation
//! * [`io`] — model files, artifacts, CSV export, example generator

pub mod approx;
pub mod backup;
pub mod config;
pub mod dominance;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod mp;
pub mod oracle;
pub mod policy;
pub mod simulate;
pub mod solver;
pub mod value;

pub use config::{DevMode, SolverConfig, Tolerances};
pub use error::{MpError, PosgError, Result};
pub use model::{belief_update, Belief, BeliefUpdate, PosgModel};
pub use value::{
    eval_concave, eval_layered, ConcaveSlice, ConcaveValueFunction, GammaSet, GammaVector,
    LayeredSlice, LayeredValueFunction,
};
