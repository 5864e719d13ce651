//! Solver configuration: every tolerance and cap lives in one record so
//! tests and the CLI pin the exact same numbers.

use serde::{Deserialize, Serialize};

/// Numerical tolerances and iteration caps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Constraint feasibility for LP/MIP solutions.
    pub feasibility: f64,
    /// Distance from {0,1} below which a binary is considered integral.
    pub integrality: f64,
    /// Branch-and-bound optimality gap.
    pub optimality_gap: f64,
    /// Transition mass below which a (z', s^L') branch is treated as
    /// unreachable.
    pub sigma_zero: f64,
    /// Witness-LP margin a vector must achieve to survive pruning.
    pub purge_margin: f64,
    /// Componentwise gap under which two vectors count as exact duplicates.
    pub duplicate: f64,
    /// Joint-dominance objective above which a set is removed
    /// (the paper uses a strict zero).
    pub set_removal: f64,
    /// Magnitude of allowed violation for the lower-bound certificate.
    pub certificate: f64,
    /// Distance under which two witness beliefs are the same point.
    pub witness_dedup: f64,
    /// Clip-and-renormalize tolerance when snapping MIP beliefs back onto
    /// the simplex.
    pub simplex_snap: f64,
    /// Simplex pivot cap per LP solve.
    pub lp_pivot_cap: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_threshold: usize,
    /// Branch-and-bound node cap per MIP solve.
    pub mip_node_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-7,
            integrality: 1e-6,
            optimality_gap: 1e-8,
            sigma_zero: 1e-12,
            purge_margin: 1e-9,
            duplicate: 1e-10,
            set_removal: 1e-7,
            certificate: 1e-7,
            witness_dedup: 1e-9,
            simplex_snap: 1e-9,
            lp_pivot_cap: 100_000,
            bland_threshold: 1000,
            mip_node_cap: 1_000_000,
        }
    }
}

/// How the per-iteration deviation between consecutive value functions is
/// measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DevMode {
    /// Exact maximum deviation via two MIPs per leader state.
    Exact,
    /// Cheaper estimate on a belief lattice of the given resolution.
    SampledGrid(usize),
}

/// Top-level solver configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Seed for every stochastic choice (the random beliefs used by the
    /// dominance procedure in particular).
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Cap on refinement rounds of the concave-approximation loop per
    /// (stage, leader state).
    pub approx_max_rounds: usize,
    /// Record the deviation trace for finite-horizon solves too.
    pub track_dev: bool,
    pub dev_mode: DevMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            tolerances: Tolerances::default(),
            approx_max_rounds: 50,
            track_dev: false,
            dev_mode: DevMode::Exact,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig {
            seed,
            ..SolverConfig::default()
        }
    }
}
