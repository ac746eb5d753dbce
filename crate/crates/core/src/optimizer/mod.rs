//! Energy-efficiency maximization.
//!
//! The pipeline is: power minimization for the SE targets (giving the
//! budget floor ν*), then for every budget ν on a grid the alternating
//! scheme of [`alg1`], which interleaves SCA power allocation ([`sca`]) with
//! receiver filter design ([`filters`]). [`search`] picks the best ν and
//! optionally the best number of quantization bits.

pub mod alg1;
pub mod filters;
pub mod pmp;
pub mod sca;
pub mod search;

use serde::Serialize;
use thiserror::Error;

use crate::gp::{GpError, GpOptions};
use crate::performance::PerfError;

pub use alg1::{algorithm1, Alg1Result, OuterRecord};
pub use filters::{design_filter, design_filters};
pub use pmp::{compute_nu_star, min_power, solve_pmp};
pub use sca::{lemma1, sca_power_allocation, ScaResult};
pub use search::{equal_power_baseline, maximize_ee, maximize_ee_over_bits, nu_grid, NuSearchResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptError {
    #[error("SE targets cannot be met (users {users:?})")]
    Infeasible { users: Vec<usize> },
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Perf(#[from] PerfError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptOptions {
    /// Trust-region half width δ.
    pub delta: f64,
    /// Per-user SINR change ending the SCA loop.
    pub sca_tol: f64,
    pub sca_max_iter: usize,
    /// Per-user SE change ending the outer loop.
    pub outer_se_tol: f64,
    /// Relative E_e change ending the outer loop.
    pub outer_ee_tol: f64,
    pub outer_max_iter: usize,
    /// Rounds of PMP/filter alternation.
    pub pmp_rounds: usize,
    pub nu_points: usize,
    /// Golden-section evaluations around the best grid point.
    pub nu_refine: usize,
    pub nu_floor: f64,
    /// Power floor for users without an SE target, relative to p_max.
    pub idle_floor: f64,
    pub gp: GpOptions,
    /// Keep per-iteration records.
    pub debug_trace: bool,
}

impl Default for OptOptions {
    fn default() -> Self {
        Self {
            delta: 0.1,
            sca_tol: 0.01,
            sca_max_iter: 30,
            outer_se_tol: 0.01,
            outer_ee_tol: 1e-3,
            outer_max_iter: 50,
            pmp_rounds: 10,
            nu_points: 12,
            nu_refine: 6,
            nu_floor: 1e-3,
            idle_floor: 1e-6,
            gp: GpOptions::default(),
            debug_trace: false,
        }
    }
}

/// One row of the debug trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub outer: usize,
    pub sca_iter: usize,
    /// Π(1 + t_k) for SCA rows, E_e in bit/J for outer rows.
    pub objective: f64,
    /// Largest relative constraint violation of the iterate.
    pub residual: f64,
}
