//! Uplink energy-efficiency modelling for cell-free massive MIMO with
//! quantized, capacity-limited backhaul.
//!
//! The crate is organised bottom-up:
//!
//! - [`network`]: geometry, large-scale fading and MMSE estimation statistics.
//! - [`quantizer`]: Bussgang model of the optimal uniform scalar quantizer.
//! - [`performance`]: closed-form SINR / spectral efficiency and the power model.
//! - [`gp`]: a small geometric-programming engine with a brute-force oracle.
//! - [`optimizer`]: receiver filter design, power minimization, SCA power
//!   allocation, the alternating maximizer and the budget search.
//! - [`montecarlo`]: a link-level simulator that checks the closed forms.
//! - [`config`] and [`harness`]: scenario files, sweeps and CSV/JSON output.

pub mod config;
pub mod gp;
pub mod harness;
pub mod montecarlo;
pub mod network;
pub mod optimizer;
pub mod params;
pub mod performance;
pub mod quantizer;
pub mod rng;

pub use network::{generate_network, NetworkStats};
pub use params::{ParamError, PathLossModel, SystemParams};
pub use performance::{PerformanceModel, SolutionState};
pub use quantizer::{optimize_step_size, QuantizerSpec};
