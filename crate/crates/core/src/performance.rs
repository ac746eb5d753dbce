//! Closed-form uplink SINR, spectral efficiency and the power/energy model.
//!
//! For user `k` with real combining weights `u` over the M APs:
//!
//! ```text
//! SINR_k = N² q_k (Γ_kᵀu)² / ( N² Σ_{k'≠k} q_k' |φ_kᴴφ_k'|² (Δ_kk'ᵀu)²
//!                               + N Σ_k' q_k' uᵀD_kk'u + (N/ρ) uᵀR_k u )
//! ```
//!
//! with `Γ_k = [γ_mk]`, `Δ_kk' = [γ_mk β_mk'/β_mk]`,
//! `D_kk' = diag(β_mk'(ε(2β_mk − γ_mk) + γ_mk))`, `R_k = diag((ε + 1)γ_mk)`
//! and `ε = σ_ẽ²/ã²`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::NetworkStats;
use crate::params::SystemParams;
use crate::quantizer::QuantizerSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("receiver filter of user {0} is all zeros")]
    ZeroFilter(usize),
}

/// Per-user vectors of the SINR expression. Diagonal matrices are stored as
/// their diagonals; `delta[k]` is unused (zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SinrMatrices {
    pub gamma: DVector<f64>,
    pub delta: Vec<DVector<f64>>,
    pub d: Vec<DVector<f64>>,
    pub r: DVector<f64>,
}

/// Builds Γ_k, Δ_kk', D_kk' and R_k for user `k`.
pub fn build_sinr_matrices(stats: &NetworkStats, spec: &QuantizerSpec, k: usize) -> SinrMatrices {
    let m = stats.num_aps();
    let kk = stats.num_users();
    let eps = spec.distortion_ratio();
    let gamma = DVector::from_fn(m, |i, _| stats.gamma[(i, k)]);
    let delta = (0..kk)
        .map(|j| {
            if j == k {
                return DVector::zeros(m);
            }
            DVector::from_fn(m, |i, _| {
                let b = stats.beta[(i, k)];
                // γ_mk vanishes with β_mk, so the ratio extends continuously to 0.
                if b > 0.0 {
                    stats.gamma[(i, k)] * stats.beta[(i, j)] / b
                } else {
                    0.0
                }
            })
        })
        .collect();
    let d = (0..kk)
        .map(|j| {
            DVector::from_fn(m, |i, _| {
                let b = stats.beta[(i, k)];
                let g = stats.gamma[(i, k)];
                stats.beta[(i, j)] * (eps * (2.0 * b - g) + g)
            })
        })
        .collect();
    let r = gamma.map(|g| (eps + 1.0) * g);
    SinrMatrices { gamma, delta, d, r }
}

fn dot(a: &DVector<f64>, u: &[f64]) -> f64 {
    a.iter().zip(u).map(|(x, y)| x * y).sum()
}

fn weighted_norm(diag: &DVector<f64>, u: &[f64]) -> f64 {
    diag.iter().zip(u).map(|(d, y)| d * y * y).sum()
}

/// Numerator and denominator of SINR_k.
fn sinr_parts(
    k: usize,
    q: &[f64],
    u: &[f64],
    mats: &SinrMatrices,
    pilot_gram: &DMatrix<f64>,
    rho: f64,
    n: usize,
) -> (f64, f64) {
    let n = n as f64;
    let num = n * n * q[k] * dot(&mats.gamma, u).powi(2);
    let mut den = n / rho * weighted_norm(&mats.r, u);
    for (j, &qj) in q.iter().enumerate() {
        if qj == 0.0 {
            continue;
        }
        den += n * qj * weighted_norm(&mats.d[j], u);
        if j != k && pilot_gram[(k, j)] != 0.0 {
            den += n * n * qj * pilot_gram[(k, j)] * dot(&mats.delta[j], u).powi(2);
        }
    }
    (num, den)
}

/// Closed-form SINR of user `k`; invariant to scaling of `u`.
pub fn sinr(
    k: usize,
    q: &[f64],
    u: &[f64],
    mats: &SinrMatrices,
    pilot_gram: &DMatrix<f64>,
    rho: f64,
    n: usize,
) -> Result<f64, PerfError> {
    if u.iter().all(|&x| x == 0.0) {
        return Err(PerfError::ZeroFilter(k));
    }
    let (num, den) = sinr_parts(k, q, u, mats, pilot_gram, rho, n);
    Ok(num / den)
}

/// `(1 − τ_p/τ_c) log2(1 + SINR)`.
pub fn spectral_efficiency(sinr: f64, pilot_len: usize, coherence_len: usize) -> f64 {
    (1.0 - pilot_len as f64 / coherence_len as f64) * sinr.ln_1p() / std::f64::consts::LN_2
}

/// Per-AP backhaul rate `2 K τ_f α / T_c` in bit/s.
pub fn backhaul_rate(num_users: usize, frame_len: usize, bits: u32, coherence_time_s: f64) -> f64 {
    2.0 * num_users as f64 * frame_len as f64 * bits as f64 / coherence_time_s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub transmit_w: f64,
    pub fixed_w: f64,
    pub users_w: f64,
    pub backhaul_w: f64,
    pub total_w: f64,
    pub backhaul_rate_bps: f64,
    /// Set when the per-AP rate exceeds the backhaul capacity.
    pub backhaul_violation: bool,
}

/// `P_TX + M P_fix + K P_U + Σ_m P_BT R_bh/C_bh`.
pub fn total_power(q: &[f64], params: &SystemParams, bits: u32) -> PowerBreakdown {
    let transmit_w = params.rho * params.noise_power_w * q.iter().sum::<f64>() / params.pa_efficiency;
    let fixed_w = params.num_aps as f64 * params.p_fix_w;
    let users_w = params.num_users as f64 * params.p_user_w;
    let rate = backhaul_rate(params.num_users, params.frame_len(), bits, params.coherence_time_s);
    let links = if params.backhaul_per_ap { params.num_aps as f64 } else { 1.0 };
    let backhaul_w = links * params.p_bt_w * rate / params.backhaul_capacity_bps;
    PowerBreakdown {
        transmit_w,
        fixed_w,
        users_w,
        backhaul_w,
        total_w: transmit_w + fixed_w + users_w + backhaul_w,
        backhaul_rate_bps: rate,
        backhaul_violation: rate > params.backhaul_capacity_bps,
    }
}

/// `B · ΣS_k / P_total` in bit/Joule.
pub fn energy_efficiency(sum_se: f64, bandwidth_hz: f64, power: &PowerBreakdown) -> f64 {
    bandwidth_hz * sum_se / power.total_w
}

/// Linear-fractional form of the SINR for fixed filters:
/// `SINR_k = q_k / (Σ_{k'≠k} a_kk' q_k' + Σ_k' b_kk' q_k' + c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrCoefficients {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
}

impl SinrCoefficients {
    pub fn num_users(&self) -> usize {
        self.c.len()
    }

    /// Interference-plus-noise term divided by `q_k`'s coefficient.
    pub fn denominator(&self, k: usize, q: &[f64]) -> f64 {
        let mut s = self.c[k];
        for (j, &qj) in q.iter().enumerate() {
            s += (self.a[(k, j)] + self.b[(k, j)]) * qj;
        }
        s
    }

    pub fn sinr(&self, k: usize, q: &[f64]) -> f64 {
        q[k] / self.denominator(k, q)
    }

    pub fn sinr_all(&self, q: &[f64]) -> Vec<f64> {
        (0..self.num_users()).map(|k| self.sinr(k, q)).collect()
    }
}

/// Closed-form powers of the five signal components of user `k`
/// (desired signal, beamforming uncertainty, inter-user interference per
/// interferer, noise and quantization error), before division by ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermPowers {
    /// |DS_k|²
    pub ds: f64,
    pub bu: f64,
    /// Indexed by interferer; entry `k` is zero.
    pub iui: Vec<f64>,
    pub tn: f64,
    pub tqe: f64,
}

impl TermPowers {
    /// |DS|² / (BU + ΣIUI + TN + TQE/ã²).
    pub fn sinr(&self, gain: f64) -> f64 {
        self.ds / (self.bu + self.iui.iter().sum::<f64>() + self.tn + self.tqe / (gain * gain))
    }
}

/// Large-scale model of one scenario with cached per-user SINR matrices.
#[derive(Debug, Clone)]
pub struct PerformanceModel<'a> {
    pub params: &'a SystemParams,
    pub stats: &'a NetworkStats,
    pub spec: QuantizerSpec,
    mats: Vec<SinrMatrices>,
}

impl<'a> PerformanceModel<'a> {
    pub fn new(params: &'a SystemParams, stats: &'a NetworkStats, spec: QuantizerSpec) -> Self {
        let mats = (0..stats.num_users())
            .map(|k| build_sinr_matrices(stats, &spec, k))
            .collect();
        Self { params, stats, spec, mats }
    }

    pub fn num_aps(&self) -> usize {
        self.stats.num_aps()
    }

    pub fn num_users(&self) -> usize {
        self.stats.num_users()
    }

    pub fn matrices(&self, k: usize) -> &SinrMatrices {
        &self.mats[k]
    }

    pub fn sinr(&self, k: usize, q: &[f64], u: &[f64]) -> Result<f64, PerfError> {
        sinr(
            k,
            q,
            u,
            &self.mats[k],
            &self.stats.pilot_gram,
            self.params.rho,
            self.params.antennas_per_ap,
        )
    }

    pub fn sinr_all(&self, q: &[f64], u: &DMatrix<f64>) -> Result<Vec<f64>, PerfError> {
        (0..self.num_users())
            .map(|k| self.sinr(k, q, u.column(k).as_slice()))
            .collect()
    }

    pub fn spectral_efficiency(&self, sinr: f64) -> f64 {
        spectral_efficiency(sinr, self.params.pilot_len, self.params.coherence_len)
    }

    /// Bits used by the backhaul power model.
    pub fn backhaul_bits(&self) -> u32 {
        if self.spec.is_ideal() {
            self.params.bits
        } else {
            self.spec.bits
        }
    }

    /// Coefficients `a_kk'`, `b_kk'`, `c_k` for fixed filters.
    pub fn coefficients(&self, u: &DMatrix<f64>) -> SinrCoefficients {
        let kk = self.num_users();
        let n = self.params.antennas_per_ap as f64;
        let rho = self.params.rho;
        let gram = &self.stats.pilot_gram;
        let mut a = DMatrix::zeros(kk, kk);
        let mut b = DMatrix::zeros(kk, kk);
        let mut c = DVector::zeros(kk);
        for k in 0..kk {
            let uk = u.column(k);
            let uk = uk.as_slice();
            let mats = &self.mats[k];
            let g = dot(&mats.gamma, uk).powi(2);
            for j in 0..kk {
                if j != k && gram[(k, j)] != 0.0 {
                    a[(k, j)] = gram[(k, j)] * dot(&mats.delta[j], uk).powi(2) / g;
                }
                b[(k, j)] = weighted_norm(&mats.d[j], uk) / (n * g);
            }
            c[k] = weighted_norm(&mats.r, uk) / (rho * n * g);
        }
        SinrCoefficients { a, b, c }
    }

    /// Closed forms of every SINR component of user `k`.
    pub fn closed_form_terms(&self, k: usize, q: &[f64], u: &[f64]) -> TermPowers {
        let n = self.params.antennas_per_ap as f64;
        let rho = self.params.rho;
        let st = self.stats;
        let m = self.num_aps();
        let kk = self.num_users();
        let u2 = |i: usize| u[i] * u[i];

        let ds = (n * (rho * q[k]).sqrt() * (0..m).map(|i| u[i] * st.gamma[(i, k)]).sum::<f64>()).powi(2);
        let bu = rho * n * q[k] * (0..m).map(|i| u2(i) * st.gamma[(i, k)] * st.beta[(i, k)]).sum::<f64>();
        let iui = (0..kk)
            .map(|j| {
                if j == k {
                    return 0.0;
                }
                let incoherent: f64 = (0..m).map(|i| u2(i) * st.beta[(i, j)] * st.gamma[(i, k)]).sum();
                let coherent = dot(&self.mats[k].delta[j], u).powi(2);
                n * rho * q[j] * incoherent + n * n * rho * q[j] * st.pilot_gram[(k, j)] * coherent
            })
            .collect();
        let tn = n * (0..m).map(|i| u2(i) * st.gamma[(i, k)]).sum::<f64>();
        let tqe = n
            * self.spec.distortion
            * (0..m)
                .map(|i| {
                    let load: f64 = (0..kk).map(|j| q[j] * st.beta[(i, j)]).sum();
                    u2(i) * (rho * (2.0 * st.beta[(i, k)] - st.gamma[(i, k)]) * load + st.gamma[(i, k)])
                })
                .sum::<f64>();
        TermPowers { ds, bu, iui, tn, tqe }
    }

    /// Evaluates SINR, SE, power and energy efficiency of an allocation.
    pub fn evaluate(&self, q: &[f64], u: &DMatrix<f64>) -> Result<SolutionState, PerfError> {
        let sinr = self.sinr_all(q, u)?;
        let se: Vec<f64> = sinr.iter().map(|&s| self.spectral_efficiency(s)).collect();
        let sum_se = se.iter().sum();
        let power = total_power(q, self.params, self.backhaul_bits());
        let ee = energy_efficiency(sum_se, self.params.bandwidth_hz, &power);
        let se_violations = se
            .iter()
            .zip(&self.params.se_required)
            .enumerate()
            .filter(|(_, (s, r))| **s < **r - 1e-6)
            .map(|(k, _)| k)
            .collect();
        Ok(SolutionState { q: q.to_vec(), u: u.clone(), sinr, se, sum_se, ee, power, se_violations })
    }
}

/// A power allocation with its filters and achieved performance.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub q: Vec<f64>,
    /// M×K, unit-norm columns.
    pub u: DMatrix<f64>,
    pub sinr: Vec<f64>,
    /// bit/s/Hz
    pub se: Vec<f64>,
    pub sum_se: f64,
    /// bit/Joule
    pub ee: f64,
    pub power: PowerBreakdown,
    /// Users below their SE requirement.
    pub se_violations: Vec<usize>,
}
