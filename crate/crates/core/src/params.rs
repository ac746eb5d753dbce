//! Scenario scalars shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("invalid parameters: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// Three-slope path loss with log-normal shadowing beyond the last breakpoint.
///
/// Distances are in km. Below `d0_km` the loss is flat, between `d0_km` and
/// `d1_km` it falls with exponent 2, and beyond `d1_km` with exponent 3.5
/// plus shadowing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossModel {
    pub carrier_mhz: f64,
    pub ap_height_m: f64,
    pub user_height_m: f64,
    pub d0_km: f64,
    pub d1_km: f64,
    pub shadowing_db: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            carrier_mhz: 1900.0,
            ap_height_m: 15.0,
            user_height_m: 1.65,
            d0_km: 0.01,
            d1_km: 0.05,
            shadowing_db: 8.0,
        }
    }
}

impl PathLossModel {
    /// Hata-COST231 constant term `L` in dB.
    pub fn constant_db(&self) -> f64 {
        let lf = self.carrier_mhz.log10();
        46.3 + 33.9 * lf - 13.82 * self.ap_height_m.log10()
            - (1.1 * lf - 0.7) * self.user_height_m
            + (1.56 * lf - 0.8)
    }

    /// Median path gain in dB (negative) at distance `d_km`, without shadowing.
    pub fn gain_db(&self, d_km: f64) -> f64 {
        let l = self.constant_db();
        if d_km > self.d1_km {
            -l - 35.0 * d_km.log10()
        } else if d_km > self.d0_km {
            -l - 15.0 * self.d1_km.log10() - 20.0 * d_km.log10()
        } else {
            -l - 15.0 * self.d1_km.log10() - 20.0 * self.d0_km.log10()
        }
    }

    /// Whether shadowing applies at this distance.
    pub fn shadowed(&self, d_km: f64) -> bool {
        d_km > self.d1_km
    }

    fn validate(&self, errs: &mut Vec<String>) {
        if !(self.carrier_mhz > 0.0) {
            errs.push("path_loss.carrier_mhz must be > 0".into());
        }
        if !(self.ap_height_m > 0.0 && self.user_height_m > 0.0) {
            errs.push("path_loss heights must be > 0".into());
        }
        if !(self.d0_km > 0.0 && self.d1_km > self.d0_km) {
            errs.push("path_loss breakpoints need 0 < d0_km < d1_km".into());
        }
        if !(self.shadowing_db >= 0.0) {
            errs.push("path_loss.shadowing_db must be >= 0".into());
        }
    }
}

/// Thermal noise power `B · k_B · T · NF` in Watt; `noise_figure_db` is in dB.
pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64, temperature_k: f64) -> f64 {
    bandwidth_hz * BOLTZMANN * temperature_k * 10f64.powf(noise_figure_db / 10.0)
}

/// All scalars of one scenario.
///
/// `rho` and `pilot_snr` are normalized by the noise power, so
/// `rho * noise_power_w` is the uplink data power in Watt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// M
    pub num_aps: usize,
    /// N
    pub antennas_per_ap: usize,
    /// K
    pub num_users: usize,
    /// D, side of the square area.
    pub area_km: f64,
    pub pilot_len: usize,
    /// Samples per coherence interval.
    pub coherence_len: usize,
    pub coherence_time_s: f64,
    pub rho: f64,
    pub pilot_snr: f64,
    pub bandwidth_hz: f64,
    /// PA efficiency ζ.
    pub pa_efficiency: f64,
    pub noise_power_w: f64,
    pub p_fix_w: f64,
    pub p_user_w: f64,
    pub p_bt_w: f64,
    pub backhaul_capacity_bps: f64,
    /// Per-user maximum normalized power.
    pub p_max: Vec<f64>,
    /// Per-user required spectral efficiency, bit/s/Hz.
    pub se_required: Vec<f64>,
    pub bits: u32,
    /// Charge backhaul power on every AP (`M · P_BT · R/C`). When false, the
    /// single-link term `P_BT · R/C` is used instead.
    pub backhaul_per_ap: bool,
    pub path_loss: PathLossModel,
}

impl SystemParams {
    /// Default scenario: 1 W data power, 200 mW pilots, 20 MHz, NF 9 dB,
    /// 290 K, ζ = 0.3, P_U = 0.1 W, P_fix = 0.825 W, P_BT = 1 W,
    /// C_bh = 100 Mbit/s, τ_c = 200, T_c = 1 ms, D = 1 km, α = 2.
    pub fn new(num_aps: usize, antennas_per_ap: usize, num_users: usize) -> Self {
        let bandwidth_hz = 20e6;
        let pn = noise_power(bandwidth_hz, 9.0, 290.0);
        Self {
            num_aps,
            antennas_per_ap,
            num_users,
            area_km: 1.0,
            pilot_len: num_users.min(20).max(1),
            coherence_len: 200,
            coherence_time_s: 1e-3,
            rho: 1.0 / pn,
            pilot_snr: 0.2 / pn,
            bandwidth_hz,
            pa_efficiency: 0.3,
            noise_power_w: pn,
            p_fix_w: 0.825,
            p_user_w: 0.1,
            p_bt_w: 1.0,
            backhaul_capacity_bps: 100e6,
            p_max: vec![1.0; num_users],
            se_required: vec![0.0; num_users],
            bits: 2,
            backhaul_per_ap: true,
            path_loss: PathLossModel::default(),
        }
    }

    /// Uplink frame length τ_f = τ_c − τ_p.
    pub fn frame_len(&self) -> usize {
        self.coherence_len.saturating_sub(self.pilot_len)
    }

    /// Pre-log factor `1 − τ_p/τ_c`.
    pub fn prelog(&self) -> f64 {
        1.0 - self.pilot_len as f64 / self.coherence_len as f64
    }

    /// SINR needed to reach `se` bit/s/Hz.
    pub fn sinr_threshold(&self, se: f64) -> f64 {
        if se <= 0.0 {
            0.0
        } else {
            (se / self.prelog()).exp2() - 1.0
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let mut errs = Vec::new();
        if self.num_aps == 0 || self.antennas_per_ap == 0 || self.num_users == 0 {
            errs.push("M, N and K must be >= 1".into());
        }
        if !(self.pilot_len >= 1 && self.pilot_len < self.coherence_len) {
            errs.push(format!(
                "need 0 < tau_p < tau_c (tau_p = {}, tau_c = {})",
                self.pilot_len, self.coherence_len
            ));
        }
        if !(self.area_km > 0.0) {
            errs.push("area_km must be > 0".into());
        }
        for (name, v) in [
            ("coherence_time_s", self.coherence_time_s),
            ("rho", self.rho),
            ("pilot_snr", self.pilot_snr),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_power_w", self.noise_power_w),
            ("backhaul_capacity_bps", self.backhaul_capacity_bps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be positive and finite"));
            }
        }
        for (name, v) in [
            ("p_fix_w", self.p_fix_w),
            ("p_user_w", self.p_user_w),
            ("p_bt_w", self.p_bt_w),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be >= 0"));
            }
        }
        if !(self.pa_efficiency > 0.0 && self.pa_efficiency <= 1.0) {
            errs.push(format!("pa_efficiency must lie in (0, 1], got {}", self.pa_efficiency));
        }
        if !(1..=7).contains(&self.bits) {
            errs.push(format!("bits must lie in 1..=7, got {}", self.bits));
        }
        if self.p_max.len() != self.num_users || self.p_max.iter().any(|&p| !(p > 0.0)) {
            errs.push("p_max needs K positive entries".into());
        }
        if self.se_required.len() != self.num_users || self.se_required.iter().any(|&s| !(s >= 0.0)) {
            errs.push("se_required needs K non-negative entries".into());
        }
        self.path_loss.validate(&mut errs);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ParamError::Invalid(errs))
        }
    }
}
