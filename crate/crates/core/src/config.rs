//! Scenario configuration files.
//!
//! A scenario is a TOML document. Every key is optional; missing keys take
//! the default scenario values and unknown keys are rejected.
//!
//! ```toml
//! mode = "sweep"
//! n_seeds = 10
//!
//! [system]
//! num_users = 20
//! p_max = 1.0            # scalar or one value per user
//!
//! [sweep]
//! num_aps = [20, 40, 60, 80, 100]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::montecarlo::AgcVariance;
use crate::params::{noise_power, PathLossModel, SystemParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Optimize,
    Baseline,
    Validate,
    Table1,
    Sweep,
}

/// A value given once for all users or once per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerUser {
    All(f64),
    Each(Vec<f64>),
}

impl PerUser {
    fn expand(&self, k: usize, name: &str, errs: &mut Vec<String>) -> Vec<f64> {
        match self {
            PerUser::All(v) => vec![*v; k],
            PerUser::Each(v) if v.len() == k => v.clone(),
            PerUser::Each(v) => {
                errs.push(format!("system.{name} has {} entries but K = {k}", v.len()));
                vec![f64::NAN; k]
            }
        }
    }
}

/// Physical scenario parameters. Powers are in Watt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    pub num_users: usize,
    pub area_km: f64,
    /// Defaults to `min(K, 20)`; `pilot_len >= K` gives orthogonal pilots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pilot_len: Option<usize>,
    pub coherence_len: usize,
    pub coherence_time_s: f64,
    pub data_power_w: f64,
    pub pilot_power_w: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub temperature_k: f64,
    #[serde(alias = "zeta")]
    pub pa_efficiency: f64,
    pub p_fix_w: f64,
    pub p_user_w: f64,
    pub p_bt_w: f64,
    pub backhaul_capacity_bps: f64,
    pub p_max: PerUser,
    pub se_required: PerUser,
    pub bits: u32,
    pub backhaul_per_ap: bool,
    pub path_loss: PathLossModel,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            num_aps: 100,
            antennas_per_ap: 1,
            num_users: 20,
            area_km: 1.0,
            pilot_len: None,
            coherence_len: 200,
            coherence_time_s: 1e-3,
            data_power_w: 1.0,
            pilot_power_w: 0.2,
            bandwidth_hz: 20e6,
            noise_figure_db: 9.0,
            temperature_k: 290.0,
            pa_efficiency: 0.3,
            p_fix_w: 0.825,
            p_user_w: 0.1,
            p_bt_w: 1.0,
            backhaul_capacity_bps: 100e6,
            p_max: PerUser::All(1.0),
            se_required: PerUser::All(0.0),
            bits: 2,
            backhaul_per_ap: true,
            path_loss: PathLossModel::default(),
        }
    }
}

impl SystemConfig {
    fn build(&self, errs: &mut Vec<String>) -> SystemParams {
        let k = self.num_users;
        let pn = noise_power(self.bandwidth_hz, self.noise_figure_db, self.temperature_k);
        let mut p = SystemParams::new(self.num_aps, self.antennas_per_ap, k);
        p.area_km = self.area_km;
        if let Some(tp) = self.pilot_len {
            p.pilot_len = tp;
        }
        p.coherence_len = self.coherence_len;
        p.coherence_time_s = self.coherence_time_s;
        p.noise_power_w = pn;
        p.rho = self.data_power_w / pn;
        p.pilot_snr = self.pilot_power_w / pn;
        p.bandwidth_hz = self.bandwidth_hz;
        p.pa_efficiency = self.pa_efficiency;
        p.p_fix_w = self.p_fix_w;
        p.p_user_w = self.p_user_w;
        p.p_bt_w = self.p_bt_w;
        p.backhaul_capacity_bps = self.backhaul_capacity_bps;
        p.p_max = self.p_max.expand(k, "p_max", errs);
        p.se_required = self.se_required.expand(k, "se_required", errs);
        p.bits = self.bits;
        p.backhaul_per_ap = self.backhaul_per_ap;
        p.path_loss = self.path_loss.clone();
        p
    }

    /// Resolves to model parameters, listing every range violation.
    pub fn to_params(&self) -> Result<SystemParams, ConfigError> {
        let mut errs = Vec::new();
        let p = self.build(&mut errs);
        if let Err(crate::params::ParamError::Invalid(e)) = p.validate() {
            errs.extend(e);
        }
        if errs.is_empty() {
            Ok(p)
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

/// Sweep axes. Each axis replaces the corresponding system value; points
/// are the Cartesian product in the field order below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_aps: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antennas_per_ap: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_users: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bt_w: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backhaul_capacity_bps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_km: Option<Vec<f64>>,
    /// Keeps M·N fixed: M = total_antennas / N at every point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_antennas: Option<usize>,
}

/// One resolved sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub params: SystemParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub mode: Mode,
    /// Network seed of the first realization; realization `s` uses `seed + s`.
    pub seed: u64,
    pub n_seeds: usize,
    /// Monte-Carlo draws in validate mode.
    pub n_draws: usize,
    pub agc: AgcVariance,
    pub nu_points: usize,
    pub out_dir: PathBuf,
    pub debug_trace: bool,
    pub system: SystemConfig,
    pub sweep: SweepConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Optimize,
            seed: 1,
            n_seeds: 1,
            n_draws: 20_000,
            agc: AgcVariance::Exact,
            nu_points: 12,
            out_dir: PathBuf::from("results"),
            debug_trace: false,
            system: SystemConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            ConfigError::Parse { line, column, message: e.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        if self.n_seeds == 0 {
            errs.push("n_seeds must be >= 1".into());
        }
        if self.nu_points == 0 {
            errs.push("nu_points must be >= 1".into());
        }
        if self.mode == Mode::Validate && self.n_draws < 1000 {
            errs.push(format!("n_draws must be >= 1000, got {}", self.n_draws));
        }
        match self.points() {
            Ok(_) => {}
            Err(ConfigError::Invalid(e)) => errs.extend(e),
            Err(e) => errs.push(e.to_string()),
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }

    /// All sweep points in deterministic order.
    pub fn points(&self) -> Result<Vec<SweepPoint>, ConfigError> {
        let s = &self.sweep;
        let b = &self.system;
        let mut errs = Vec::new();
        fn axis<T: Clone>(v: &Option<Vec<T>>, base: T, name: &str, errs: &mut Vec<String>) -> Vec<T> {
            match v {
                Some(list) if list.is_empty() => {
                    errs.push(format!("sweep.{name} must not be empty"));
                    vec![base]
                }
                Some(list) => list.clone(),
                None => vec![base],
            }
        }
        let ms = axis(&s.num_aps, b.num_aps, "num_aps", &mut errs);
        let ns = axis(&s.antennas_per_ap, b.antennas_per_ap, "antennas_per_ap", &mut errs);
        let ks = axis(&s.num_users, b.num_users, "num_users", &mut errs);
        let bits = axis(&s.bits, b.bits, "bits", &mut errs);
        let pbt = axis(&s.p_bt_w, b.p_bt_w, "p_bt_w", &mut errs);
        let cbh = axis(&s.backhaul_capacity_bps, b.backhaul_capacity_bps, "backhaul_capacity_bps", &mut errs);
        let area = axis(&s.area_km, b.area_km, "area_km", &mut errs);
        if s.total_antennas.is_some() && s.num_aps.is_some() {
            errs.push("sweep.total_antennas and sweep.num_aps are mutually exclusive".into());
        }

        let mut out = Vec::new();
        for &m in &ms {
            for &n in &ns {
                for &k in &ks {
                    for &a in &bits {
                        for &pb in &pbt {
                            for &c in &cbh {
                                for &d in &area {
                                    let mut sys = b.clone();
                                    sys.num_aps = m;
                                    if let Some(t) = s.total_antennas {
                                        if n == 0 || t % n != 0 {
                                            errs.push(format!("total_antennas {t} is not a multiple of N = {n}"));
                                            continue;
                                        }
                                        sys.num_aps = t / n;
                                    }
                                    sys.antennas_per_ap = n;
                                    sys.num_users = k;
                                    sys.bits = a;
                                    sys.p_bt_w = pb;
                                    sys.backhaul_capacity_bps = c;
                                    sys.area_km = d;
                                    let index = out.len();
                                    match sys.to_params() {
                                        Ok(params) => out.push(SweepPoint { index, params }),
                                        Err(ConfigError::Invalid(e)) => {
                                            for msg in e {
                                                if !errs.contains(&msg) {
                                                    errs.push(msg);
                                                }
                                            }
                                        }
                                        Err(e) => errs.push(e.to_string()),
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        if errs.is_empty() {
            Ok(out)
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        let p = cfg.system.to_params().unwrap();
        assert_eq!(p, SystemParams::new(100, 1, 20));
    }

    #[test]
    fn defaults_round_trip() {
        let cfg = ScenarioConfig::default();
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn custom_config_round_trips() {
        let text = r#"
mode = "sweep"
n_seeds = 3
[system]
num_users = 3
pilot_len = 3
p_max = [1.0, 0.5, 0.25]
se_required = 0.5
[sweep]
antennas_per_ap = [1, 2, 4]
total_antennas = 64
"#;
        let cfg = ScenarioConfig::from_toml(text).unwrap();
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let pts = cfg.points().unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts.iter().map(|p| p.params.num_aps).collect::<Vec<_>>(), vec![64, 32, 16]);
        assert_eq!(pts[0].params.p_max, vec![1.0, 0.5, 0.25]);
        assert_eq!(pts[0].params.se_required, vec![0.5; 3]);
    }

    #[test]
    fn rejects_out_of_range_efficiency() {
        let err = ScenarioConfig::from_toml("[system]\npa_efficiency = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("pa_efficiency"), "{err}");
        assert!(ScenarioConfig::from_toml("[system]\nzeta = 1.5\n").is_err());
    }

    #[test]
    fn unknown_key_reports_line() {
        match ScenarioConfig::from_toml("mode = \"optimize\"\n\nbogus = 3\n") {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lists_every_violation() {
        let err = ScenarioConfig::from_toml("n_seeds = 0\n[system]\nbits = 9\np_max = [1.0]\n").unwrap_err();
        match err {
            ConfigError::Invalid(v) => assert!(v.len() >= 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_axis_rejected() {
        assert!(ScenarioConfig::from_toml("[sweep]\nbits = []\n").is_err());
    }

    #[test]
    fn cartesian_order() {
        let cfg = ScenarioConfig::from_toml("[sweep]\nnum_aps = [10, 20]\nbits = [1, 2, 3]\n").unwrap();
        let pts = cfg.points().unwrap();
        let got: Vec<(usize, u32)> = pts.iter().map(|p| (p.params.num_aps, p.params.bits)).collect();
        assert_eq!(got, vec![(10, 1), (10, 2), (10, 3), (20, 1), (20, 2), (20, 3)]);
    }
}
