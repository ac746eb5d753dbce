//! Scenario runner: evaluates every (sweep point, seed) pair and writes
//! CSV tables plus a JSON manifest.
//!
//! Output files in `out_dir`:
//!
//! | file | content |
//! |------|---------|
//! | `results.csv` | one row per (point, seed) |
//! | `summary.csv` | means over seeds per point |
//! | `convergence.csv` | outer-iteration E_e trace of the chosen budget |
//! | `trace.csv` | SCA-level trace (`debug_trace` only) |
//! | `validation.csv`, `validation_stats.csv` | validate mode |
//! | `table1.csv` | table1 mode |
//! | `timings.csv` | wall-clock runtimes, kept apart so the rest is reproducible |
//! | `manifest.json` | resolved config, its hash and the hash of every table |
//!
//! E_e is reported in Mbit/Joule, SE in bit/s/Hz and power in Watt.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, Mode, ScenarioConfig, SweepPoint};
use crate::montecarlo::{compare, simulate_terms, McOptions};
use crate::network::generate_network;
use crate::optimizer::{equal_power_baseline, maximize_ee, OptError, OptOptions};
use crate::params::SystemParams;
use crate::performance::PerformanceModel;
use crate::quantizer::optimize_step_size;
use crate::rng::{stream, Domain};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub point: usize,
    pub seed: u64,
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    pub num_users: usize,
    pub pilot_len: usize,
    pub bits: u32,
    pub p_bt_w: f64,
    pub backhaul_capacity_bps: f64,
    pub area_km: f64,
    /// `ok`, `infeasible` or `error`.
    pub status: String,
    pub ee_proposed_mbit_per_j: f64,
    pub ee_baseline_mbit_per_j: f64,
    pub sum_se_proposed_bit_per_s_hz: f64,
    pub sum_se_baseline_bit_per_s_hz: f64,
    pub total_power_proposed_w: f64,
    pub total_power_baseline_w: f64,
    pub nu: f64,
    pub nu_star: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    /// Semicolon-separated per-user SE of the proposed solution.
    pub se_per_user_bit_per_s_hz: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub schema_version: u32,
    pub point: usize,
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    pub num_users: usize,
    pub bits: u32,
    pub p_bt_w: f64,
    pub backhaul_capacity_bps: f64,
    pub area_km: f64,
    pub n_seeds: usize,
    pub n_ok: usize,
    pub ee_proposed_mbit_per_j: f64,
    pub ee_baseline_mbit_per_j: f64,
    pub sum_se_proposed_bit_per_s_hz: f64,
    pub sum_se_baseline_bit_per_s_hz: f64,
    /// Ratio of the two mean E_e columns.
    pub ee_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub schema_version: u32,
    pub point: usize,
    pub seed: u64,
    pub nu: f64,
    pub iteration: usize,
    pub ee_mbit_per_j: f64,
    pub sum_se_bit_per_s_hz: f64,
    pub sca_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub schema_version: u32,
    pub point: usize,
    pub seed: u64,
    pub nu: f64,
    pub outer: usize,
    /// -1 marks the end-of-outer-iteration record, whose objective is E_e in
    /// bit/J; SCA rows carry Π(1 + SINR_k).
    pub sca_iter: i64,
    pub objective: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub schema_version: u32,
    pub point: usize,
    pub seed: u64,
    pub user: usize,
    pub term: String,
    pub closed_form: f64,
    pub empirical: f64,
    pub rel_err: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationStatsRow {
    pub schema_version: u32,
    pub point: usize,
    pub seed: u64,
    pub n_draws: usize,
    pub z_kurtosis: f64,
    pub max_term_corr_se: f64,
    pub max_mmse_corr_se: f64,
    pub max_rel_err_z_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub schema_version: u32,
    pub bits: u32,
    pub step: f64,
    pub distortion: f64,
    pub gain: f64,
    pub power_ratio: f64,
    pub sdnr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct TimingRow {
    point: usize,
    seed: u64,
    runtime_s: f64,
}

/// Everything computed for one (point, seed) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub row: ResultRow,
    pub convergence: Vec<ConvergenceRow>,
    pub trace: Vec<TraceRow>,
}

fn base_row(point: &SweepPoint, seed: u64) -> ResultRow {
    let p = &point.params;
    ResultRow {
        schema_version: SCHEMA_VERSION,
        point: point.index,
        seed,
        num_aps: p.num_aps,
        antennas_per_ap: p.antennas_per_ap,
        num_users: p.num_users,
        pilot_len: p.pilot_len,
        bits: p.bits,
        p_bt_w: p.p_bt_w,
        backhaul_capacity_bps: p.backhaul_capacity_bps,
        area_km: p.area_km,
        status: "ok".into(),
        ee_proposed_mbit_per_j: f64::NAN,
        ee_baseline_mbit_per_j: f64::NAN,
        sum_se_proposed_bit_per_s_hz: f64::NAN,
        sum_se_baseline_bit_per_s_hz: f64::NAN,
        total_power_proposed_w: f64::NAN,
        total_power_baseline_w: f64::NAN,
        nu: f64::NAN,
        nu_star: f64::NAN,
        outer_iterations: 0,
        converged: false,
        se_per_user_bit_per_s_hz: String::new(),
        message: String::new(),
    }
}

/// Optimizes (unless `baseline_only`) and evaluates the equal-power
/// reference for one network realization.
pub fn evaluate_point(point: &SweepPoint, seed: u64, baseline_only: bool, opts: &OptOptions) -> PointOutcome {
    let p = &point.params;
    let stats = generate_network(p, seed);
    let model = PerformanceModel::new(p, &stats, optimize_step_size(p.bits));
    let mut row = base_row(point, seed);
    let mut convergence = Vec::new();
    let mut trace = Vec::new();

    match equal_power_baseline(&model) {
        Ok(b) => {
            row.ee_baseline_mbit_per_j = b.ee * 1e-6;
            row.sum_se_baseline_bit_per_s_hz = b.sum_se;
            row.total_power_baseline_w = b.power.total_w;
            if baseline_only {
                row.se_per_user_bit_per_s_hz = join(&b.se);
            }
        }
        Err(e) => {
            row.status = "error".into();
            row.message = e.to_string();
        }
    }
    if baseline_only || row.status != "ok" {
        return PointOutcome { row, convergence, trace };
    }

    match maximize_ee(&model, opts) {
        Ok(r) => {
            let best = r.best_run();
            let st = &best.state;
            row.ee_proposed_mbit_per_j = st.ee * 1e-6;
            row.sum_se_proposed_bit_per_s_hz = st.sum_se;
            row.total_power_proposed_w = st.power.total_w;
            row.nu = best.nu;
            row.nu_star = r.nu_star;
            row.outer_iterations = best.trace.len();
            row.converged = best.converged;
            row.se_per_user_bit_per_s_hz = join(&st.se);
            convergence = best
                .trace
                .iter()
                .map(|t| ConvergenceRow {
                    schema_version: SCHEMA_VERSION,
                    point: point.index,
                    seed,
                    nu: best.nu,
                    iteration: t.iteration,
                    ee_mbit_per_j: t.ee * 1e-6,
                    sum_se_bit_per_s_hz: t.sum_se,
                    sca_iterations: t.sca_iterations,
                })
                .collect();
            trace = best
                .debug
                .iter()
                .map(|t| TraceRow {
                    schema_version: SCHEMA_VERSION,
                    point: point.index,
                    seed,
                    nu: best.nu,
                    outer: t.outer,
                    sca_iter: if t.sca_iter == usize::MAX { -1 } else { t.sca_iter as i64 },
                    objective: t.objective,
                    residual: t.residual,
                })
                .collect();
        }
        Err(OptError::Infeasible { users }) => {
            row.status = "infeasible".into();
            row.message = format!("SE targets unreachable for users {users:?}");
        }
        Err(e) => {
            row.status = "error".into();
            row.message = e.to_string();
        }
    }
    PointOutcome { row, convergence, trace }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Random powers in `[0.1, 1]·p_max` and unit-norm nonnegative filters.
pub fn random_operating_point(params: &SystemParams, seed: u64) -> (Vec<f64>, DMatrix<f64>) {
    let mut rng = stream(seed, Domain::Instance, 0);
    let q: Vec<f64> = params.p_max.iter().map(|pm| pm * rng.random_range(0.1..1.0)).collect();
    let mut u = DMatrix::from_fn(params.num_aps, params.num_users, |_, _| rng.random_range(0.0..1.0));
    for mut c in u.column_iter_mut() {
        let n = c.norm();
        c /= n;
    }
    (q, u)
}

/// Means over the seeds with status `ok`.
pub fn summarize(points: &[SweepPoint], rows: &[ResultRow], n_seeds: usize) -> Vec<SummaryRow> {
    points
        .iter()
        .map(|pt| {
            let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.point == pt.index && r.status == "ok").collect();
            let mean = |f: fn(&ResultRow) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            let prop = mean(|r| r.ee_proposed_mbit_per_j);
            let base = mean(|r| r.ee_baseline_mbit_per_j);
            let p = &pt.params;
            SummaryRow {
                schema_version: SCHEMA_VERSION,
                point: pt.index,
                num_aps: p.num_aps,
                antennas_per_ap: p.antennas_per_ap,
                num_users: p.num_users,
                bits: p.bits,
                p_bt_w: p.p_bt_w,
                backhaul_capacity_bps: p.backhaul_capacity_bps,
                area_km: p.area_km,
                n_seeds,
                n_ok: ok.len(),
                ee_proposed_mbit_per_j: prop,
                ee_baseline_mbit_per_j: base,
                sum_se_proposed_bit_per_s_hz: mean(|r| r.sum_se_proposed_bit_per_s_hz),
                sum_se_baseline_bit_per_s_hz: mean(|r| r.sum_se_baseline_bit_per_s_hz),
                ee_ratio: prop / base,
            }
        })
        .collect()
}

pub fn table1_rows() -> Vec<Table1Row> {
    (1..=7)
        .map(|b| {
            let s = optimize_step_size(b);
            Table1Row {
                schema_version: SCHEMA_VERSION,
                bits: b,
                step: s.step,
                distortion: s.distortion,
                gain: s.gain,
                power_ratio: s.power_ratio,
                sdnr_db: 10.0 * s.sdnr().log10(),
            }
        })
        .collect()
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub rows_ok: usize,
}

impl RunReport {
    /// True when rows were produced and none of them succeeded.
    pub fn infeasible_everywhere(&self) -> bool {
        self.rows > 0 && self.rows_ok == 0
    }
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<(String, String, usize)>,
}

impl Writer<'_> {
    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T], hashed: bool) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        fs::write(self.dir.join(name), &bytes)?;
        let hash = if hashed { hex(&Sha256::digest(&bytes)) } else { String::new() };
        self.files.push((name.to_string(), hash, rows.len()));
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the canonical TOML form of the resolved configuration.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    hex(&Sha256::digest(cfg.to_toml().as_bytes()))
}

#[derive(Serialize)]
struct FileEntry<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "str::is_empty")]
    sha256: &'a str,
    rows: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool_version: &'a str,
    mode: Mode,
    config_sha256: String,
    config: &'a ScenarioConfig,
    files: Vec<FileEntry<'a>>,
}

/// Runs the scenario and writes all outputs to `cfg.out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let dir = cfg.out_dir.as_path();
    fs::create_dir_all(dir)?;
    let mut w = Writer { dir, files: Vec::new() };
    let rows_total;
    let rows_ok;

    let points = cfg.points()?;
    let tasks: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|i| (0..cfg.n_seeds as u64).map(move |s| (i, cfg.seed + s)))
        .collect();

    match cfg.mode {
        Mode::Table1 => {
            let rows = table1_rows();
            rows_total = rows.len();
            rows_ok = rows.len();
            w.csv("table1.csv", &rows, true)?;
        }
        Mode::Validate => {
            let results: Vec<(Vec<ValidationRow>, ValidationStatsRow, TimingRow)> = tasks
                .par_iter()
                .map(|&(i, seed)| validate_point(&points[i], seed, cfg))
                .collect();
            let mut rows = Vec::new();
            let mut stats = Vec::new();
            let mut times = Vec::new();
            for (r, s, t) in results {
                rows.extend(r);
                stats.push(s);
                times.push(t);
            }
            rows_total = stats.len();
            rows_ok = stats.len();
            w.csv("validation.csv", &rows, true)?;
            w.csv("validation_stats.csv", &stats, true)?;
            w.csv("timings.csv", &times, false)?;
        }
        Mode::Optimize | Mode::Baseline | Mode::Sweep => {
            let opts = OptOptions { nu_points: cfg.nu_points, debug_trace: cfg.debug_trace, ..OptOptions::default() };
            let baseline_only = cfg.mode == Mode::Baseline;
            let results: Vec<(PointOutcome, TimingRow)> = tasks
                .par_iter()
                .map(|&(i, seed)| {
                    let start = Instant::now();
                    let out = evaluate_point(&points[i], seed, baseline_only, &opts);
                    let t = TimingRow { point: i, seed, runtime_s: start.elapsed().as_secs_f64() };
                    (out, t)
                })
                .collect();
            let mut rows = Vec::new();
            let mut conv = Vec::new();
            let mut trace = Vec::new();
            let mut times = Vec::new();
            for (o, t) in results {
                rows.push(o.row);
                conv.extend(o.convergence);
                trace.extend(o.trace);
                times.push(t);
            }
            rows_total = rows.len();
            rows_ok = rows.iter().filter(|r| r.status == "ok").count();
            let summary = summarize(&points, &rows, cfg.n_seeds);
            w.csv("results.csv", &rows, true)?;
            w.csv("summary.csv", &summary, true)?;
            if !baseline_only {
                w.csv("convergence.csv", &conv, true)?;
            }
            if cfg.debug_trace {
                w.csv("trace.csv", &trace, true)?;
            }
            w.csv("timings.csv", &times, false)?;
        }
    }

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        mode: cfg.mode,
        config_sha256: config_hash(cfg),
        config: cfg,
        files: w
            .files
            .iter()
            .map(|(n, h, r)| FileEntry { name: n, sha256: h, rows: *r })
            .collect(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    let mut files: Vec<PathBuf> = w.files.iter().map(|(n, _, _)| dir.join(n)).collect();
    files.push(dir.join("manifest.json"));
    Ok(RunReport { out_dir: dir.to_path_buf(), files, rows: rows_total, rows_ok })
}

fn validate_point(
    point: &SweepPoint,
    seed: u64,
    cfg: &ScenarioConfig,
) -> (Vec<ValidationRow>, ValidationStatsRow, TimingRow) {
    let start = Instant::now();
    let p = &point.params;
    let stats = generate_network(p, seed);
    let model = PerformanceModel::new(p, &stats, optimize_step_size(p.bits));
    let (q, u) = random_operating_point(p, seed);
    let opts = McOptions { agc: cfg.agc, ..McOptions::new(cfg.n_draws, seed) };
    let report = simulate_terms(&model, &q, &u, &opts);
    let rows = compare(&model, &q, &u, &report)
        .into_iter()
        .map(|r| ValidationRow {
            schema_version: SCHEMA_VERSION,
            point: point.index,
            seed,
            user: r.user,
            term: r.term,
            closed_form: r.closed_form,
            empirical: r.empirical,
            rel_err: r.rel_err,
            std_err: r.std_err,
        })
        .collect();
    let exact = crate::montecarlo::input_variance_exact(&model, &q, true);
    let z_err = report
        .z_power
        .iter()
        .zip(exact.iter())
        .map(|(e, x)| (e - x).abs() / x)
        .fold(0.0, f64::max);
    let st = ValidationStatsRow {
        schema_version: SCHEMA_VERSION,
        point: point.index,
        seed,
        n_draws: report.n_draws,
        z_kurtosis: report.kurtosis,
        max_term_corr_se: report.max_term_corr,
        max_mmse_corr_se: report.max_mmse_corr,
        max_rel_err_z_power: z_err,
    };
    let t = TimingRow { point: point.index, seed, runtime_s: start.elapsed().as_secs_f64() };
    (rows, st, t)
}
