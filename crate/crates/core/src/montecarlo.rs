//! Monte-Carlo validation of the closed-form SINR terms.
//!
//! Each draw generates small-scale fading, pilot and data noise, performs
//! MMSE estimation and per-AP matched filtering, quantizes `z_mk = ĝ_mk^H y_m`
//! and splits the CPU output of every user into desired signal, beamforming
//! uncertainty, interference, noise and quantization distortion.
//! Draws are processed in fixed-size chunks with one RNG stream per chunk,
//! so results do not depend on the thread count.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::performance::{PerformanceModel, TermPowers};
use crate::quantizer::{quantize_complex, QuantizerSpec};
use crate::rng::{stream, Domain};

type C64 = Complex<f64>;

const CHUNK: usize = 500;

/// Variance used to scale each quantizer input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgcVariance {
    /// Exact second moment of `ĝ_mk^H y_m` under the channel model.
    Exact,
    /// `N[ρ(2β − γ)Σ q β + γ]`, the linearized expression.
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub n_draws: usize,
    pub seed: u64,
    pub agc: AgcVariance,
    /// Adds receiver noise to the data signal.
    pub noise: bool,
}

impl McOptions {
    pub fn new(n_draws: usize, seed: u64) -> Self {
        Self { n_draws, seed, agc: AgcVariance::Exact, noise: true }
    }
}

/// Sample estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserTerms {
    pub ds: Estimate,
    pub bu: Estimate,
    /// Per interferer; the own entry is zero.
    pub iui: Vec<Estimate>,
    pub tn: Estimate,
    pub tqe: Estimate,
    /// `E Σ_m u_mk² |h(z_mk) − ã z_mk|²`, the distortion power without
    /// cross-AP correlation.
    pub tqe_incoherent: Estimate,
}

impl UserTerms {
    pub fn iui_total(&self) -> f64 {
        self.iui.iter().map(|e| e.value).sum()
    }

    /// `|DS|² / (BU + ΣIUI + TN + TQE/ã²)`.
    pub fn sinr(&self, gain: f64) -> f64 {
        self.ds.value / (self.bu.value + self.iui_total() + self.tn.value + self.tqe.value / (gain * gain))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermReport {
    pub n_draws: usize,
    pub users: Vec<UserTerms>,
    /// Empirical `E|z_mk|²`.
    pub z_power: DMatrix<f64>,
    pub z_power_se: DMatrix<f64>,
    /// Variance used by the AGC.
    pub z_power_agc: DMatrix<f64>,
    /// Mean kurtosis of Re z_mk over all links; 3 for Gaussian input.
    pub kurtosis: f64,
    /// Empirical per-antenna `E|ĝ_mk|²`.
    pub gamma_hat: DMatrix<f64>,
    pub gamma_hat_se: DMatrix<f64>,
    /// Largest pairwise term correlation, in standard errors of zero.
    pub max_term_corr: f64,
    /// Largest |corr(ĝ, g − ĝ)| over links, in standard errors of zero.
    pub max_mmse_corr: f64,
}

impl TermReport {
    pub fn sinr(&self, gain: f64) -> Vec<f64> {
        self.users.iter().map(|u| u.sinr(gain)).collect()
    }
}

/// Exact `E|ĝ_mk^H y_m|²`:
/// `N[ρ(γ_mk Σ q β_mk' + N Σ q G_kk' (γ_mk β_mk'/β_mk)²) + γ_mk]`.
pub fn input_variance_exact(model: &PerformanceModel, q: &[f64], noise: bool) -> DMatrix<f64> {
    let (p, s) = (model.params, model.stats);
    let n = p.antennas_per_ap as f64;
    DMatrix::from_fn(s.num_aps(), s.num_users(), |m, k| {
        let (b, g) = (s.beta[(m, k)], s.gamma[(m, k)]);
        let mut sig = 0.0;
        for j in 0..s.num_users() {
            let bj = s.beta[(m, j)];
            sig += q[j] * (g * bj + n * s.pilot_gram[(k, j)] * (g * bj / b).powi(2));
        }
        n * (p.rho * sig + if noise { g } else { 0.0 })
    })
}

/// `N[ρ(2β_mk − γ_mk)Σ q β_mk' + γ_mk]`.
pub fn input_variance_linearized(model: &PerformanceModel, q: &[f64], noise: bool) -> DMatrix<f64> {
    let (p, s) = (model.params, model.stats);
    let n = p.antennas_per_ap as f64;
    DMatrix::from_fn(s.num_aps(), s.num_users(), |m, k| {
        let (b, g) = (s.beta[(m, k)], s.gamma[(m, k)]);
        let load: f64 = (0..s.num_users()).map(|j| q[j] * s.beta[(m, j)]).sum();
        n * (p.rho * (2.0 * b - g) * load + if noise { g } else { 0.0 })
    })
}

/// Sufficient statistics; all fields are plain sums so chunks merge by
/// addition.
#[derive(Debug, Clone)]
struct Acc {
    draws: f64,
    // per user
    a: Vec<C64>,
    a2: Vec<f64>,
    bu2: Vec<f64>,
    bu4: Vec<f64>,
    tn2: Vec<f64>,
    tn4: Vec<f64>,
    tqe2: Vec<f64>,
    tqe4: Vec<f64>,
    tqd2: Vec<f64>,
    tqd4: Vec<f64>,
    // per (user, interferer), row-major K×K
    iui2: Vec<f64>,
    iui4: Vec<f64>,
    // per user, 5 term powers and 10 cross moments
    xp: Vec<f64>,
    xc: Vec<C64>,
    // per link, column-major M×K
    z2: Vec<f64>,
    z4: Vec<f64>,
    zr2: Vec<f64>,
    zr4: Vec<f64>,
    gh2: Vec<f64>,
    gh4: Vec<f64>,
    ee2: Vec<f64>,
    ge: Vec<C64>,
}

const PAIRS: [(usize, usize); 10] = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

impl Acc {
    fn new(m: usize, k: usize) -> Self {
        let zk = || vec![0.0; k];
        let zl = || vec![0.0; m * k];
        Self {
            draws: 0.0,
            a: vec![C64::default(); k],
            a2: zk(),
            bu2: zk(),
            bu4: zk(),
            tn2: zk(),
            tn4: zk(),
            tqe2: zk(),
            tqe4: zk(),
            tqd2: zk(),
            tqd4: zk(),
            iui2: vec![0.0; k * k],
            iui4: vec![0.0; k * k],
            xp: vec![0.0; 5 * k],
            xc: vec![C64::default(); 10 * k],
            z2: zl(),
            z4: zl(),
            zr2: zl(),
            zr4: zl(),
            gh2: zl(),
            gh4: zl(),
            ee2: zl(),
            ge: vec![C64::default(); m * k],
        }
    }

    fn merge(&mut self, o: &Acc) {
        fn add(a: &mut [f64], b: &[f64]) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        fn addc(a: &mut [C64], b: &[C64]) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.draws += o.draws;
        addc(&mut self.a, &o.a);
        add(&mut self.a2, &o.a2);
        add(&mut self.bu2, &o.bu2);
        add(&mut self.bu4, &o.bu4);
        add(&mut self.tn2, &o.tn2);
        add(&mut self.tn4, &o.tn4);
        add(&mut self.tqe2, &o.tqe2);
        add(&mut self.tqe4, &o.tqe4);
        add(&mut self.tqd2, &o.tqd2);
        add(&mut self.tqd4, &o.tqd4);
        add(&mut self.iui2, &o.iui2);
        add(&mut self.iui4, &o.iui4);
        add(&mut self.xp, &o.xp);
        addc(&mut self.xc, &o.xc);
        add(&mut self.z2, &o.z2);
        add(&mut self.z4, &o.z4);
        add(&mut self.zr2, &o.zr2);
        add(&mut self.zr4, &o.zr4);
        add(&mut self.gh2, &o.gh2);
        add(&mut self.gh4, &o.gh4);
        add(&mut self.ee2, &o.ee2);
        addc(&mut self.ge, &o.ge);
    }
}

fn cn(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

struct Setup<'a> {
    model: &'a PerformanceModel<'a>,
    q: &'a [f64],
    u: &'a DMatrix<f64>,
    sigma: DMatrix<f64>,
    spec: QuantizerSpec,
    noise: bool,
    mean_a: Vec<f64>,
}

fn run_chunk(st: &Setup, draws: usize, rng: &mut ChaCha8Rng) -> Acc {
    let (p, s) = (st.model.params, st.model.stats);
    let (mm, kk, n) = (s.num_aps(), s.num_users(), p.antennas_per_ap);
    let npil = s.pilot_index.iter().copied().max().map_or(0, |x| x + 1);
    let sq_tp = (p.pilot_len as f64 * p.pilot_snr).sqrt();
    let sq_rho = p.rho.sqrt();
    let gain = st.spec.gain;
    let mut acc = Acc::new(mm, kk);

    // link (m, k) occupies [(m*kk + k)*n ..][..n]
    let mut g = vec![C64::default(); mm * kk * n];
    let mut gh = vec![C64::default(); mm * kk * n];
    let mut w = vec![C64::default(); mm * npil * n];
    let mut y = vec![C64::default(); mm * n];
    let mut noise = vec![C64::default(); mm * n];
    let mut sym = vec![C64::default(); kk];
    let mut a = vec![C64::default(); kk];
    let mut b = vec![C64::default(); kk * kk];
    let mut tn = vec![C64::default(); kk];
    let mut tqe = vec![C64::default(); kk];
    let mut tqd = vec![0.0; kk];

    for _ in 0..draws {
        for m in 0..mm {
            for k in 0..kk {
                let sb = s.beta[(m, k)].sqrt();
                for i in 0..n {
                    g[(m * kk + k) * n + i] = cn(rng) * sb;
                }
            }
        }
        w.iter_mut().for_each(|x| *x = cn(rng));
        sym.iter_mut().for_each(|x| *x = cn(rng));
        if st.noise {
            noise.iter_mut().for_each(|x| *x = cn(rng));
        }
        for m in 0..mm {
            for k in 0..kk {
                let c = s.c[(m, k)];
                let pk = s.pilot_index[k];
                for i in 0..n {
                    let mut rx = w[(m * npil + pk) * n + i];
                    for j in 0..kk {
                        if s.pilot_index[j] == pk {
                            rx += g[(m * kk + j) * n + i] * sq_tp;
                        }
                    }
                    gh[(m * kk + k) * n + i] = rx * c;
                }
            }
            for i in 0..n {
                let mut v = noise[m * n + i];
                for j in 0..kk {
                    v += g[(m * kk + j) * n + i] * (sq_rho * st.q[j].sqrt()) * sym[j];
                }
                y[m * n + i] = v;
            }
        }

        a.iter_mut().for_each(|x| *x = C64::default());
        b.iter_mut().for_each(|x| *x = C64::default());
        tn.iter_mut().for_each(|x| *x = C64::default());
        tqe.iter_mut().for_each(|x| *x = C64::default());
        tqd.iter_mut().for_each(|x| *x = 0.0);
        for m in 0..mm {
            let ym = &y[m * n..(m + 1) * n];
            let nm = &noise[m * n..(m + 1) * n];
            for k in 0..kk {
                let l = m * kk + k;
                let link = m + k * mm;
                let ghk = &gh[l * n..(l + 1) * n];
                let gk = &g[l * n..(l + 1) * n];
                let umk = st.u[(m, k)];
                for j in 0..kk {
                    let gj = &g[(m * kk + j) * n..(m * kk + j + 1) * n];
                    b[k * kk + j] += dot(ghk, gj) * umk;
                }
                a[k] = b[k * kk + k];
                tn[k] += dot(ghk, nm) * umk;

                let z = dot(ghk, ym);
                let sig = st.sigma[(m, k)];
                let hz = if st.spec.is_ideal() {
                    z
                } else if sig > 0.0 {
                    quantize_complex(z, sig, &st.spec).expect("positive sigma")
                } else {
                    C64::default()
                };
                let e = hz - z * gain;
                tqe[k] += e * umk;
                tqd[k] += e.norm_sqr() * umk * umk;

                let z2 = z.norm_sqr();
                acc.z2[link] += z2;
                acc.z4[link] += z2 * z2;
                acc.zr2[link] += z.re * z.re;
                acc.zr4[link] += z.re.powi(4);
                for i in 0..n {
                    let h2 = ghk[i].norm_sqr();
                    let e = gk[i] - ghk[i];
                    acc.gh2[link] += h2;
                    acc.gh4[link] += h2 * h2;
                    acc.ee2[link] += e.norm_sqr();
                    acc.ge[link] += ghk[i] * e.conj();
                }
            }
        }

        acc.draws += 1.0;
        for k in 0..kk {
            let ak = a[k];
            let dev = ak - st.mean_a[k];
            acc.a[k] += ak;
            acc.a2[k] += ak.norm_sqr();
            acc.bu2[k] += dev.norm_sqr();
            acc.bu4[k] += dev.norm_sqr().powi(2);
            acc.tn2[k] += tn[k].norm_sqr();
            acc.tn4[k] += tn[k].norm_sqr().powi(2);
            acc.tqe2[k] += tqe[k].norm_sqr();
            acc.tqe4[k] += tqe[k].norm_sqr().powi(2);
            acc.tqd2[k] += tqd[k];
            acc.tqd4[k] += tqd[k] * tqd[k];
            let mut iui_sig = C64::default();
            for j in 0..kk {
                if j != k {
                    let v = b[k * kk + j].norm_sqr();
                    acc.iui2[k * kk + j] += v;
                    acc.iui4[k * kk + j] += v * v;
                    iui_sig += b[k * kk + j] * (sq_rho * st.q[j].sqrt()) * sym[j];
                }
            }
            let amp = sq_rho * st.q[k].sqrt();
            let x = [
                C64::from(st.mean_a[k] * amp) * sym[k],
                dev * amp * sym[k],
                iui_sig,
                tn[k],
                tqe[k],
            ];
            for (i, xi) in x.iter().enumerate() {
                acc.xp[5 * k + i] += xi.norm_sqr();
            }
            for (pi, &(i, j)) in PAIRS.iter().enumerate() {
                acc.xc[10 * k + pi] += x[i] * x[j].conj();
            }
        }
    }
    acc
}

/// Mean and standard error of a nonnegative quantity from its first two
/// power sums.
fn moment(s2: f64, s4: f64, n: f64) -> Estimate {
    let mean = s2 / n;
    let var = (s4 / n - mean * mean).max(0.0);
    Estimate { value: mean, std_err: (var / n).sqrt() }
}

/// Simulates `opts.n_draws` realizations and estimates every term of the
/// SINR decomposition for powers `q` and filters `u` (column k for user k).
pub fn simulate_terms(model: &PerformanceModel, q: &[f64], u: &DMatrix<f64>, opts: &McOptions) -> TermReport {
    let (p, s) = (model.params, model.stats);
    let (mm, kk) = (s.num_aps(), s.num_users());
    let n = p.antennas_per_ap as f64;
    let var = match opts.agc {
        AgcVariance::Exact => input_variance_exact(model, q, opts.noise),
        AgcVariance::Linearized => input_variance_linearized(model, q, opts.noise),
    };
    let mean_a = (0..kk).map(|k| n * (0..mm).map(|m| u[(m, k)] * s.gamma[(m, k)]).sum::<f64>()).collect();
    let setup = Setup {
        model,
        q,
        u,
        sigma: var.map(|v| v.max(0.0).sqrt()),
        spec: model.spec,
        noise: opts.noise,
        mean_a,
    };

    let chunks = opts.n_draws.div_ceil(CHUNK);
    let parts: Vec<Acc> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let draws = CHUNK.min(opts.n_draws - c * CHUNK);
            let mut rng = stream(opts.seed, Domain::MonteCarlo, c as u64);
            run_chunk(&setup, draws, &mut rng)
        })
        .collect();
    let mut acc = Acc::new(mm, kk);
    for part in &parts {
        acc.merge(part);
    }
    summarize(&acc, &setup, var)
}

fn summarize(acc: &Acc, st: &Setup, agc: DMatrix<f64>) -> TermReport {
    let (p, s) = (st.model.params, st.model.stats);
    let (mm, kk) = (s.num_aps(), s.num_users());
    let n = acc.draws;
    let ant = p.antennas_per_ap as f64;

    let users = (0..kk)
        .map(|k| {
            let scale = p.rho * st.q[k];
            let mean = acc.a[k] / n;
            let var_a = (acc.a2[k] / n - mean.norm_sqr()).max(0.0);
            let ds = Estimate {
                value: scale * mean.norm_sqr(),
                std_err: 2.0 * scale * mean.norm() * (var_a / (2.0 * n)).sqrt(),
            };
            let bu_m = moment(acc.bu2[k], acc.bu4[k], n);
            let bu = Estimate { value: scale * var_a, std_err: scale * bu_m.std_err };
            let iui = (0..kk)
                .map(|j| {
                    if j == k {
                        return Estimate::default();
                    }
                    let e = moment(acc.iui2[k * kk + j], acc.iui4[k * kk + j], n);
                    let sc = p.rho * st.q[j];
                    Estimate { value: sc * e.value, std_err: sc * e.std_err }
                })
                .collect();
            UserTerms {
                ds,
                bu,
                iui,
                tn: moment(acc.tn2[k], acc.tn4[k], n),
                tqe: moment(acc.tqe2[k], acc.tqe4[k], n),
                tqe_incoherent: moment(acc.tqd2[k], acc.tqd4[k], n),
            }
        })
        .collect();

    let mut max_term_corr: f64 = 0.0;
    for k in 0..kk {
        for (pi, &(i, j)) in PAIRS.iter().enumerate() {
            let (pa, pb) = (acc.xp[5 * k + i] / n, acc.xp[5 * k + j] / n);
            if pa > 0.0 && pb > 0.0 {
                let r = (acc.xc[10 * k + pi] / n).norm() / (pa * pb).sqrt();
                max_term_corr = max_term_corr.max(r * n.sqrt());
            }
        }
    }

    let link = |v: &[f64]| DMatrix::from_column_slice(mm, kk, v);
    let z = link(&acc.z2.iter().map(|x| x / n).collect::<Vec<_>>());
    let z_se = DMatrix::from_fn(mm, kk, |m, k| moment(acc.z2[m + k * mm], acc.z4[m + k * mm], n).std_err);
    let na = n * ant;
    let gamma_hat = link(&acc.gh2.iter().map(|x| x / na).collect::<Vec<_>>());
    let gamma_hat_se = DMatrix::from_fn(mm, kk, |m, k| moment(acc.gh2[m + k * mm], acc.gh4[m + k * mm], na).std_err);

    let mut kurt_sum = 0.0;
    let mut kurt_n = 0.0;
    let mut max_mmse_corr: f64 = 0.0;
    for l in 0..mm * kk {
        let m2 = acc.zr2[l] / n;
        if m2 > 0.0 {
            kurt_sum += (acc.zr4[l] / n) / (m2 * m2);
            kurt_n += 1.0;
        }
        let (pg, pe) = (acc.gh2[l] / na, acc.ee2[l] / na);
        if pg > 0.0 && pe > 0.0 {
            let r = (acc.ge[l] / na).norm() / (pg * pe).sqrt();
            max_mmse_corr = max_mmse_corr.max(r * na.sqrt());
        }
    }

    TermReport {
        n_draws: n as usize,
        users,
        z_power: z,
        z_power_se: z_se,
        z_power_agc: agc,
        kurtosis: if kurt_n > 0.0 { kurt_sum / kurt_n } else { f64::NAN },
        gamma_hat,
        gamma_hat_se,
        max_term_corr,
        max_mmse_corr,
    }
}

/// Per-user SINR assembled from the simulated terms.
pub fn empirical_sinr(model: &PerformanceModel, q: &[f64], u: &DMatrix<f64>, opts: &McOptions) -> Vec<f64> {
    simulate_terms(model, q, u, opts).sinr(model.spec.gain)
}

/// One line of a validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub user: usize,
    pub term: String,
    pub closed_form: f64,
    pub empirical: f64,
    pub rel_err: f64,
    pub std_err: f64,
}

fn row(user: usize, term: impl Into<String>, closed: f64, emp: Estimate) -> ComparisonRow {
    let rel_err = if emp.value != 0.0 {
        (closed - emp.value).abs() / emp.value.abs()
    } else if closed == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    ComparisonRow { user, term: term.into(), closed_form: closed, empirical: emp.value, rel_err, std_err: emp.std_err }
}

/// Compares every simulated term with its closed form, plus the SINR.
pub fn compare(model: &PerformanceModel, q: &[f64], u: &DMatrix<f64>, report: &TermReport) -> Vec<ComparisonRow> {
    let gain = model.spec.gain;
    let mut rows = Vec::new();
    for (k, t) in report.users.iter().enumerate() {
        let cf: TermPowers = model.closed_form_terms(k, q, u.column(k).as_slice());
        rows.push(row(k, "ds", cf.ds, t.ds));
        rows.push(row(k, "bu", cf.bu, t.bu));
        for (j, e) in t.iui.iter().enumerate() {
            if j != k {
                rows.push(row(k, format!("iui_{j}"), cf.iui[j], *e));
            }
        }
        rows.push(row(k, "tn", cf.tn, t.tn));
        rows.push(row(k, "tqe", cf.tqe, t.tqe));
        let emp = Estimate { value: t.sinr(gain), std_err: f64::NAN };
        rows.push(row(k, "sinr", cf.sinr(gain), emp));
    }
    rows
}

/// Result of [`bussgang_orthogonality_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    /// Sample mean of `z h(z)` for unit-variance `z`.
    pub gain_estimate: f64,
    /// `E{z (h(z) − ã z)} / var(z)` with the gain under test.
    pub correlation: f64,
    /// `E{(h(z) − ã z)²} / var(z)`.
    pub distortion: f64,
}

/// Draws `n_draws` real Gaussian inputs with standard deviation `sigma` and
/// measures the correlation between the input and the distortion residual
/// `h(z) − gain·z`. `gain` defaults to the quantizer's ã.
pub fn bussgang_orthogonality_check(
    spec: &QuantizerSpec,
    n_draws: usize,
    sigma: f64,
    gain: Option<f64>,
    seed: u64,
) -> OrthogonalityReport {
    let gain = gain.unwrap_or(spec.gain);
    let chunks = n_draws.div_ceil(CHUNK * 20);
    let sums: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, Domain::Bussgang, c as u64);
            let draws = (CHUNK * 20).min(n_draws - c * CHUNK * 20);
            let mut s = [0.0; 4];
            for _ in 0..draws {
                let x: f64 = rng.sample(StandardNormal);
                let z = sigma * x;
                let h = sigma * spec.map_unit(x);
                let e = h - gain * z;
                s[0] += z * z;
                s[1] += z * h;
                s[2] += z * e;
                s[3] += e * e;
            }
            s
        })
        .collect();
    let mut t = [0.0; 4];
    for s in &sums {
        t.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }
    let var = t[0];
    OrthogonalityReport {
        gain_estimate: t[1] / var,
        correlation: t[2] / var,
        distortion: t[3] / var,
    }
}
