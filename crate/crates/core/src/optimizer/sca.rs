//! Successive convex approximation of `max Π(1 + SINR_k)` for fixed filters.
//!
//! Each step replaces `1 + t` by its best local monomial underestimator
//! `κ t^ξ` at the current SINR `t̂` (ξ = t̂/(1+t̂), κ = (1+t̂)/t̂^ξ) and solves
//! the resulting GP in `(q, t)` inside the trust region
//! `(1−δ)t̂ ≤ t ≤ (1+δ)t̂`.

use nalgebra::DMatrix;

use super::{OptError, OptOptions, TraceRecord};
use crate::gp::{solve, GpError, GpProblem, Monomial, Posynomial};
use crate::performance::{PerformanceModel, SinrCoefficients};

/// `(ξ, κ)` with `κ t^ξ ≤ 1 + t` for all `t > 0`, equality at `t̂`.
pub fn lemma1(t_hat: f64) -> (f64, f64) {
    let xi = t_hat / (1.0 + t_hat);
    (xi, (1.0 + t_hat) / t_hat.powf(xi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaIterate {
    pub t_hat: Vec<f64>,
    /// GP optimum of the slack SINRs.
    pub t: Vec<f64>,
    pub q: Vec<f64>,
    /// Π(1 + SINR_k(q)).
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaResult {
    pub q: Vec<f64>,
    /// Achieved SINRs at `q`.
    pub t: Vec<f64>,
    /// Π(1 + SINR_k) at the start and after every accepted step.
    pub trace: Vec<f64>,
    pub iterates: Vec<ScaIterate>,
    pub converged: bool,
}

/// Variables `q_k` (index k) and `t_k` (index K + k).
pub fn sca_problem(
    model: &PerformanceModel,
    coeffs: &SinrCoefficients,
    t_hat: &[f64],
    nu: f64,
    delta: f64,
) -> GpProblem {
    let p = model.params;
    let kk = p.num_users;
    let tv = |k: usize| kk + k;
    let mut gp = GpProblem::new(2 * kk);
    gp.minimize(Monomial::new(
        1.0,
        (0..kk).map(|k| (tv(k), -lemma1(t_hat[k]).0)),
    ));
    for k in 0..kk {
        let mut f = Posynomial::default();
        for j in 0..kk {
            let w = coeffs.a[(k, j)] + coeffs.b[(k, j)];
            if w == 0.0 {
                continue;
            }
            if j == k {
                f.push(Monomial::new(w, [(tv(k), 1.0)]));
            } else {
                f.push(Monomial::new(w, [(tv(k), 1.0), (j, 1.0), (k, -1.0)]));
            }
        }
        f.push(Monomial::new(coeffs.c[k], [(tv(k), 1.0), (k, -1.0)]));
        gp.le(f, format!("sinr_{k}"));
        if p.se_required[k] > 0.0 {
            let thr = p.sinr_threshold(p.se_required[k]);
            gp.le(Monomial::new(thr, [(tv(k), -1.0)]), format!("se_{k}"));
        }
    }
    let budget = nu * p.p_max.iter().sum::<f64>();
    gp.le((0..kk).map(|k| Monomial::var(k).scale(1.0 / budget)).collect::<Posynomial>(), "budget");
    for k in 0..kk {
        gp.bounds(k, 0.0, p.p_max[k]);
        gp.bounds(tv(k), (1.0 - delta) * t_hat[k], (1.0 + delta) * t_hat[k]);
    }
    gp
}

fn product(sinr: &[f64]) -> f64 {
    sinr.iter().map(|s| 1.0 + s).product()
}

/// Runs SCA from `q_init` with filters `u`. Fails only if the first GP is
/// infeasible or breaks down; later failures end the loop early.
pub fn sca_power_allocation(
    model: &PerformanceModel,
    u: &DMatrix<f64>,
    nu: f64,
    q_init: &[f64],
    opts: &OptOptions,
    debug: Option<(&mut Vec<TraceRecord>, usize)>,
) -> Result<ScaResult, OptError> {
    let kk = model.num_users();
    let coeffs = model.coefficients(u);
    let mut q = q_init.to_vec();
    let mut sinr = coeffs.sinr_all(&q);
    let mut trace = vec![product(&sinr)];
    let mut iterates = Vec::new();
    let mut converged = false;
    let mut records = debug;

    for it in 0..opts.sca_max_iter {
        if sinr.iter().any(|&s| !(s > 0.0)) {
            return Err(OptError::Gp(GpError::Invalid("SCA needs positive SINRs".into())));
        }
        let gp = sca_problem(model, &coeffs, &sinr, nu, opts.delta);
        let x0: Vec<f64> = q.iter().copied().chain(sinr.iter().map(|s| s * (1.0 - 1e-4))).collect();
        let sol = match solve(&gp, Some(&x0), opts.gp) {
            Ok(s) => s,
            Err(GpError::Infeasible { .. }) if it == 0 => {
                return Err(OptError::Infeasible { users: Vec::new() })
            }
            Err(e) if it == 0 => return Err(e.into()),
            Err(_) => break,
        };
        let q_new: Vec<f64> = sol.x[..kk].to_vec();
        let t_new: Vec<f64> = sol.x[kk..].to_vec();
        let sinr_new = coeffs.sinr_all(&q_new);
        let obj = product(&sinr_new);
        // Accept only non-decreasing steps; the GP gap allows tiny regressions.
        if obj < *trace.last().unwrap() * (1.0 - 1e-9) {
            break;
        }
        if let Some((rec, outer)) = records.as_mut() {
            rec.push(TraceRecord { outer: *outer, sca_iter: it, objective: obj, residual: gp.max_violation(&sol.x).max(0.0) });
        }
        let change = sinr_new.iter().zip(&sinr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        iterates.push(ScaIterate { t_hat: sinr.clone(), t: t_new, q: q_new.clone(), objective: obj });
        trace.push(obj);
        q = q_new;
        sinr = sinr_new;
        if change <= opts.sca_tol {
            converged = true;
            break;
        }
    }
    Ok(ScaResult { q, t: sinr, trace, iterates, converged })
}
