//! Alternating power allocation and filter design for a fixed budget ν.

use nalgebra::DMatrix;
use serde::Serialize;

use super::filters::design_filters;
use super::sca::sca_power_allocation;
use super::{OptError, OptOptions, TraceRecord};
use crate::performance::{PerformanceModel, SolutionState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterRecord {
    pub iteration: usize,
    /// bit/Joule
    pub ee: f64,
    /// Π(1 + SINR_k)
    pub surrogate: f64,
    pub sum_se: f64,
    pub sca_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alg1Result {
    pub nu: f64,
    pub state: SolutionState,
    pub trace: Vec<OuterRecord>,
    pub converged: bool,
    /// SCA restarted from the PMP point after an infeasible first step.
    pub restarted: bool,
    pub debug: Vec<TraceRecord>,
}

/// `q⁺ + λ(p_max − q⁺)` with λ chosen so the powers sum to `ν Σp_max`.
pub fn initial_powers(q_plus: &[f64], p_max: &[f64], nu: f64) -> Vec<f64> {
    let total: f64 = p_max.iter().sum();
    let base: f64 = q_plus.iter().sum();
    let room = total - base;
    let lambda = if room > 0.0 { ((nu * total - base) / room).clamp(0.0, 1.0) } else { 0.0 };
    q_plus.iter().zip(p_max).map(|(q, p)| q + lambda * (p - q)).collect()
}

pub fn algorithm1(
    model: &PerformanceModel,
    nu: f64,
    q_plus: &[f64],
    opts: &OptOptions,
) -> Result<Alg1Result, OptError> {
    let p = model.params;
    let mut debug = Vec::new();
    let mut q = initial_powers(q_plus, &p.p_max, nu);
    let mut u: DMatrix<f64> = design_filters(model, &q);
    let mut trace: Vec<OuterRecord> = Vec::new();
    let mut prev: Option<SolutionState> = None;
    let mut converged = false;
    let mut restarted = false;

    for outer in 0..opts.outer_max_iter {
        let dbg = opts.debug_trace.then_some((&mut debug, outer));
        let sca = match sca_power_allocation(model, &u, nu, &q, opts, dbg) {
            Ok(r) => r,
            Err(OptError::Infeasible { .. }) if outer == 0 && q_plus.iter().any(|&x| x > 0.0) => {
                restarted = true;
                q = q_plus.to_vec();
                u = design_filters(model, &q);
                let dbg = opts.debug_trace.then_some((&mut debug, outer));
                sca_power_allocation(model, &u, nu, &q, opts, dbg)?
            }
            Err(e) => return Err(e),
        };
        q = sca.q;
        u = design_filters(model, &q);
        let state = model.evaluate(&q, &u)?;
        let surrogate = state.sinr.iter().map(|s| 1.0 + s).product();
        trace.push(OuterRecord {
            iteration: outer,
            ee: state.ee,
            surrogate,
            sum_se: state.sum_se,
            sca_iterations: sca.iterates.len(),
        });
        if opts.debug_trace {
            debug.push(TraceRecord {
                outer,
                sca_iter: usize::MAX,
                objective: state.ee,
                residual: 0.0,
            });
        }
        let done = prev.as_ref().is_some_and(|pr| {
            let se_change = state.se.iter().zip(&pr.se).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            se_change <= opts.outer_se_tol && (state.ee - pr.ee).abs() < opts.outer_ee_tol * pr.ee
        });
        prev = Some(state);
        if done {
            converged = true;
            break;
        }
    }
    Ok(Alg1Result { nu, state: prev.expect("at least one outer iteration"), trace, converged, restarted, debug })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::generate_network;
    use crate::optimizer::pmp::min_power;
    use crate::params::SystemParams;
    use crate::quantizer::optimize_step_size;

    #[test]
    fn initial_powers_fill_budget() {
        let q = initial_powers(&[0.2, 0.1], &[1.0, 1.0], 0.5);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(q[0] > q[1]);
        assert_eq!(initial_powers(&[0.0, 0.0], &[1.0, 2.0], 1.0), vec![1.0, 2.0]);
    }

    #[test]
    fn one_user_one_ap() {
        let p = SystemParams::new(1, 1, 1);
        let s = generate_network(&p, 3);
        let model = PerformanceModel::new(&p, &s, optimize_step_size(2));
        let r = algorithm1(&model, 0.7, &[0.0], &OptOptions::default()).unwrap();
        assert!(r.trace.len() <= 2);
        assert!((r.state.q[0] - 0.7).abs() < 1e-4);
        assert!((r.state.u[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn final_state_is_feasible_and_reproducible() {
        let mut p = SystemParams::new(16, 1, 6);
        p.pilot_len = 3;
        p.se_required = vec![0.5; 6];
        let s = generate_network(&p, 12);
        let model = PerformanceModel::new(&p, &s, optimize_step_size(2));
        let opts = OptOptions::default();
        let (q_plus, _) = min_power(&model, &opts).unwrap();
        let nu = 0.5_f64.max(super::super::compute_nu_star(&q_plus, &p.p_max));
        let r = algorithm1(&model, nu, &q_plus, &opts).unwrap();
        let st = &r.state;
        for k in 0..6 {
            assert!(st.se[k] >= 0.5 - 1e-6, "{:?}", st.se);
            assert!(st.q[k] >= 0.0 && st.q[k] <= 1.0 + 1e-9);
            assert!((st.u.column(k).norm() - 1.0).abs() < 1e-9);
        }
        assert!(st.q.iter().sum::<f64>() <= nu * 6.0 + 1e-6);
        let again = model.evaluate(&st.q, &st.u).unwrap();
        assert!((again.ee - st.ee).abs() <= 1e-6 * st.ee);
        assert!((r.trace.last().unwrap().ee - st.ee).abs() <= 1e-12 * st.ee);
    }
}
