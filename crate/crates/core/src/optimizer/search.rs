//! Budget search over ν, the outer loop over quantizer bits, and the
//! equal-power reference.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::alg1::{algorithm1, Alg1Result};
use super::pmp::{compute_nu_star, min_power};
use super::{OptError, OptOptions};
use crate::network::NetworkStats;
use crate::params::SystemParams;
use crate::performance::{PerformanceModel, SolutionState};
use crate::quantizer::optimize_step_size;

/// `points` log-spaced values on `[max(ν*, floor), 1]`.
pub fn nu_grid(nu_star: f64, points: usize, floor: f64) -> Vec<f64> {
    let lo = nu_star.max(floor).min(1.0);
    if points <= 1 || lo >= 1.0 {
        return vec![1.0];
    }
    let (a, b) = (lo.ln(), 0.0);
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .map(|v| v.clamp(lo, 1.0))
        .collect()
}

#[derive(Debug, Clone)]
pub struct NuSearchResult {
    pub nu_star: f64,
    pub q_plus: Vec<f64>,
    pub grid: Vec<f64>,
    /// Evaluated budgets: the log grid followed by the refinement points.
    /// `runs` has one entry per budget.
    pub runs: Vec<Result<Alg1Result, OptError>>,
    pub best: usize,
}

impl NuSearchResult {
    pub fn best_run(&self) -> &Alg1Result {
        self.runs[self.best].as_ref().expect("best run succeeded")
    }

    pub fn best_state(&self) -> &SolutionState {
        &self.best_run().state
    }
}

/// Runs `algorithm1` on every grid budget and keeps the best E_e.
pub fn maximize_ee(model: &PerformanceModel, opts: &OptOptions) -> Result<NuSearchResult, OptError> {
    let (q_plus, _) = min_power(model, opts)?;
    let nu_star = compute_nu_star(&q_plus, &model.params.p_max);
    let grid = nu_grid(nu_star, opts.nu_points, opts.nu_floor);
    let mut grid = grid;
    let mut runs: Vec<Result<Alg1Result, OptError>> =
        grid.par_iter().map(|&nu| algorithm1(model, nu, &q_plus, opts)).collect();
    let ee_of = |r: &Result<Alg1Result, OptError>| r.as_ref().map_or(f64::NEG_INFINITY, |r| r.state.ee);

    // Golden-section refinement in ln ν between the neighbours of the argmax.
    if let Some(b) = argmax(&runs) {
        if grid.len() > 2 && opts.nu_refine > 0 {
            let n = grid.len();
            let (mut lo, mut hi) = (grid[b.saturating_sub(1)].ln(), grid[(b + 1).min(n - 1)].ln());
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            let eval = |x: f64, grid: &mut Vec<f64>, runs: &mut Vec<_>| {
                let nu = x.exp();
                let r = algorithm1(model, nu, &q_plus, opts);
                let e = ee_of(&r);
                grid.push(nu);
                runs.push(r);
                e
            };
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let mut f1 = eval(x1, &mut grid, &mut runs);
            let mut f2 = eval(x2, &mut grid, &mut runs);
            for _ in 2..opts.nu_refine {
                if f1 >= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = eval(x1, &mut grid, &mut runs);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = eval(x2, &mut grid, &mut runs);
                }
            }
        }
    }
    match argmax(&runs).map(|b| (b, ())) {
        Some((best, _)) => Ok(NuSearchResult { nu_star, q_plus, grid, runs, best }),
        None => Err(runs.into_iter().find_map(Result::err).expect("grid is non-empty")),
    }
}

fn argmax(runs: &[Result<Alg1Result, OptError>]) -> Option<usize> {
    runs.iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().ok().map(|r| (i, r.state.ee)))
        .fold(None, |acc: Option<(usize, f64)>, (i, ee)| match acc {
            Some((_, b)) if b >= ee => acc,
            _ => Some((i, ee)),
        })
        .map(|(i, _)| i)
}

/// Repeats the ν search for each quantizer resolution.
pub fn maximize_ee_over_bits(
    params: &SystemParams,
    stats: &NetworkStats,
    bits: &[u32],
    opts: &OptOptions,
) -> Vec<(u32, Result<NuSearchResult, OptError>)> {
    bits.par_iter()
        .map(|&b| {
            let mut p = params.clone();
            p.bits = b;
            let model = PerformanceModel::new(&p, stats, optimize_step_size(b));
            (b, maximize_ee(&model, opts))
        })
        .collect()
}

/// Full power with uniform combining weights `1/√M`.
pub fn equal_power_baseline(model: &PerformanceModel) -> Result<SolutionState, OptError> {
    let m = model.num_aps();
    let u = DMatrix::from_element(m, model.num_users(), 1.0 / (m as f64).sqrt());
    Ok(model.evaluate(&model.params.p_max, &u)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::generate_network;
    use crate::optimizer::filters::design_filters;

    #[test]
    fn grid_shape() {
        let g = nu_grid(0.01, 12, 1e-3);
        assert_eq!(g.len(), 12);
        assert!((g[0] - 0.01).abs() < 1e-15 && g[11] == 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!((nu_grid(0.0, 5, 1e-3)[0] - 1e-3).abs() < 1e-15);
        assert_eq!(nu_grid(1.0, 12, 1e-3), vec![1.0]);
    }

    #[test]
    fn baseline_filters_are_unit_norm() {
        let p = SystemParams::new(9, 1, 3);
        let s = generate_network(&p, 2);
        let model = PerformanceModel::new(&p, &s, optimize_step_size(2));
        let b = equal_power_baseline(&model).unwrap();
        for k in 0..3 {
            assert!((b.u.column(k).norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(b.q, vec![1.0; 3]);
    }

    #[test]
    fn one_ap_baseline_filter_is_optimal_direction() {
        let p = SystemParams::new(1, 1, 2);
        let s = generate_network(&p, 2);
        let model = PerformanceModel::new(&p, &s, optimize_step_size(2));
        let b = equal_power_baseline(&model).unwrap();
        assert_eq!(b.u, design_filters(&model, &p.p_max));
    }

    fn small() -> (SystemParams, NetworkStats) {
        let mut p = SystemParams::new(12, 1, 4);
        p.pilot_len = 4;
        let s = generate_network(&p, 31);
        (p, s)
    }

    #[test]
    fn free_transmit_power_prefers_full_budget() {
        let (mut p, s) = small();
        // ρN0 enters only the power model, so this makes P_TX negligible
        // without touching any SINR.
        p.noise_power_w *= 1e-9;
        let model = PerformanceModel::new(&p, &s, optimize_step_size(2));
        let opts = OptOptions { nu_points: 6, ..OptOptions::default() };
        let r = maximize_ee(&model, &opts).unwrap();
        let full = r.grid.iter().position(|&v| v == 1.0).unwrap();
        let at_full = r.runs[full].as_ref().unwrap().state.ee;
        assert!(at_full >= r.best_state().ee * (1.0 - 1e-3));
    }

    #[test]
    fn beats_baseline_and_refines_stably() {
        let (p, s) = small();
        let model = PerformanceModel::new(&p, &s, optimize_step_size(2));
        let base = equal_power_baseline(&model).unwrap();
        let coarse = maximize_ee(&model, &OptOptions { nu_points: 8, ..OptOptions::default() }).unwrap();
        let fine = maximize_ee(&model, &OptOptions { nu_points: 16, ..OptOptions::default() }).unwrap();
        let (a, b) = (coarse.best_state().ee, fine.best_state().ee);
        assert!(a >= base.ee);
        assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
    }
}
