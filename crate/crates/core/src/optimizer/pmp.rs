//! Minimum total power meeting every SE target, and the budget floor ν*.

use nalgebra::DMatrix;

use super::filters::design_filters;
use super::{OptError, OptOptions};
use crate::gp::{solve, GpError, GpProblem, Monomial, Posynomial};
use crate::performance::{PerformanceModel, SinrCoefficients};

/// PMP as a GP over the users with a positive SE target. Returns the problem
/// and the user index of each GP variable, or `None` without targets.
pub fn pmp_problem(
    model: &PerformanceModel,
    coeffs: &SinrCoefficients,
    opts: &OptOptions,
) -> Option<(GpProblem, Vec<usize>)> {
    let p = model.params;
    let active: Vec<usize> = (0..p.num_users).filter(|&k| p.se_required[k] > 0.0).collect();
    if active.is_empty() {
        return None;
    }
    let var_of = |k: usize| active.iter().position(|&a| a == k);
    let idle_q = |k: usize| opts.idle_floor * p.p_max[k];

    let mut gp = GpProblem::new(active.len());
    gp.minimize((0..active.len()).map(Monomial::var).collect::<Posynomial>());
    for (i, &k) in active.iter().enumerate() {
        let thr = p.sinr_threshold(p.se_required[k]);
        let qk_inv = Monomial::new(1.0, [(i, -1.0)]);
        let mut f = Posynomial::default();
        let mut constant_over_q = coeffs.c[k];
        for j in 0..p.num_users {
            let w = coeffs.a[(k, j)] + coeffs.b[(k, j)];
            if w == 0.0 {
                continue;
            }
            match var_of(j) {
                Some(jv) if jv == i => f.push(Monomial::constant(thr * w)),
                Some(jv) => f.push(Monomial::new(thr * w, [(jv, 1.0), (i, -1.0)])),
                None => constant_over_q += w * idle_q(j),
            }
        }
        f.push(qk_inv.scale(thr * constant_over_q));
        gp.le(f, format!("se_{k}"));
        gp.bounds(i, 1e-9 * p.p_max[k], p.p_max[k]);
    }
    Some((gp, active))
}

/// Users that miss their target even alone at full power.
fn hopeless_users(model: &PerformanceModel, coeffs: &SinrCoefficients) -> Vec<usize> {
    let p = model.params;
    (0..p.num_users)
        .filter(|&k| p.se_required[k] > 0.0)
        .filter(|&k| {
            let pm = p.p_max[k];
            pm / (coeffs.b[(k, k)] * pm + coeffs.c[k]) < p.sinr_threshold(p.se_required[k])
        })
        .collect()
}

/// Minimum-power allocation for fixed filters `u`.
pub fn solve_pmp(model: &PerformanceModel, u: &DMatrix<f64>, opts: &OptOptions) -> Result<Vec<f64>, OptError> {
    let p = model.params;
    let coeffs = model.coefficients(u);
    let Some((gp, active)) = pmp_problem(model, &coeffs, opts) else {
        return Ok(vec![0.0; p.num_users]);
    };
    let sol = solve(&gp, None, opts.gp).map_err(|e| match e {
        GpError::Infeasible { .. } => {
            let mut users = hopeless_users(model, &coeffs);
            if users.is_empty() {
                users = active.clone();
            }
            OptError::Infeasible { users }
        }
        other => OptError::Gp(other),
    })?;
    let mut q: Vec<f64> = (0..p.num_users).map(|k| opts.idle_floor * p.p_max[k]).collect();
    for (i, &k) in active.iter().enumerate() {
        q[k] = sol.x[i].min(p.p_max[k]);
    }
    Ok(q)
}

/// Alternates PMP and filter design, starting from full-power filters.
/// Returns q⁺ and the filters matched to it.
pub fn min_power(model: &PerformanceModel, opts: &OptOptions) -> Result<(Vec<f64>, DMatrix<f64>), OptError> {
    let p = model.params;
    let mut u = design_filters(model, &p.p_max);
    if p.se_required.iter().all(|&s| s <= 0.0) {
        return Ok((vec![0.0; p.num_users], u));
    }
    let mut q = solve_pmp(model, &u, opts)?;
    for _ in 1..opts.pmp_rounds.max(1) {
        u = design_filters(model, &q);
        let next = solve_pmp(model, &u, opts)?;
        let (a, b): (f64, f64) = (q.iter().sum(), next.iter().sum());
        q = next;
        if (a - b).abs() <= 1e-4 * a {
            break;
        }
    }
    u = design_filters(model, &q);
    Ok((q, u))
}

/// `ν* = Σq⁺ / Σp_max`, clamped to [0, 1].
pub fn compute_nu_star(q_plus: &[f64], p_max: &[f64]) -> f64 {
    (q_plus.iter().sum::<f64>() / p_max.iter().sum::<f64>()).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{brute_force, oracle::OracleOptions};
    use crate::network::{generate_network, NetworkStats};
    use crate::params::SystemParams;
    use crate::quantizer::optimize_step_size;

    #[test]
    fn nu_star_arithmetic() {
        assert_eq!(compute_nu_star(&[1.0, 1.0], &[1.0, 1.0]), 1.0);
        assert_eq!(compute_nu_star(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
        assert!((compute_nu_star(&[0.2, 0.3], &[1.0, 1.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn no_targets_no_power() {
        let p = SystemParams::new(6, 1, 3);
        let s = generate_network(&p, 1);
        let model = PerformanceModel::new(&p, &s, optimize_step_size(2));
        let (q, _) = min_power(&model, &OptOptions::default()).unwrap();
        assert_eq!(q, vec![0.0; 3]);
    }

    fn single_user() -> (SystemParams, NetworkStats) {
        let mut p = SystemParams::new(4, 1, 1);
        p.pilot_len = 1;
        p.se_required = vec![1.0];
        let s = generate_network(&p, 11);
        (p, s)
    }

    #[test]
    fn single_user_constraint_is_tight() {
        let (p, s) = single_user();
        let model = PerformanceModel::new(&p, &s, optimize_step_size(3));
        let (q, u) = min_power(&model, &OptOptions::default()).unwrap();
        let sinr = model.sinr(0, &q, u.column(0).as_slice()).unwrap();
        let thr = p.sinr_threshold(1.0);
        assert!(q[0] < 1.0);
        assert!((sinr - thr).abs() < 1e-5 * thr, "{sinr} vs {thr}");
    }

    #[test]
    fn unreachable_target_names_user() {
        let (mut p, s) = single_user();
        p.se_required = vec![40.0];
        let model = PerformanceModel::new(&p, &s, optimize_step_size(3));
        assert_eq!(
            min_power(&model, &OptOptions::default()),
            Err(OptError::Infeasible { users: vec![0] })
        );
    }

    #[test]
    fn two_user_instance_matches_oracle() {
        let mut p = SystemParams::new(6, 1, 2);
        p.pilot_len = 2;
        p.se_required = vec![0.2, 0.4];
        let s = generate_network(&p, 5);
        let model = PerformanceModel::new(&p, &s, optimize_step_size(2));
        let opts = OptOptions::default();
        let u = design_filters(&model, &p.p_max);
        let (gp, _) = pmp_problem(&model, &model.coefficients(&u), &opts).unwrap();
        let sol = solve(&gp, None, opts.gp).unwrap();
        let oracle = brute_force(&gp, OracleOptions::default()).unwrap();
        assert!((sol.objective - oracle.objective).abs() <= 0.01 * oracle.objective);
        assert!(gp.max_violation(&sol.x) <= 1e-6);
        let q = solve_pmp(&model, &u, &opts).unwrap();
        let se: Vec<f64> = (0..2)
            .map(|k| model.spectral_efficiency(model.sinr(k, &q, u.column(k).as_slice()).unwrap()))
            .collect();
        assert!(se[0] >= 0.2 - 1e-6 && se[1] >= 0.4 - 1e-6, "{se:?}");
    }
}
