//! Exhaustive log-grid search with zoom refinement. Slow and only for
//! problems with at most four variables and finite boxes.

use super::{GpError, GpProblem, GpSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub points: usize,
    pub rounds: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { points: 41, rounds: 40 }
    }
}

fn log_eq_residual(problem: &GpProblem, y: &[f64]) -> f64 {
    problem
        .equalities
        .iter()
        .map(|m| m.log_eval(y).abs())
        .fold(0.0, f64::max)
}

fn eq_slack(problem: &GpProblem, cell: &[f64]) -> f64 {
    // Largest log change of any equality monomial across one grid cell.
    problem
        .equalities
        .iter()
        .map(|m| m.exps.iter().map(|&(i, a)| a.abs() * cell[i]).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn brute_force(problem: &GpProblem, opts: OracleOptions) -> Result<GpSolution, GpError> {
    problem.validate()?;
    let n = problem.num_vars;
    if n > 4 {
        return Err(GpError::Invalid("oracle handles at most 4 variables".into()));
    }
    if problem.lower.iter().any(|&l| !(l > 0.0)) || problem.upper.iter().any(|u| !u.is_finite()) {
        return Err(GpError::Invalid("oracle needs finite positive boxes".into()));
    }
    let g = opts.points.max(3);
    let mut lo: Vec<f64> = problem.lower.iter().map(|v| v.ln()).collect();
    let mut hi: Vec<f64> = problem.upper.iter().map(|v| v.ln()).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut trace = Vec::new();
    let mut evaluated = 0;

    for _ in 0..opts.rounds {
        let cell: Vec<f64> = (0..n).map(|i| (hi[i] - lo[i]) / (g - 1) as f64).collect();
        let slack = eq_slack(problem, &cell);
        let mut round_best: Option<(f64, Vec<f64>)> = None;
        let total = g.pow(n as u32);
        let mut y = vec![0.0; n];
        let mut x = vec![0.0; n];
        for idx in 0..total {
            let mut r = idx;
            for i in 0..n {
                y[i] = lo[i] + cell[i] * (r % g) as f64;
                x[i] = y[i].exp();
                r /= g;
            }
            evaluated += 1;
            if problem.constraints.iter().any(|c| c.lhs.eval(&x) > 1.0) {
                continue;
            }
            if !problem.equalities.is_empty() && log_eq_residual(problem, &y) > slack {
                continue;
            }
            let f = problem.objective.eval(&x);
            if round_best.as_ref().is_none_or(|b| f < b.0) {
                round_best = Some((f, y.clone()));
            }
        }
        let Some((f, yb)) = round_best else {
            if best.is_some() {
                break;
            }
            return Err(GpError::Infeasible { violation: f64::NAN });
        };
        trace.push(f);
        // Equality slack shrinks every round, so earlier bests are not comparable.
        if !problem.equalities.is_empty() || best.as_ref().is_none_or(|b| f <= b.0) {
            best = Some((f, yb.clone()));
        }
        let center = &best.as_ref().unwrap().1;
        for i in 0..n {
            // Wide window: along an active constraint the objective is flat, so the
            // grid optimum can sit several cells away from the true one.
            let w = 10.0 * cell[i];
            lo[i] = (center[i] - w).max(problem.lower[i].ln());
            hi[i] = (center[i] + w).min(problem.upper[i].ln());
        }
    }
    let (f, y) = best.unwrap();
    Ok(GpSolution {
        x: y.iter().map(|v| v.exp()).collect(),
        objective: f,
        newton_steps: evaluated,
        trace,
        relaxed: !problem.equalities.is_empty(),
    })
}
