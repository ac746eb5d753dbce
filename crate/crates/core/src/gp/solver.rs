//! Log-barrier interior-point method for GPs in convex form.
//!
//! With `y = ln x` every posynomial becomes a log-sum-exp of affine
//! functions. Monomial equalities are linear in `y` and are removed by
//! writing `y = y_p + Z w` with `Z` a basis of their null space. A phase-I
//! problem `min s s.t. f_i(w) ≤ s` finds a strictly feasible start.

use nalgebra::{DMatrix, DVector};

use super::{GpError, GpProblem, GpSolution, Posynomial};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpOptions {
    /// Duality-gap target `m/τ` on the log objective.
    pub tol: f64,
    /// Barrier growth factor.
    pub mu: f64,
    pub tau0: f64,
    /// Slack granted when the feasible set has an empty interior.
    pub feas_tol: f64,
    pub max_newton: usize,
    /// `|ln x_i|` beyond which the problem is declared unbounded.
    pub log_limit: f64,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self { tol: 1e-6, mu: 10.0, tau0: 1.0, feas_tol: 1e-6, max_newton: 5000, log_limit: 500.0 }
    }
}

/// Log-sum-exp of affine functions `ln Σ_j exp(a_j·w + b_j)` with sparse rows.
#[derive(Debug, Clone)]
struct Lse {
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    dim: usize,
}

impl Lse {
    fn from_posynomial(p: &Posynomial, y0: &DVector<f64>, z: &DMatrix<f64>, identity: bool) -> Self {
        let mut rows = Vec::with_capacity(p.len());
        let mut b = Vec::with_capacity(p.len());
        for t in &p.terms {
            let row: Vec<(usize, f64)> = if identity {
                t.exps.clone()
            } else {
                let mut full = DVector::zeros(z.nrows());
                for &(i, e) in &t.exps {
                    full[i] = e;
                }
                let r = z.transpose() * full;
                r.iter().enumerate().filter(|e| *e.1 != 0.0).map(|(i, &v)| (i, v)).collect()
            };
            let off: f64 = t.exps.iter().map(|&(i, e)| e * y0[i]).sum();
            rows.push(row);
            b.push(t.coeff.ln() + off);
        }
        Self { rows, b, dim: z.ncols() }
    }

    fn affine(&self, w: &DVector<f64>) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.b)
            .map(|(r, b)| b + r.iter().map(|&(i, a)| a * w[i]).sum::<f64>())
            .collect()
    }

    fn value(&self, w: &DVector<f64>) -> f64 {
        let v = self.affine(w);
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
    }

    /// Returns `f(w)`; `coeffs(f) = (c1, c2)` selects the update
    /// `g += c1 ∇f`, `h += c1 ∇²f + c2 ∇f ∇fᵀ`.
    fn accumulate(
        &self,
        w: &DVector<f64>,
        coeffs: impl Fn(f64) -> (f64, f64),
        g: &mut DVector<f64>,
        h: &mut DMatrix<f64>,
    ) -> f64 {
        let v = self.affine(w);
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
        let s: f64 = e.iter().sum();
        let f = m + s.ln();
        let (c1, c2) = coeffs(f);
        let mut gf = DVector::zeros(self.dim);
        for (row, ej) in self.rows.iter().zip(&e) {
            let p = ej / s;
            if p == 0.0 {
                continue;
            }
            for &(i, a) in row {
                gf[i] += p * a;
            }
            if self.rows.len() > 1 {
                for &(i, a) in row {
                    for &(k, c) in row {
                        h[(i, k)] += c1 * p * a * c;
                    }
                }
            }
        }
        let nz: Vec<(usize, f64)> = gf.iter().enumerate().filter(|e| *e.1 != 0.0).map(|(i, &v)| (i, v)).collect();
        let c = if self.rows.len() > 1 { c2 - c1 } else { c2 };
        for &(i, a) in &nz {
            g[i] += c1 * a;
            for &(k, b) in &nz {
                h[(i, k)] += c * a * b;
            }
        }
        f
    }

    /// Adds variable `dim` with coefficient `c` to every term.
    fn augmented(&self, c: f64) -> Self {
        let rows = self.rows.iter().map(|r| {
            let mut r = r.clone();
            r.push((self.dim, c));
            r
        });
        Self { rows: rows.collect(), b: self.b.clone(), dim: self.dim + 1 }
    }

    fn single(dim: usize, idx: usize, coef: f64, offset: f64) -> Self {
        Self { rows: vec![vec![(idx, coef)]], b: vec![offset], dim }
    }
}

enum Stop {
    Converged,
    Early,
}

struct Barrier<'a> {
    obj: &'a Lse,
    cons: &'a [Lse],
    opts: GpOptions,
    newton: usize,
}

impl Barrier<'_> {
    fn phi(&self, tau: f64, w: &DVector<f64>) -> Option<f64> {
        let mut v = tau * self.obj.value(w);
        for c in self.cons {
            let f = c.value(w);
            if !(f < 0.0) {
                return None;
            }
            v -= (-f).ln();
        }
        v.is_finite().then_some(v)
    }

    fn newton_step(&self, tau: f64, w: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>), GpError> {
        let d = w.len();
        let mut g = DVector::zeros(d);
        let mut h = DMatrix::zeros(d, d);
        self.obj.accumulate(w, |_| (tau, 0.0), &mut g, &mut h);
        for c in self.cons {
            c.accumulate(
                w,
                |f| {
                    let r = -1.0 / f;
                    (r, r * r)
                },
                &mut g,
                &mut h,
            );
        }
        let scale = 1.0 + h.diagonal().amax();
        let mut reg = 0.0;
        for _ in 0..12 {
            let mut hr = h.clone();
            for i in 0..hr.nrows() {
                hr[(i, i)] += reg;
            }
            if let Some(ch) = hr.cholesky() {
                let dx = -ch.solve(&g);
                if dx.iter().all(|v| v.is_finite()) {
                    return Ok((dx, g));
                }
            }
            reg = if reg == 0.0 { 1e-12 * scale } else { reg * 100.0 };
        }
        Err(GpError::Numerical("Hessian could not be factored".into()))
    }

    /// Centers at barrier weight `tau`. `early` may end the whole run.
    fn center(
        &mut self,
        tau: f64,
        w: &mut DVector<f64>,
        early: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Result<Stop, GpError> {
        loop {
            if self.newton >= self.opts.max_newton {
                return Err(GpError::Numerical("Newton iteration limit reached".into()));
            }
            self.newton += 1;
            let (dx, g) = self.newton_step(tau, w)?;
            let slope = g.dot(&dx);
            if -slope / 2.0 <= 1e-10 {
                return Ok(Stop::Converged);
            }
            let phi0 = self.phi(tau, w).ok_or_else(|| GpError::Numerical("left the domain".into()))?;
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-16 {
                let cand = &*w + &dx * t;
                if let Some(v) = self.phi(tau, &cand) {
                    if v <= phi0 + 0.25 * t * slope {
                        // Round-off can satisfy the test without any decrease.
                        if v < phi0 {
                            accepted = Some(cand);
                        }
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some(next) = accepted else {
                // No progress possible at machine precision.
                return Ok(Stop::Converged);
            };
            *w = next;
            if early(w) {
                return Ok(Stop::Early);
            }
        }
    }

    /// Full barrier run. Returns the final point and the objective trace.
    fn run(
        &mut self,
        mut w: DVector<f64>,
        tol: f64,
        early: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Result<(DVector<f64>, Vec<f64>, bool), GpError> {
        let m = self.cons.len().max(1) as f64;
        let mut tau = self.opts.tau0;
        let mut trace = Vec::new();
        loop {
            let stop = self.center(tau, &mut w, early)?;
            trace.push(self.obj.value(&w));
            if matches!(stop, Stop::Early) {
                return Ok((w, trace, true));
            }
            if self.cons.is_empty() || m / tau < tol {
                return Ok((w, trace, false));
            }
            tau *= self.opts.mu;
        }
    }
}

/// Null-space parametrization of the equality constraints.
fn eliminate_equalities(problem: &GpProblem) -> Result<(DVector<f64>, DMatrix<f64>), GpError> {
    let n = problem.num_vars;
    if problem.equalities.is_empty() {
        return Ok((DVector::zeros(n), DMatrix::identity(n, n)));
    }
    let p = problem.equalities.len();
    let mut e = DMatrix::zeros(p, n);
    let mut h = DVector::zeros(p);
    for (j, m) in problem.equalities.iter().enumerate() {
        for &(i, a) in &m.exps {
            e[(j, i)] = a;
        }
        h[j] = -m.coeff.ln();
    }
    let svd = e.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let y0 = svd
        .pseudo_inverse(1e-10 * smax.max(1e-300))
        .map_err(|s| GpError::Numerical(s.to_string()))?
        * &h;
    let resid = (&e * &y0 - &h).amax();
    if resid > 1e-8 * (1.0 + h.amax()) {
        return Err(GpError::Infeasible { violation: resid });
    }
    let eig = (e.transpose() * &e).symmetric_eigen();
    let thr = 1e-10 * smax * smax;
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= thr)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let z = if cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) };
    Ok((y0, z))
}

fn max_con(cons: &[Lse], w: &DVector<f64>) -> f64 {
    cons.iter().map(|c| c.value(w)).fold(f64::NEG_INFINITY, f64::max)
}

/// Solves `problem`, optionally warm-started from `x0`.
pub fn solve(problem: &GpProblem, x0: Option<&[f64]>, opts: GpOptions) -> Result<GpSolution, GpError> {
    problem.validate()?;
    let n = problem.num_vars;
    let (y0, z) = eliminate_equalities(problem)?;
    let d = z.ncols();
    let identity = problem.equalities.is_empty();

    let obj = Lse::from_posynomial(&problem.objective, &y0, &z, identity);
    let mut cons: Vec<Lse> = problem
        .constraints
        .iter()
        .map(|c| Lse::from_posynomial(&c.lhs, &y0, &z, identity))
        .collect();
    for i in 0..n {
        use super::Monomial;
        if problem.lower[i] > 0.0 {
            let m = Monomial::new(problem.lower[i], [(i, -1.0)]);
            cons.push(Lse::from_posynomial(&m.into(), &y0, &z, identity));
        }
        if problem.upper[i].is_finite() {
            let m = Monomial::new(1.0 / problem.upper[i], [(i, 1.0)]);
            cons.push(Lse::from_posynomial(&m.into(), &y0, &z, identity));
        }
    }
    // Artificial boxes |ln x_i| ≤ log_limit keep both phases bounded; a
    // solution resting on one means the infimum is not attained.
    for i in 0..n {
        use super::Monomial;
        let l = opts.log_limit;
        for m in [Monomial::new((-l).exp(), [(i, 1.0)]), Monomial::new((-l).exp(), [(i, -1.0)])] {
            cons.push(Lse::from_posynomial(&m.into(), &y0, &z, identity));
        }
    }

    let to_x = |w: &DVector<f64>| -> Vec<f64> { (&y0 + &z * w).iter().map(|v| v.exp()).collect() };
    let finish = |w: &DVector<f64>, newton: usize, trace: Vec<f64>, relaxed: bool| {
        let x = to_x(w);
        GpSolution {
            objective: problem.objective.eval(&x),
            x,
            newton_steps: newton,
            trace: trace.into_iter().map(f64::exp).collect(),
            relaxed,
        }
    };

    
    if d == 0 {
        let w = DVector::zeros(0);
        let v = max_con(&cons, &w);
        if v > opts.feas_tol {
            return Err(GpError::Infeasible { violation: v });
        }
        return Ok(finish(&w, 0, vec![obj.value(&w)], v > 0.0));
    }

    let mut w = match x0 {
        Some(x) if x.len() == n && x.iter().all(|&v| v > 0.0 && v.is_finite()) => {
            let y = DVector::from_iterator(n, x.iter().map(|v| v.ln()));
            z.transpose() * (y - &y0)
        }
        _ => DVector::zeros(d),
    };

    let mut newton = 0;
    let mut relaxed = false;
    if !cons.is_empty() && !(max_con(&cons, &w) < 0.0) {
        // Phase I over (w, s).
        let s0 = max_con(&cons, &w).max(0.0) + 1.0;
        let p_obj = Lse::single(d + 1, d, 1.0, 0.0);
        let mut p_cons: Vec<Lse> = cons.iter().map(|c| c.augmented(-1.0)).collect();
        p_cons.push(Lse::single(d + 1, d, -1.0, -1.0));
        let mut b = Barrier { obj: &p_obj, cons: &p_cons, opts, newton: 0 };
        let start = w.clone().insert_row(d, s0);
        let (ws, _, early) = b.run(
            start,
            1e-3 * opts.feas_tol,
            &|v: &DVector<f64>| v[d] < -1e-3,
        )?;
        newton += b.newton;
        let s = ws[d];
        w = ws.rows(0, d).into_owned();
        if !early && !(s < 0.0) {
            if s > opts.feas_tol {
                return Err(GpError::Infeasible { violation: s });
            }
            let shift = s.max(0.0) + opts.feas_tol;
            for c in &mut cons {
                c.b.iter_mut().for_each(|b| *b -= shift);
            }
            relaxed = true;
        }
        if !(max_con(&cons, &w) < 0.0) {
            return Err(GpError::Numerical("phase I ended outside the interior".into()));
        }
    }

    let mut b = Barrier { obj: &obj, cons: &cons, opts, newton: 0 };
    let (w, trace, _) = b.run(w, opts.tol, &|_| false)?;
    newton += b.newton;
    if (&y0 + &z * &w).amax() > opts.log_limit - 1.0 {
        return Err(GpError::Unbounded);
    }
    Ok(finish(&w, newton, trace, relaxed))
}
