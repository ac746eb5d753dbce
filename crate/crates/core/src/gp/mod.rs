//! Geometric programming in convex (log) form.
//!
//! A problem is `min f0(x)` subject to `f_i(x) ≤ 1` for posynomials `f_i`,
//! `g_j(x) = 1` for monomials `g_j`, and box bounds on `x > 0`. The barrier
//! solver lives in [`solver`]; [`oracle`] is an exhaustive grid search used
//! to cross-check it on small instances.

mod expr;
pub mod oracle;
pub mod solver;

use std::fmt;

use thiserror::Error;

pub use expr::{Monomial, Posynomial};
pub use oracle::brute_force;
pub use solver::{solve, GpOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("problem is infeasible (phase-I optimum {violation:.3e})")]
    Infeasible { violation: f64 },
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// `lhs ≤ 1`
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub lhs: Posynomial,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpProblem {
    pub num_vars: usize,
    pub objective: Posynomial,
    pub constraints: Vec<Constraint>,
    /// Each monomial is constrained to equal 1.
    pub equalities: Vec<Monomial>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GpProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: Posynomial::default(),
            constraints: Vec::new(),
            equalities: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn minimize(&mut self, f: impl Into<Posynomial>) -> &mut Self {
        self.objective = f.into();
        self
    }

    /// Adds `lhs ≤ 1`.
    pub fn le(&mut self, lhs: impl Into<Posynomial>, label: impl Into<String>) -> &mut Self {
        self.constraints.push(Constraint { lhs: lhs.into(), label: label.into() });
        self
    }

    /// Adds `m = 1`.
    pub fn equal(&mut self, m: Monomial) -> &mut Self {
        self.equalities.push(m);
        self
    }

    pub fn bounds(&mut self, i: usize, lo: f64, hi: f64) -> &mut Self {
        self.lower[i] = lo;
        self.upper[i] = hi;
        self
    }

    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |msg: String| Err(GpError::Invalid(msg));
        if self.num_vars == 0 {
            return bad("no variables".into());
        }
        if self.objective.is_empty() {
            return bad("empty objective".into());
        }
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return bad("bound vectors do not match the variable count".into());
        }
        let check = |m: &Monomial, what: &str| -> Result<(), GpError> {
            if !(m.coeff > 0.0 && m.coeff.is_finite()) {
                return bad(format!("{what}: coefficient {} is not positive and finite", m.coeff));
            }
            if m.exps.iter().any(|&(i, a)| i >= self.num_vars || !a.is_finite()) {
                return bad(format!("{what}: bad exponent or variable index"));
            }
            Ok(())
        };
        for t in &self.objective.terms {
            check(t, "objective")?;
        }
        for c in &self.constraints {
            if c.lhs.is_empty() {
                return bad(format!("constraint '{}' is empty", c.label));
            }
            for t in &c.lhs.terms {
                check(t, &c.label)?;
            }
        }
        for m in &self.equalities {
            check(m, "equality")?;
        }
        for i in 0..self.num_vars {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo >= 0.0) || !(hi > 0.0) || lo > hi || lo.is_infinite() {
                return bad(format!("bounds of x{i} are [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// Largest violation `max(f_i(x) − 1, |g_j(x) − 1|, bound gaps)`, relative.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for c in &self.constraints {
            v = v.max(c.lhs.eval(x) - 1.0);
        }
        for m in &self.equalities {
            v = v.max((m.eval(x) - 1.0).abs());
        }
        for i in 0..self.num_vars {
            if self.lower[i] > 0.0 {
                v = v.max(self.lower[i] / x[i] - 1.0);
            }
            if self.upper[i].is_finite() {
                v = v.max(x[i] / self.upper[i] - 1.0);
            }
        }
        v
    }
}

impl fmt::Display for GpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variables {}", self.num_vars)?;
        writeln!(f, "minimize {}", self.objective)?;
        for c in &self.constraints {
            writeln!(f, "  [{}] {} <= 1", c.label, c.lhs)?;
        }
        for m in &self.equalities {
            writeln!(f, "  {m} == 1")?;
        }
        for i in 0..self.num_vars {
            writeln!(f, "  {:e} <= x{i} <= {:e}", self.lower[i], self.upper[i])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub newton_steps: usize,
    /// Objective after each outer (barrier) iteration.
    pub trace: Vec<f64>,
    /// Set when the feasible set had no strict interior and the constraints
    /// were loosened by the phase-I tolerance.
    pub relaxed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_input() {
        let mut p = GpProblem::new(2);
        assert!(matches!(p.validate(), Err(GpError::Invalid(_))));
        p.minimize(Monomial::var(0));
        assert!(p.validate().is_ok());
        p.le(Monomial::new(-1.0, [(1, 1.0)]), "neg");
        assert!(matches!(p.validate(), Err(GpError::Invalid(_))));
        p.constraints.clear();
        p.le(Monomial::var(5), "index");
        assert!(p.validate().is_err());
        p.constraints.clear();
        p.bounds(0, 2.0, 1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn text_dump_lists_everything() {
        let mut p = GpProblem::new(2);
        p.minimize(Monomial::var(0))
            .le(Posynomial::new(vec![Monomial::var(0).inv(), Monomial::var(1)]), "c0")
            .equal(Monomial::new(2.0, [(0, 1.0), (1, 1.0)]))
            .bounds(1, 0.5, 3.0);
        let s = p.to_string();
        assert!(s.contains("[c0]"));
        assert!(s.contains("== 1"));
        assert!(s.contains("x1 <= 3e0"));
    }
}
