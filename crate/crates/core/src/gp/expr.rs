use std::fmt;
use std::ops::Mul;

/// `c · Π x_i^{a_i}` with `c > 0`. Exponents are stored sparsely, sorted by
/// variable index, without zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub exps: Vec<(usize, f64)>,
}

impl Monomial {
    pub fn new(coeff: f64, exps: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut v: Vec<(usize, f64)> = exps.into_iter().collect();
        v.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(v.len());
        for (i, a) in v {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => merged.push((i, a)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        Self { coeff, exps: merged }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeff: c, exps: Vec::new() }
    }

    /// `x_i`
    pub fn var(i: usize) -> Self {
        Self { coeff: 1.0, exps: vec![(i, 1.0)] }
    }

    pub fn scale(mut self, c: f64) -> Self {
        self.coeff *= c;
        self
    }

    pub fn pow(&self, p: f64) -> Self {
        Self::new(self.coeff.powf(p), self.exps.iter().map(|&(i, a)| (i, a * p)))
    }

    pub fn inv(&self) -> Self {
        self.pow(-1.0)
    }

    pub fn exponent(&self, i: usize) -> f64 {
        self.exps.iter().find(|e| e.0 == i).map_or(0.0, |e| e.1)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exps.iter().fold(self.coeff, |acc, &(i, a)| acc * x[i].powf(a))
    }

    /// `ln c + Σ a_i y_i` at `y = ln x`.
    pub fn log_eval(&self, y: &[f64]) -> f64 {
        self.exps.iter().fold(self.coeff.ln(), |acc, &(i, a)| acc + a * y[i])
    }

    pub fn max_var(&self) -> Option<usize> {
        self.exps.last().map(|e| e.0)
    }
}

impl Mul for &Monomial {
    type Output = Monomial;
    fn mul(self, rhs: &Monomial) -> Monomial {
        Monomial::new(
            self.coeff * rhs.coeff,
            self.exps.iter().chain(&rhs.exps).copied(),
        )
    }
}

impl Mul for Monomial {
    type Output = Monomial;
    fn mul(self, rhs: Monomial) -> Monomial {
        &self * &rhs
    }
}

/// Sum of monomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Posynomial {
    pub terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    pub fn push(&mut self, m: Monomial) {
        self.terms.push(m);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Multiplies every term by `m`.
    pub fn times(&self, m: &Monomial) -> Self {
        Self { terms: self.terms.iter().map(|t| t * m).collect() }
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.iter().filter_map(Monomial::max_var).max()
    }
}

impl From<Monomial> for Posynomial {
    fn from(m: Monomial) -> Self {
        Self { terms: vec![m] }
    }
}

impl FromIterator<Monomial> for Posynomial {
    fn from_iter<I: IntoIterator<Item = Monomial>>(iter: I) -> Self {
        Self { terms: iter.into_iter().collect() }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e}", self.coeff)?;
        for &(i, a) in &self.exps {
            if a == 1.0 {
                write!(f, " x{i}")?;
            } else {
                write!(f, " x{i}^{a}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Posynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (j, t) in self.terms.iter().enumerate() {
            if j > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
