//! Shared generators for integration tests.

use cellfree_core::gp::{GpProblem, Monomial, Posynomial};
use cellfree_core::rng::{stream, Domain};
use rand::Rng;

pub fn random_posynomial(rng: &mut impl Rng, n: usize, terms: usize) -> Posynomial {
    (0..terms)
        .map(|_| {
            let exps: Vec<(usize, f64)> = (0..n).map(|i| (i, rng.random_range(-2.0..2.0))).collect();
            Monomial::new(rng.random_range(0.5..2.0), exps)
        })
        .collect()
}

/// Random 3-variable GP that is strictly feasible at a known point `x*`.
pub fn random_gp(seed: u64, with_equality: bool) -> (GpProblem, Vec<f64>) {
    let mut rng = stream(seed, Domain::Instance, 77);
    let n = 3;
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.2f64..5.0)).collect();
    let mut p = GpProblem::new(n);
    let nt = rng.random_range(2..4);
    p.minimize(random_posynomial(&mut rng, n, nt));
    for j in 0..rng.random_range(2..4) {
        let nt = rng.random_range(1..4);
        let f = random_posynomial(&mut rng, n, nt);
        let target = rng.random_range(0.5..0.9);
        let s = target / f.eval(&xs);
        p.le(f.times(&Monomial::constant(s)), format!("c{j}"));
    }
    if with_equality {
        let m = Monomial::new(1.0, [(0, rng.random_range(-1.0..1.0)), (2, 1.0)]);
        let c = 1.0 / m.eval(&xs);
        p.equal(m.scale(c));
    }
    for i in 0..n {
        p.bounds(i, 0.01, 100.0);
    }
    (p, xs)
}
