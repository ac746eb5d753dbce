//! Receiver filters maximizing each user's SINR for fixed powers.
//!
//! The SINR of user `k` is the Rayleigh quotient `uᵀA_k u / uᵀB_k u` with
//! rank-one `A_k = N² q_k Γ_k Γ_kᵀ`, so the maximizer is `u ∝ B_k⁻¹ Γ_k`.

use nalgebra::{DMatrix, DVector};

use crate::performance::PerformanceModel;

/// `B_k = diag + Σ w_j v_j v_jᵀ`.
#[derive(Debug, Clone)]
pub struct FilterDenominator {
    pub diag: DVector<f64>,
    pub low_rank: Vec<(f64, DVector<f64>)>,
}

impl FilterDenominator {
    pub fn dense(&self) -> DMatrix<f64> {
        let mut b = DMatrix::from_diagonal(&self.diag);
        for (w, v) in &self.low_rank {
            b.ger(*w, v, v, 1.0);
        }
        b
    }

    pub fn quad(&self, u: &[f64]) -> f64 {
        let d: f64 = self.diag.iter().zip(u).map(|(d, x)| d * x * x).sum();
        let l: f64 = self
            .low_rank
            .iter()
            .map(|(w, v)| w * v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().powi(2))
            .sum();
        d + l
    }
}

pub fn filter_denominator(model: &PerformanceModel, q: &[f64], k: usize) -> FilterDenominator {
    let n = model.params.antennas_per_ap as f64;
    let rho = model.params.rho;
    let mats = model.matrices(k);
    let mut diag = &mats.r * (n / rho);
    let mut low_rank = Vec::new();
    for (j, &qj) in q.iter().enumerate() {
        if qj == 0.0 {
            continue;
        }
        diag.axpy(n * qj, &mats.d[j], 1.0);
        let g = model.stats.pilot_gram[(k, j)];
        if j != k && g != 0.0 {
            low_rank.push((n * n * qj * g, mats.delta[j].clone()));
        }
    }
    FilterDenominator { diag, low_rank }
}

fn normalize(mut u: DVector<f64>, gamma: &DVector<f64>) -> DVector<f64> {
    let norm = u.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        let m = u.len();
        return DVector::from_element(m, 1.0 / (m as f64).sqrt());
    }
    u /= norm;
    if u.dot(gamma) < 0.0 {
        u.neg_mut();
    }
    u
}

/// SINR-maximizing unit-norm filter of user `k`.
pub fn design_filter(model: &PerformanceModel, q: &[f64], k: usize) -> DVector<f64> {
    let gamma = &model.matrices(k).gamma;
    let b = filter_denominator(model, q, k);
    let m = gamma.len();
    let eps = 1e-12 * b.diag.sum() / m as f64;
    if b.low_rank.is_empty() {
        let u = DVector::from_fn(m, |i, _| {
            let d = if b.diag[i] > 0.0 { b.diag[i] } else { eps };
            gamma[i] / d
        });
        return normalize(u, gamma);
    }
    let dense = b.dense();
    let u = match dense.clone().cholesky() {
        Some(ch) => ch.solve(gamma),
        None => {
            let mut reg = dense;
            for i in 0..m {
                reg[(i, i)] += eps.max(f64::MIN_POSITIVE);
            }
            match reg.cholesky() {
                Some(ch) => ch.solve(gamma),
                None => gamma.clone(),
            }
        }
    };
    normalize(u, gamma)
}

/// Filters for all users, one per column.
pub fn design_filters(model: &PerformanceModel, q: &[f64]) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..model.num_users()).map(|k| design_filter(model, q, k)).collect();
    DMatrix::from_columns(&cols)
}
