//! Network geometry and large-scale channel-estimation statistics.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::params::SystemParams;
use crate::rng::{stream, Domain};

/// Large-scale statistics of one network realization. Matrices indexed
/// `[(m, k)]` are M×K; `pilot_gram` is K×K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub beta: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub gamma: DMatrix<f64>,
    /// `|φ_k^H φ_k'|²`.
    pub pilot_gram: DMatrix<f64>,
    /// Index of the orthonormal pilot sequence used by each user.
    pub pilot_index: Vec<usize>,
    /// Wrap-around AP–user distances in km.
    pub distance_km: DMatrix<f64>,
    pub seed: u64,
}

impl NetworkStats {
    pub fn num_aps(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.beta.ncols()
    }

    /// Builds statistics from a given β matrix and pilot assignment.
    pub fn from_beta(
        beta: DMatrix<f64>,
        pilot_index: Vec<usize>,
        pilot_snr: f64,
        pilot_len: usize,
    ) -> Self {
        let pilot_gram = gram_from_assignment(&pilot_index);
        let (c, gamma) = estimation_stats(&beta, &pilot_gram, pilot_snr, pilot_len);
        let distance_km = DMatrix::zeros(beta.nrows(), beta.ncols());
        Self { beta, c, gamma, pilot_gram, pilot_index, distance_km, seed: 0 }
    }

    /// Relabels users: user `j` of the result is user `perm[j]` of `self`.
    pub fn permute_users(&self, perm: &[usize]) -> Self {
        let m = self.num_aps();
        let k = self.num_users();
        let col = |src: &DMatrix<f64>| DMatrix::from_fn(m, k, |i, j| src[(i, perm[j])]);
        Self {
            beta: col(&self.beta),
            c: col(&self.c),
            gamma: col(&self.gamma),
            pilot_gram: DMatrix::from_fn(k, k, |a, b| self.pilot_gram[(perm[a], perm[b])]),
            pilot_index: perm.iter().map(|&j| self.pilot_index[j]).collect(),
            distance_km: col(&self.distance_km),
            seed: self.seed,
        }
    }
}

fn wrapped(a: f64, b: f64, side: f64) -> f64 {
    let d = (a - b).abs();
    d.min(side - d)
}

/// Draws AP and user positions, large-scale fading, pilots and the MMSE
/// statistics for one realization.
pub fn generate_network(params: &SystemParams, seed: u64) -> NetworkStats {
    let m = params.num_aps;
    let k = params.num_users;
    let side = params.area_km;

    let mut layout = stream(seed, Domain::Layout, 0);
    let mut draw_pos = |n: usize| -> Vec<(f64, f64)> {
        (0..n)
            .map(|_| (layout.random::<f64>() * side, layout.random::<f64>() * side))
            .collect()
    };
    let aps = draw_pos(m);
    let users = draw_pos(k);

    let distance_km = DMatrix::from_fn(m, k, |i, j| {
        let dx = wrapped(aps[i].0, users[j].0, side);
        let dy = wrapped(aps[i].1, users[j].1, side);
        dx.hypot(dy)
    });

    let pl = &params.path_loss;
    let mut shadow = stream(seed, Domain::Shadowing, 0);
    let mut beta = DMatrix::zeros(m, k);
    // Column-major fill keeps the shadowing draw order fixed: AP index fastest.
    for j in 0..k {
        for i in 0..m {
            let d = distance_km[(i, j)];
            let z: f64 = shadow.sample(StandardNormal);
            let sh = if pl.shadowed(d) { pl.shadowing_db * z } else { 0.0 };
            beta[(i, j)] = 10f64.powf((pl.gain_db(d) + sh) / 10.0);
        }
    }

    let (pilot_index, pilot_gram) = assign_pilots(k, params.pilot_len, seed);
    let (c, gamma) = estimation_stats(&beta, &pilot_gram, params.pilot_snr, params.pilot_len);
    NetworkStats { beta, c, gamma, pilot_gram, pilot_index, distance_km, seed }
}

fn gram_from_assignment(index: &[usize]) -> DMatrix<f64> {
    let k = index.len();
    DMatrix::from_fn(k, k, |a, b| if index[a] == index[b] { 1.0 } else { 0.0 })
}

/// Assigns pilot sequences and returns `(pilot index per user, |φ_k^H φ_k'|²)`.
///
/// With `pilot_len >= num_users` every user gets its own sequence. Otherwise
/// each user picks one of the `pilot_len` orthonormal sequences uniformly.
pub fn assign_pilots(num_users: usize, pilot_len: usize, seed: u64) -> (Vec<usize>, DMatrix<f64>) {
    let tau = pilot_len.max(1);
    let index: Vec<usize> = if tau >= num_users {
        (0..num_users).collect()
    } else {
        let mut rng = stream(seed, Domain::Pilots, 0);
        (0..num_users).map(|_| rng.random_range(0..tau)).collect()
    };
    let gram = gram_from_assignment(&index);
    (index, gram)
}

/// MMSE scaling `c_mk` and estimate power `γ_mk = √(τ_p p_p) β_mk c_mk`.
pub fn estimation_stats(
    beta: &DMatrix<f64>,
    pilot_gram: &DMatrix<f64>,
    pilot_snr: f64,
    pilot_len: usize,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let tp = pilot_len as f64 * pilot_snr;
    let sq = tp.sqrt();
    let (m, k) = beta.shape();
    let mut c = DMatrix::zeros(m, k);
    let mut gamma = DMatrix::zeros(m, k);
    for i in 0..m {
        for j in 0..k {
            let contamination: f64 = (0..k).map(|l| beta[(i, l)] * pilot_gram[(j, l)]).sum();
            let cij = sq * beta[(i, j)] / (tp * contamination + 1.0);
            c[(i, j)] = cij;
            gamma[(i, j)] = sq * beta[(i, j)] * cij;
        }
    }
    (c, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_user_substitution() {
        let beta = DMatrix::from_element(1, 1, 1.0);
        let gram = DMatrix::identity(1, 1);
        let (c, g) = estimation_stats(&beta, &gram, 1.0, 1);
        assert!((c[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((g[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_channel_gives_zero_estimate() {
        let beta = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let (c, g) = estimation_stats(&beta, &DMatrix::identity(2, 2), 5.0, 2);
        assert_eq!(c[(0, 0)], 0.0);
        assert_eq!(g[(0, 0)], 0.0);
    }

    #[test]
    fn strong_pilots_give_near_perfect_estimates() {
        // τ_p p_p β = 1e3 with β = 1: γ/β = 1e3 / (1e3 + 1)
        let beta = DMatrix::from_element(1, 1, 1.0);
        let (_, g) = estimation_stats(&beta, &DMatrix::identity(1, 1), 1e3, 1);
        assert!(g[(0, 0)] > 0.99);
        assert!((g[(0, 0)] - 1e3 / 1001.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_and_forced_reuse_pilots() {
        let (_, g) = assign_pilots(4, 4, 3);
        assert_eq!(g, DMatrix::identity(4, 4));
        let (_, g) = assign_pilots(2, 1, 3);
        assert_eq!(g, DMatrix::from_element(2, 2, 1.0));
    }

    #[test]
    fn random_reuse_collision_rate() {
        // Two users independently choosing among 10 sequences collide with
        // probability exactly 1/10.
        let k = 20;
        let tau = 10;
        let exact = {
            let mut hits = 0;
            for a in 0..tau {
                for b in 0..tau {
                    hits += usize::from(a == b);
                }
            }
            hits as f64 / (tau * tau) as f64
        };
        let seeds = 400;
        let mut acc = 0.0;
        for s in 0..seeds {
            let (_, g) = assign_pilots(k, tau, s);
            let off: f64 = (0..k)
                .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
                .map(|(a, b)| g[(a, b)])
                .sum();
            acc += off / (k * (k - 1)) as f64;
        }
        let mean = acc / seeds as f64;
        assert!((mean - exact).abs() < 0.01, "{mean} vs {exact}");
    }

    #[test]
    fn deterministic_for_equal_seeds() {
        let p = SystemParams::new(30, 2, 8);
        assert_eq!(generate_network(&p, 11), generate_network(&p, 11));
        assert_ne!(generate_network(&p, 11).beta, generate_network(&p, 12).beta);
    }

    #[test]
    fn tiny_area_gives_equal_beta() {
        let mut p = SystemParams::new(6, 1, 4);
        p.area_km = 1e-4;
        let s = generate_network(&p, 5);
        let b0 = s.beta[(0, 0)];
        assert!(s.beta.iter().all(|&b| (b - b0).abs() <= 1e-12 * b0));
    }

    /// Scalar re-implementation of the three-slope model, kept separate from
    /// `PathLossModel::gain_db`.
    fn oracle_gain_db(d_km: f64) -> f64 {
        let f: f64 = 1900.0;
        let l = 46.3 + 33.9 * f.log10() - 13.82 * 15f64.log10()
            - (1.1 * f.log10() - 0.7) * 1.65
            + (1.56 * f.log10() - 0.8);
        if d_km > 0.05 {
            -l - 35.0 * d_km.log10()
        } else if d_km > 0.01 {
            -l - 15.0 * 0.05f64.log10() - 20.0 * d_km.log10()
        } else {
            -l - 15.0 * 0.05f64.log10() - 20.0 * 0.01f64.log10()
        }
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    #[test]
    fn median_path_loss_matches_scalar_oracle() {
        let mut p = SystemParams::new(100, 1, 20);
        p.path_loss.shadowing_db = 0.0;
        let s = generate_network(&p, 2024);
        let beta_db: Vec<f64> = s.beta.iter().map(|b| 10.0 * b.log10()).collect();
        let dists: Vec<f64> = s.distance_km.iter().copied().collect();
        // The gain is monotone in distance, so the medians line up up to the
        // even-count averaging of the two middle values.
        let m_beta = median(beta_db);
        let m_oracle = oracle_gain_db(median(dists));
        assert!((m_beta - m_oracle).abs() < 0.05, "{m_beta} vs {m_oracle}");
    }

    #[test]
    fn shadowing_is_zero_mean_in_db() {
        let p = SystemParams::new(100, 1, 20);
        let s = generate_network(&p, 99);
        let dev: Vec<f64> = s
            .beta
            .iter()
            .zip(s.distance_km.iter())
            .filter(|(_, &d)| d > 0.05)
            .map(|(&b, &d)| 10.0 * b.log10() - oracle_gain_db(d))
            .collect();
        let n = dev.len() as f64;
        let mean = dev.iter().sum::<f64>() / n;
        let var = dev.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 * 8.0 / n.sqrt(), "{mean}");
        assert!((var.sqrt() - 8.0).abs() < 0.5, "{}", var.sqrt());
    }

    #[test]
    fn gram_is_symmetric_binary_with_unit_diagonal() {
        for seed in 0..20 {
            let (_, g) = assign_pilots(12, 5, seed);
            for a in 0..12 {
                assert_eq!(g[(a, a)], 1.0);
                for b in 0..12 {
                    assert_eq!(g[(a, b)], g[(b, a)]);
                    assert!(g[(a, b)] == 0.0 || g[(a, b)] == 1.0);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn gamma_never_exceeds_beta(
            betas in prop::collection::vec(1e-16f64..1e-6, 6),
            pp in 1e6f64..1e13,
            tau in 1usize..4,
            seed in 0u64..1000,
        ) {
            let beta = DMatrix::from_row_slice(2, 3, &betas);
            let (_, gram) = assign_pilots(3, tau, seed);
            let (_, g) = estimation_stats(&beta, &gram, pp, tau);
            for (gv, bv) in g.iter().zip(beta.iter()) {
                prop_assert!(*gv >= 0.0);
                prop_assert!(*gv <= *bv * (1.0 + 1e-12));
            }
        }

        #[test]
        fn gamma_monotone_in_pilot_snr(
            betas in prop::collection::vec(1e-14f64..1e-8, 4),
            pp in 1e6f64..1e12,
            factor in 1.0f64..10.0,
        ) {
            let beta = DMatrix::from_row_slice(2, 2, &betas);
            let gram = DMatrix::identity(2, 2);
            let (_, g1) = estimation_stats(&beta, &gram, pp, 2);
            let (_, g2) = estimation_stats(&beta, &gram, pp * factor, 2);
            for (a, b) in g1.iter().zip(g2.iter()) {
                prop_assert!(*b >= *a * (1.0 - 1e-12));
            }
        }
    }
}
