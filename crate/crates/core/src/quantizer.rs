//! Uniform midrise quantizer and its Bussgang model for Gaussian input.
//!
//! For a unit-variance Gaussian input `z` and quantizer `h`, the Bussgang
//! gain is `ã = E{z h(z)}` and the output power ratio is `b̃ = E{h²(z)}`.
//! Both are evaluated exactly as finite sums over the quantization cells
//! using the Gaussian PDF and CDF.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizerError {
    #[error("step size must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("bit count must be >= 1")]
    ZeroBits,
    #[error("input standard deviation must be positive, got {0}")]
    NonPositiveSigma(f64),
}

/// Bussgang description of a quantizer designed for unit-variance input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec {
    /// Bits per real sample; 0 marks the ideal (unquantized) link.
    pub bits: u32,
    pub levels: usize,
    pub step: f64,
    /// ã
    pub gain: f64,
    /// b̃
    pub power_ratio: f64,
    /// σ_ẽ² = b̃ − ã²
    pub distortion: f64,
}

impl QuantizerSpec {
    /// Builds the spec for a given step.
    pub fn with_step(bits: u32, step: f64) -> Result<Self, QuantizerError> {
        let (gain, power_ratio) = bussgang_coefficients(step, bits)?;
        Ok(Self {
            bits,
            levels: 1usize << bits,
            step,
            gain,
            power_ratio,
            distortion: power_ratio - gain * gain,
        })
    }

    /// Perfect backhaul: identity map, ã = b̃ = 1, no distortion.
    pub fn ideal() -> Self {
        Self { bits: 0, levels: 0, step: 0.0, gain: 1.0, power_ratio: 1.0, distortion: 0.0 }
    }

    pub fn is_ideal(&self) -> bool {
        self.levels == 0
    }

    /// Signal-to-distortion ratio ã²/(b̃ − ã²).
    pub fn sdnr(&self) -> f64 {
        self.gain * self.gain / self.distortion
    }

    /// σ_ẽ²/ã², the factor multiplying quantization noise in the SINR.
    pub fn distortion_ratio(&self) -> f64 {
        self.distortion / (self.gain * self.gain)
    }

    /// Unit-variance quantizer map `h`.
    pub fn map_unit(&self, x: f64) -> f64 {
        if self.is_ideal() {
            return x;
        }
        let half = (self.levels / 2) as f64;
        let cell = (x / self.step).floor().clamp(-half, half - 1.0);
        (cell + 0.5) * self.step
    }
}

fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }
}

fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// Exact `(ã, b̃)` of the `2^bits`-level midrise quantizer with step `step`
/// for a standard normal input.
pub fn bussgang_coefficients(step: f64, bits: u32) -> Result<(f64, f64), QuantizerError> {
    if !(step > 0.0) {
        return Err(QuantizerError::NonPositiveStep(step));
    }
    if bits == 0 {
        return Err(QuantizerError::ZeroBits);
    }
    let half = 1i64 << (bits - 1);
    let mut a = 0.0;
    let mut b = 0.0;
    for j in -half..half {
        let lo = if j == -half { f64::NEG_INFINITY } else { j as f64 * step };
        let hi = if j == half - 1 { f64::INFINITY } else { (j + 1) as f64 * step };
        let r = (j as f64 + 0.5) * step;
        a += r * (pdf(lo) - pdf(hi));
        b += r * r * (cdf(hi) - cdf(lo));
    }
    Ok((a, b))
}

fn mse(step: f64, bits: u32) -> f64 {
    let (a, b) = bussgang_coefficients(step, bits).expect("positive step");
    b - 2.0 * a + 1.0
}

/// Step size maximizing the SDNR for unit-variance Gaussian input.
///
/// The search minimizes the mean-square error `b̃ − 2ã + 1`. At its minimum
/// the centroid condition `ã = b̃` holds, which makes it an SDNR maximizer;
/// for one bit the SDNR does not depend on the step at all and this picks the
/// unique MSE-optimal step among the ties. A log-spaced scan brackets the
/// minimum and golden-section search refines it.
pub fn optimize_step_size(bits: u32) -> QuantizerSpec {
    assert!(bits >= 1, "optimize_step_size needs at least one bit");
    let grid: Vec<f64> = (0..400)
        .map(|i| 10f64.powf(-4.0 + 5.0 * i as f64 / 399.0))
        .collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| mse(grid[i], bits).total_cmp(&mse(grid[j], bits)))
        .unwrap();
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let step = golden_section(|s| mse(s, bits), lo, hi, 1e-9);
    QuantizerSpec::with_step(bits, step).expect("positive step")
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Quantizes `x` whose standard deviation is `sigma`: `σ · h(x/σ)`.
pub fn quantize(x: f64, sigma: f64, spec: &QuantizerSpec) -> Result<f64, QuantizerError> {
    if !(sigma > 0.0) {
        return Err(QuantizerError::NonPositiveSigma(sigma));
    }
    Ok(sigma * spec.map_unit(x / sigma))
}

/// Quantizes real and imaginary parts independently, each normalized by
/// `sigma/√2` where `sigma²` is the total complex variance.
pub fn quantize_complex(
    z: Complex<f64>,
    sigma: f64,
    spec: &QuantizerSpec,
) -> Result<Complex<f64>, QuantizerError> {
    let s = sigma / std::f64::consts::SQRT_2;
    Ok(Complex::new(quantize(z.re, s, spec)?, quantize(z.im, s, spec)?))
}

/// σ_ẽ² = b̃ − ã².
pub fn distortion_power(spec: &QuantizerSpec) -> f64 {
    spec.power_ratio - spec.gain * spec.gain
}
