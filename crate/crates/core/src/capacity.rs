//! Spectral-efficiency formulas for the normalized MIMO model
//! `y = √(g/M²)·H̃x + n` and the closed-form bounds built on them.
//!
//! Spectra are the squared singular values `|v_i|²` of the phase-only
//! matrix, so `Σ|v_i|² = M²`. The total transmit SNR per unit channel power
//! is `γg/M²`; uniform allocation gives `γg/M³` to each stream.

use std::f64::consts::{LN_2, PI};

use crate::channel::EigenSpectrum;
use crate::error::{Error, Result};
use crate::numerics::ceil_snapped;

/// Values reported in the literature for the stream-count optimum, kept for
/// side-by-side comparison with the root-found constants.
pub const REFERENCE_T_STAR: f64 = 3.9125;
pub const REFERENCE_XI_COEFF: f64 = 0.8053;

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Scalar inputs for the closed-form bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityInputs {
    pub gamma: f64,
    pub g: f64,
    /// Number of streams (antennas per side).
    pub m: usize,
    /// Degrees of freedom `ℳ`.
    pub m_script: usize,
    pub area_m2: f64,
    pub lambda_d: f64,
}

impl CapacityInputs {
    /// Derives `ℳ = ⌈(|S|/λd)²⌉` from the geometry.
    pub fn from_geometry(gamma: f64, g: f64, m: usize, area_m2: f64, lambda_d: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invariant("stream count M must be >= 1"));
        }
        for (name, v) in [("gamma", gamma), ("g", g)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invariant(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("area_m2", area_m2), ("lambda_d", lambda_d)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invariant(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            gamma,
            g,
            m,
            m_script: degrees_of_freedom(area_m2, lambda_d),
            area_m2,
            lambda_d,
        })
    }

    pub fn gamma_g(&self) -> f64 {
        self.gamma * self.g
    }

    pub fn s_over_ld(&self) -> f64 {
        self.area_m2 / self.lambda_d
    }
}

/// `ℳ = ⌈(|S|/λd)²⌉`, at least 1.
pub fn degrees_of_freedom(area_m2: f64, lambda_d: f64) -> usize {
    let r = area_m2 / lambda_d;
    (ceil_snapped(r * r) as usize).max(1)
}

fn check_spectrum(spectrum: &EigenSpectrum, m: usize) -> Result<()> {
    if m == 0 || spectrum.len() != m {
        return Err(Error::invariant(format!(
            "spectrum has {} values but M = {m}",
            spectrum.len()
        )));
    }
    Ok(())
}

/// `Σ log₂(1 + (γg/M³)·|v_i|²)`.
pub fn uniform_spectral_efficiency(spectrum: &EigenSpectrum, gamma: f64, g: f64, m: usize) -> Result<f64> {
    check_spectrum(spectrum, m)?;
    let snr = gamma * g / (m as f64).powi(3);
    let terms: Vec<f64> = spectrum.values.iter().map(|&v| log2_1p(snr * v)).collect();
    Ok(crate::numerics::pairwise_sum(&terms))
}

/// Power allocation chosen by waterfilling over the positive eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Waterfilling {
    /// Number of active streams `K`.
    pub active: usize,
    /// Water level `μ`; stream `i ≤ K` receives `μ − 1/λ_i`.
    pub level: f64,
    pub powers: Vec<f64>,
    pub xi: f64,
}

/// Waterfilling with total power `γg/M²`. `K` is the largest count for which
/// `γg/(K M²) + (1/K)·Σ_{j≤K} 1/λ_j ≥ 1/λ_K`, scanning upward over the
/// eigenvalues in non-increasing order.
pub fn waterfilling(spectrum: &EigenSpectrum, gamma: f64, g: f64, m: usize) -> Result<Waterfilling> {
    check_spectrum(spectrum, m)?;
    let positive: Vec<f64> = spectrum.values.iter().copied().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::invariant("waterfilling needs at least one positive eigenvalue"));
    }
    let total = gamma * g / (m * m) as f64;
    let mut inv_sum = 0.0;
    let mut active = 0;
    let mut level = 0.0;
    for (k, &lam) in positive.iter().enumerate() {
        let kk = (k + 1) as f64;
        let candidate = (total + inv_sum + 1.0 / lam) / kk;
        if candidate < 1.0 / lam {
            break;
        }
        inv_sum += 1.0 / lam;
        active = k + 1;
        level = candidate;
    }
    let powers: Vec<f64> = positive[..active].iter().map(|&l| (level - 1.0 / l).max(0.0)).collect();
    let terms: Vec<f64> = positive[..active]
        .iter()
        .zip(&powers)
        .map(|(&l, &p)| log2_1p(l * p))
        .collect();
    Ok(Waterfilling {
        active,
        level,
        powers,
        xi: crate::numerics::pairwise_sum(&terms),
    })
}

pub fn waterfilling_spectral_efficiency(spectrum: &EigenSpectrum, gamma: f64, g: f64, m: usize) -> Result<f64> {
    Ok(waterfilling(spectrum, gamma, g, m)?.xi)
}

/// `min{M,ℳ}·log₂(1 + γg/(M·min{M,ℳ}))`.
pub fn spectral_efficiency_upper_bound(inputs: &CapacityInputs) -> f64 {
    let k = inputs.m.min(inputs.m_script) as f64;
    k * log2_1p(inputs.gamma_g() / (inputs.m as f64 * k))
}

/// Lower bound on the expected spectral efficiency for nodes placed
/// independently and uniformly on the disc:
/// `(M/4)·log₂(1 + γg/(2M²)) / [(2 − 1/M) + (32/(9π))·(M − 2 + 1/M)/(|S|/λd)]`.
pub fn expected_spectral_efficiency_lower_bound(inputs: &CapacityInputs) -> Result<f64> {
    let s = inputs.s_over_ld();
    if s < 1.0 {
        return Err(Error::invariant(format!(
            "lower bound requires |S|/(λd) >= 1, got {s}"
        )));
    }
    let m = inputs.m as f64;
    let num = m / 4.0 * log2_1p(inputs.gamma_g() / (2.0 * m * m));
    let den = (2.0 - 1.0 / m) + 32.0 / (9.0 * PI) * (m - 2.0 + 1.0 / m) / s;
    Ok(num / den)
}

/// Achievable spectral efficiency with optimal distributed antennas; same
/// closed form as the upper bound.
pub fn deterministic_capacity(inputs: &CapacityInputs) -> f64 {
    spectral_efficiency_upper_bound(inputs)
}

/// Root of `ln(1+t) = 2t/(1+t)`, the stationarity condition of
/// `x·log₂(1+γg/x²)` in `t = γg/x²`.
pub fn stationary_constant() -> f64 {
    let h = |t: f64| t.ln_1p() - 2.0 * t / (1.0 + t);
    // h(1) < 0 < h(10); bisect to full precision
    let (mut lo, mut hi) = (1.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `x·log₂(1 + γg/x²)`.
pub fn stream_objective(x: f64, gamma_g: f64) -> f64 {
    x * log2_1p(gamma_g / (x * x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamDesign {
    pub gamma_g: f64,
    pub t_star: f64,
    /// Continuous maximiser `√(γg/t*)`.
    pub x_opt: f64,
    pub m_lower: usize,
    pub m_upper: usize,
    /// Whichever of `m_lower`, `m_upper` gives the larger objective.
    pub m_opt: usize,
    /// Objective at `m_opt`, bits/s/Hz.
    pub xi: f64,
}

impl StreamDesign {
    pub fn x_ratio(&self) -> f64 {
        self.x_opt / self.gamma_g.sqrt()
    }

    /// Continuous maximum over `√(γg)`, in bits: `log₂(1+t*)/√t*`.
    pub fn xi_ratio_bits(&self) -> f64 {
        stream_objective(self.x_opt, self.gamma_g) / self.gamma_g.sqrt()
    }

    /// The same ratio with natural logarithms.
    pub fn xi_ratio_nats(&self) -> f64 {
        self.xi_ratio_bits() * LN_2
    }
}

/// Integer stream count maximising `M·log₂(1 + γg/M²)`.
pub fn optimal_stream_count(gamma: f64, g: f64) -> Result<StreamDesign> {
    let gamma_g = gamma * g;
    if !(gamma_g.is_finite() && gamma_g > 0.0) {
        return Err(Error::invariant(format!("γg must be finite and > 0, got {gamma_g}")));
    }
    let t_star = stationary_constant();
    let x_opt = (gamma_g / t_star).sqrt();
    let m_lower = (x_opt.floor() as usize).max(1);
    let m_upper = (x_opt.ceil() as usize).max(1);
    let xl = stream_objective(m_lower as f64, gamma_g);
    let xu = stream_objective(m_upper as f64, gamma_g);
    let (m_opt, xi) = if xu > xl { (m_upper, xu) } else { (m_lower, xl) };
    Ok(StreamDesign {
        gamma_g,
        t_star,
        x_opt,
        m_lower,
        m_upper,
        m_opt,
        xi,
    })
}

/// `|S| = √M·λd`, the region that supports `M` degrees of freedom.
pub fn required_array_area(m: usize, lambda: f64, d: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invariant("stream count M must be >= 1"));
    }
    Ok((m as f64).sqrt() * lambda * d)
}
