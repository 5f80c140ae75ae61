//! Generalized prolate spheroidal functions on the disc.
//!
//! The space-limited Fourier operator on a disc of radius `R` separates in
//! polar coordinates. Rescaled to the unit disc, order `N` reduces to the
//! radial integral equation
//!
//! ```text
//! β R(r) = ∫₀¹ J_N(c·r·r') R(r') r' dr',      c = 2πR²/(λd),
//! ```
//!
//! solved here by Nyström discretization on a Gauss-Legendre grid. The
//! weight `r'` is folded symmetrically so a symmetric eigensolver applies:
//! `K_kl = √(w_k r_k) J_N(c r_k r_l) √(w_l r_l)`, `R(r_k) = φ_k / √(w_k r_k)`.
//!
//! Operator eigenvalues on the unit disc are `α = 2π·i^N·β`; on the physical
//! disc `|ν|² = (L/(λd)²)·R⁴·|α|²`. Orders `N > 0` appear twice (`±N`).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::channel::{EigenSpectrum, SpectrumContext};
use crate::error::{Error, Result};
use crate::numerics::{bessel_j, GaussLegendre};
use crate::report::CsvReport;

/// Retained modes have `|β|` at least this fraction of the leading order-0 value.
pub const RETAIN_RELATIVE: f64 = 1e-6;
/// Largest relative change of a retained `β` tolerated when the grid doubles.
pub const SELF_CONVERGENCE_TOL: f64 = 1e-6;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 100_000;
const ORDER_BATCH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProlateProblem {
    pub c: f64,
    pub max_azimuthal_order: usize,
    pub radial_modes_per_order: usize,
    pub quadrature_order: usize,
}

/// Smallest admissible quadrature order for bandwidth `c`.
pub fn min_quadrature_order(c: f64) -> usize {
    (2.0 * c).ceil().max(16.0) as usize
}

impl ProlateProblem {
    /// Defaults that resolve the kernel comfortably for moderate `c`.
    pub fn with_defaults(c: f64) -> Self {
        let q = min_quadrature_order(c).max((4.0 * c).ceil() as usize).max(48);
        Self {
            c,
            max_azimuthal_order: (3.0 * c).ceil() as usize + 40,
            radial_modes_per_order: q,
            quadrature_order: q,
        }
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invariant(format!("bandwidth c must be > 0, got {}", self.c)));
        }
        if self.max_azimuthal_order < 1 || self.radial_modes_per_order < 1 {
            return Err(Error::invariant("prolate truncations must be >= 1"));
        }
        check_quadrature(self.c, self.quadrature_order)?;
        Ok(self)
    }
}

fn check_quadrature(c: f64, q: usize) -> Result<()> {
    let need = min_quadrature_order(c);
    if q < need {
        return Err(Error::invariant(format!(
            "quadrature order {q} does not resolve the kernel at c = {c}; need >= {need}"
        )));
    }
    Ok(())
}

/// Scale of the leading order-0 eigenvalue: `1/2` as `c → 0`, about `1/c` for large `c`.
fn beta_scale(c: f64) -> f64 {
    1.0 / c.max(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialEigenpair {
    pub order_n: usize,
    pub mode_m: usize,
    pub beta: f64,
    /// `(r_k, R(r_k))` on the quadrature grid, normalized so `Σ w_k r_k R(r_k)² = 1`.
    pub radial_samples: Vec<(f64, f64)>,
}

/// All eigenpairs of one azimuthal order together with the grid they live on.
#[derive(Debug, Clone)]
pub struct RadialSystem {
    pub order_n: usize,
    pub c: f64,
    pub grid: GaussLegendre,
    /// Sorted by decreasing `|β|`.
    pub pairs: Vec<RadialEigenpair>,
    /// Largest relative change of a retained `β` between this grid and the doubled one.
    pub self_convergence: f64,
}

impl RadialSystem {
    fn values(&self, m: usize) -> Vec<f64> {
        self.pairs[m].radial_samples.iter().map(|&(_, v)| v).collect()
    }

    /// `R(r)` by barycentric interpolation through the grid values.
    pub fn radial_value(&self, m: usize, r: f64) -> f64 {
        self.grid.interpolate(&self.values(m), r)
    }

    /// `R(r)` from the integral equation itself:
    /// `(1/β) Σ_k w_k r_k J_N(c r r_k) R(r_k)`.
    pub fn nystrom_value(&self, m: usize, r: f64) -> f64 {
        let pair = &self.pairs[m];
        let s: f64 = self
            .grid
            .weights
            .iter()
            .zip(&pair.radial_samples)
            .map(|(&w, &(rk, v))| w * rk * bessel_j(self.order_n as u32, self.c * r * rk) * v)
            .sum();
        s / pair.beta
    }
}

fn solve_nystrom(order_n: usize, c: f64, q: usize) -> Result<(GaussLegendre, Vec<f64>, DMatrix<f64>)> {
    let grid = GaussLegendre::on_interval(q, 0.0, 1.0);
    let sw: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&r, &w)| (w * r).sqrt())
        .collect();
    let mut k = DMatrix::<f64>::zeros(q, q);
    for i in 0..q {
        for j in i..q {
            let v = sw[i] * bessel_j(order_n as u32, c * grid.nodes[i] * grid.nodes[j]) * sw[j];
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::try_new(k, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::numerical("radial_eigensystem", format!("symmetric eigensolver failed at order {order_n}"))
    })?;
    let mut idx: Vec<usize> = (0..q).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .total_cmp(&eig.eigenvalues[a].abs())
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(q, q, |r, col| eig.eigenvectors[(r, idx[col])]);
    Ok((grid, values, vectors))
}

fn relative_changes(coarse: &[f64], fine: &[f64], floor: f64) -> f64 {
    coarse
        .iter()
        .zip(fine)
        .take_while(|(b, _)| b.abs() >= floor)
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max)
}

/// Eigenpairs of order `N`, verified against a grid of twice the size.
pub fn radial_eigensystem(order_n: usize, c: f64, quadrature_order: usize) -> Result<Vec<RadialEigenpair>> {
    Ok(solve_radial(order_n, c, quadrature_order)?.pairs)
}

/// As [`radial_eigensystem`], keeping the grid for interpolation.
pub fn solve_radial(order_n: usize, c: f64, quadrature_order: usize) -> Result<RadialSystem> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invariant(format!("bandwidth c must be > 0, got {c}")));
    }
    check_quadrature(c, quadrature_order)?;
    let q = quadrature_order;
    let (grid, values, vectors) = solve_nystrom(order_n, c, q)?;
    let (_, fine, _) = solve_nystrom(order_n, c, 2 * q)?;
    let floor = RETAIN_RELATIVE * beta_scale(c);
    let self_convergence = relative_changes(&values, &fine, floor);
    if self_convergence >= SELF_CONVERGENCE_TOL {
        return Err(Error::numerical(
            "radial_eigensystem",
            format!(
                "order {order_n}: retained eigenvalues moved by {self_convergence:e} when the grid doubled from {q}"
            ),
        ));
    }
    let sw: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&r, &w)| (w * r).sqrt())
        .collect();
    let pairs = values
        .iter()
        .enumerate()
        .map(|(m, &beta)| {
            let col = vectors.column(m);
            // sign convention: the largest-magnitude sample is positive
            let pivot = col.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            let radial_samples = grid
                .nodes
                .iter()
                .zip(&sw)
                .zip(col.iter())
                .map(|((&r, &s), &phi)| (r, sign * phi / s))
                .collect();
            RadialEigenpair {
                order_n,
                mode_m: m,
                beta,
                radial_samples,
            }
        })
        .collect();
    Ok(RadialSystem {
        order_n,
        c,
        grid,
        pairs,
        self_convergence,
    })
}

/// One operator eigenmode, labelled by signed azimuthal order and radial index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorMode {
    pub order_n: i64,
    pub mode_m: usize,
    pub beta: f64,
    pub alpha: Complex64,
    pub alpha_sq: f64,
    pub nu_sq: f64,
}

/// Physical parameters the spectrum was scaled with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscScaling {
    pub loss_factor: f64,
    pub disc_radius_m: f64,
    pub lambda_d: f64,
}

#[derive(Debug, Clone)]
pub struct OperatorSpectrum {
    pub problem: ProlateProblem,
    pub scaling: DiscScaling,
    /// Sorted by decreasing `|ν|²`, ties by `(|N|, m, sign)`.
    pub modes: Vec<OperatorMode>,
    pub spectrum: EigenSpectrum,
    /// Radial systems for orders `0..=highest retained`.
    pub radial: Vec<RadialSystem>,
    /// Worst self-convergence over the retained orders.
    pub self_convergence: f64,
}

fn tie_key(m: &OperatorMode) -> (u64, usize, bool) {
    (m.order_n.unsigned_abs(), m.mode_m, m.order_n < 0)
}

/// Solves orders `0, 1, 2, …` until the leading `|β_N|` drops below
/// [`RETAIN_RELATIVE`]·`|β_00|` and assembles `{|ν|²}` for the physical disc.
pub fn assemble_operator_spectrum(
    problem: &ProlateProblem,
    loss_factor: f64,
    disc_radius_m: f64,
    wavelength_m: f64,
    range_m: f64,
) -> Result<OperatorSpectrum> {
    let problem = problem.validated()?;
    for (name, v) in [
        ("loss_factor", loss_factor),
        ("disc_radius_m", disc_radius_m),
        ("wavelength_m", wavelength_m),
        ("range_m", range_m),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invariant(format!("{name} must be > 0, got {v}")));
        }
    }
    let lambda_d = wavelength_m * range_m;
    let c_geom = 2.0 * PI * disc_radius_m * disc_radius_m / lambda_d;
    if (c_geom - problem.c).abs() > 1e-9 * problem.c {
        return Err(Error::invariant(format!(
            "bandwidth c = {} is inconsistent with 2πR²/(λd) = {c_geom}",
            problem.c
        )));
    }
    let radial = solve_orders(&problem)?;
    let beta00 = radial[0].pairs[0].beta.abs();
    let floor = RETAIN_RELATIVE * beta00;
    let r4 = disc_radius_m.powi(4);
    let nu_scale = loss_factor / (lambda_d * lambda_d) * r4;
    let mut modes = Vec::new();
    for sys in &radial {
        for pair in sys
            .pairs
            .iter()
            .take(problem.radial_modes_per_order)
            .take_while(|p| p.beta.abs() >= floor)
        {
            let n = sys.order_n as i64;
            let alpha = Complex64::i().powi(n as i32) * (2.0 * PI * pair.beta);
            let alpha_sq = 4.0 * PI * PI * pair.beta * pair.beta;
            let signs: &[i64] = if n == 0 { &[1] } else { &[1, -1] };
            for &s in signs {
                let alpha = if s < 0 { Complex64::i().powi(-(n as i32)) * (2.0 * PI * pair.beta) } else { alpha };
                modes.push(OperatorMode {
                    order_n: s * n,
                    mode_m: pair.mode_m,
                    beta: pair.beta,
                    alpha,
                    alpha_sq,
                    nu_sq: nu_scale * alpha_sq,
                });
            }
        }
    }
    modes.sort_by(|a, b| b.nu_sq.total_cmp(&a.nu_sq).then(tie_key(a).cmp(&tie_key(b))));
    let spectrum = EigenSpectrum::from_values(
        modes.iter().map(|m| m.nu_sq).collect(),
        SpectrumContext::OperatorEigen,
    )?;
    let self_convergence = radial.iter().map(|s| s.self_convergence).fold(0.0, f64::max);
    Ok(OperatorSpectrum {
        problem,
        scaling: DiscScaling {
            loss_factor,
            disc_radius_m,
            lambda_d,
        },
        modes,
        spectrum,
        radial,
        self_convergence,
    })
}

/// Radial systems for successive orders, computed in parallel batches and
/// stopped after the first batch that reaches the decay threshold.
fn solve_orders(problem: &ProlateProblem) -> Result<Vec<RadialSystem>> {
    let q = problem.quadrature_order;
    let c = problem.c;
    let mut out: Vec<RadialSystem> = Vec::new();
    let mut next = 0usize;
    loop {
        if next > problem.max_azimuthal_order {
            return Err(Error::numerical(
                "assemble_operator_spectrum",
                format!(
                    "eigenvalues had not decayed below {RETAIN_RELATIVE:e} of the leading one by order {}",
                    problem.max_azimuthal_order
                ),
            ));
        }
        let end = (next + ORDER_BATCH).min(problem.max_azimuthal_order + 1);
        let batch: Vec<Result<RadialSystem>> =
            (next..end).into_par_iter().map(|n| solve_radial(n, c, q)).collect();
        for sys in batch {
            let sys = sys?;
            let lead = sys.pairs[0].beta.abs();
            let beta00 = out.first().map_or(lead, |s| s.pairs[0].beta.abs());
            if sys.order_n > 0 && lead < RETAIN_RELATIVE * beta00 {
                return Ok(out);
            }
            out.push(sys);
        }
        next = end;
    }
}

impl OperatorSpectrum {
    /// `Σ|α|²` over all retained modes; `π²` for a complete expansion.
    pub fn alpha_trace(&self) -> f64 {
        crate::numerics::pairwise_sum(&self.modes.iter().map(|m| m.alpha_sq).collect::<Vec<_>>())
    }

    pub fn nu_trace(&self) -> f64 {
        self.spectrum.norm_sq
    }

    /// `L·|S|²/(λd)²`, the exact value of the full `|ν|²` trace.
    pub fn expected_nu_trace(&self) -> f64 {
        let s = PI * self.scaling.disc_radius_m.powi(2) / self.scaling.lambda_d;
        self.scaling.loss_factor * s * s
    }

    pub fn highest_order(&self) -> usize {
        self.radial.len() - 1
    }

    /// Eigenfunction of the `rank`-th mode (0-based) on the physical disc.
    pub fn mode_function(&self, rank: usize) -> Result<ModeFunction<'_>> {
        let mode = self.modes.get(rank).ok_or_else(|| {
            Error::invariant(format!("mode rank {rank} exceeds the {} retained modes", self.modes.len()))
        })?;
        let sys = &self.radial[mode.order_n.unsigned_abs() as usize];
        Ok(ModeFunction {
            order_n: mode.order_n,
            values: sys.values(mode.mode_m),
            system: sys,
            mode_m: mode.mode_m,
            disc_radius_m: self.scaling.disc_radius_m,
        })
    }

    pub fn to_report(&self) -> CsvReport {
        let mut r = CsvReport::new("prolate", &["rank", "order_N", "mode_m", "alpha_sq", "nu_sq"]);
        r.comment(format!("c={:?}", self.problem.c));
        r.comment(format!("quadrature_order={}", self.problem.quadrature_order));
        r.comment(format!("highest_order={}", self.highest_order()));
        r.comment(format!("self_convergence={:?}", self.self_convergence));
        r.comment(format!("alpha_trace={:?}", self.alpha_trace()));
        r.comment(format!("nu_trace={:?}", self.nu_trace()));
        r.comment(format!("nu_trace_expected={:?}", self.expected_nu_trace()));
        r.comment(format!(
            "significant_modes={}",
            significant_mode_count(&self.spectrum, self.scaling.loss_factor)
        ));
        for (k, m) in self.modes.iter().enumerate() {
            r.push(vec![
                (k + 1).into(),
                m.order_n.into(),
                m.mode_m.into(),
                m.alpha_sq.into(),
                m.nu_sq.into(),
            ]);
        }
        r
    }
}

/// A prolate eigenfunction `p(u) = ψ(u/R)/R`, `ψ(r,θ) = R(r)·e^{iNθ}/√(2π)`,
/// orthonormal over the physical disc.
#[derive(Debug, Clone)]
pub struct ModeFunction<'a> {
    pub order_n: i64,
    pub mode_m: usize,
    pub disc_radius_m: f64,
    system: &'a RadialSystem,
    values: Vec<f64>,
}

impl ModeFunction<'_> {
    /// Value at a point `(y, z)` in meters.
    pub fn eval(&self, point: [f64; 2]) -> Complex64 {
        let r = point[0].hypot(point[1]) / self.disc_radius_m;
        let theta = point[1].atan2(point[0]);
        let radial = self.system.grid.interpolate(&self.values, r.min(1.0));
        let angular = Complex64::from_polar(1.0, self.order_n as f64 * theta);
        angular * (radial / ((2.0 * PI).sqrt() * self.disc_radius_m))
    }

    /// Same, with the radial factor from the integral equation instead of interpolation.
    pub fn eval_nystrom(&self, point: [f64; 2]) -> Complex64 {
        let r = point[0].hypot(point[1]) / self.disc_radius_m;
        let theta = point[1].atan2(point[0]);
        let radial = self.system.nystrom_value(self.mode_m, r);
        let angular = Complex64::from_polar(1.0, self.order_n as f64 * theta);
        angular * (radial / ((2.0 * PI).sqrt() * self.disc_radius_m))
    }
}

/// Number of modes with `|ν|² ≥ L/2`.
pub fn significant_mode_count(spectrum: &EigenSpectrum, loss_factor: f64) -> usize {
    spectrum.values.iter().filter(|&&v| v >= 0.5 * loss_factor).count()
}

/// Number of modes with `L/2 ≤ |ν|² ≤ 1.01·L`.
pub fn plateau_mode_count(spectrum: &EigenSpectrum, loss_factor: f64) -> usize {
    spectrum
        .values
        .iter()
        .filter(|&&v| v >= 0.5 * loss_factor && v <= 1.01 * loss_factor)
        .count()
}
