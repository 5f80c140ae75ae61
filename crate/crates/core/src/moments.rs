//! Fourth moment of a randomly chosen singular value of the reduced channel,
//! and the expected-efficiency lower bound built from it.
//!
//! With `w, x, y, z` i.i.d. uniform on the unit disc,
//!
//! ```text
//! f(c) = E cos(c⟨w − x, y − z⟩) = E_{w,x} [2 J₁(c‖w−x‖)/(c‖w−x‖)]²,
//! ```
//!
//! and `E|v|⁴ = 2M² − M + M(M−1)²·f(c)` at `c = 2|S|/(λd)`. The second form
//! depends on `w − x` only through its length, whose density is the lens
//! area of two unit discs, so `f` reduces to a smooth 1-D integral.

use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::error::{Error, Result};
use crate::montecarlo::draw_reduced_channel;
use crate::numerics::{j1_over_x, GaussLegendre, SampleStats};
use crate::report::CsvReport;
use crate::scenario::ScenarioConfig;
use crate::seed::{derive_seed, rng_from_seed};

/// Random stream tag for the direct Monte Carlo estimate of `f`.
const F_STREAM: u64 = 0x4643;
const MC_BLOCK: usize = 4096;
pub const MIN_F_SAMPLES: usize = 100;
pub const MIN_MOMENT_TRIALS: usize = 100;
/// Accepted relative disagreement between the two quadrature orders.
const QUADRATURE_RTOL: f64 = 1e-9;
const LOW_ORDER: usize = 12;
const HIGH_ORDER: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FMethod {
    BesselQuadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FEstimate {
    pub estimate: f64,
    /// Standard error for Monte Carlo; the difference between two
    /// quadrature orders for the deterministic method.
    pub std_error: f64,
    pub method: FMethod,
}

/// `f(c)`. For quadrature `budget` is the panel count, for Monte Carlo the
/// number of sampled 4-tuples.
pub fn f_of_c(c: f64, method: FMethod, budget: usize, seed: u64) -> Result<FEstimate> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invariant(format!("f(c) needs c > 0, got {c}")));
    }
    match method {
        FMethod::BesselQuadrature => f_quadrature(c, budget),
        FMethod::MonteCarlo => f_monte_carlo(c, budget, seed),
    }
}

/// `(8/π)·∫₀^{π/2} [J₁(2c cos θ)/(2c cos θ)]² (2θ − sin 2θ)·4 sinθ cosθ dθ`,
/// from `ρ = ‖w − x‖ = 2 cos θ` and lens area `2θ − sin 2θ`.
fn f_quadrature(c: f64, panels: usize) -> Result<FEstimate> {
    if panels == 0 {
        return Err(Error::invariant("quadrature needs at least one panel"));
    }
    let integrand = |t: f64| {
        let rho = 2.0 * t.cos();
        let j = j1_over_x(c * rho);
        j * j * (2.0 * t - (2.0 * t).sin()) * 2.0 * rho * t.sin()
    };
    let run = |order: usize| {
        let h = FRAC_PI_2 / panels as f64;
        let parts: Vec<f64> = (0..panels)
            .map(|k| GaussLegendre::on_interval(order, k as f64 * h, (k + 1) as f64 * h).integrate(integrand))
            .collect();
        8.0 / PI * crate::numerics::pairwise_sum(&parts)
    };
    let hi = run(HIGH_ORDER);
    let lo = run(LOW_ORDER);
    let err = (hi - lo).abs();
    if err > QUADRATURE_RTOL * hi.abs() {
        return Err(Error::numerical(
            "f_of_c",
            format!("{panels} panels too few at c = {c}: orders disagree by {err:e}"),
        ));
    }
    Ok(FEstimate {
        estimate: hi,
        std_error: err,
        method: FMethod::BesselQuadrature,
    })
}

fn unit_disc_point(rng: &mut impl Rng) -> [f64; 2] {
    loop {
        let y: f64 = rng.random_range(-1.0..1.0);
        let z: f64 = rng.random_range(-1.0..1.0);
        if y * y + z * z <= 1.0 {
            return [y, z];
        }
    }
}

fn f_monte_carlo(c: f64, samples: usize, seed: u64) -> Result<FEstimate> {
    if samples < MIN_F_SAMPLES {
        return Err(Error::invariant(format!(
            "Monte Carlo f(c) needs at least {MIN_F_SAMPLES} samples, got {samples}"
        )));
    }
    let blocks = samples.div_ceil(MC_BLOCK);
    let values: Vec<f64> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = rng_from_seed(derive_seed(seed, &[F_STREAM, b as u64]));
            let len = MC_BLOCK.min(samples - b * MC_BLOCK);
            (0..len)
                .map(|_| {
                    let w = unit_disc_point(&mut rng);
                    let x = unit_disc_point(&mut rng);
                    let y = unit_disc_point(&mut rng);
                    let z = unit_disc_point(&mut rng);
                    (c * ((w[0] - x[0]) * (y[0] - z[0]) + (w[1] - x[1]) * (y[1] - z[1]))).cos()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let s = SampleStats::from_samples(&values);
    Ok(FEstimate {
        estimate: s.mean,
        std_error: s.std_error,
        method: FMethod::MonteCarlo,
    })
}

/// `64/(9πc)`.
pub fn f_upper_bound(c: f64) -> f64 {
    64.0 / (9.0 * PI * c)
}

/// `E|v|⁴ = 2M² − M + M(M−1)²·f`. Any finite `f ≥ 0` is accepted so that a
/// bound above one can be substituted.
pub fn fourth_moment(m: usize, f: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invariant("M must be >= 1"));
    }
    if !(f.is_finite() && f >= 0.0) {
        return Err(Error::invariant(format!("f must be finite and >= 0, got {f}")));
    }
    let m = m as f64;
    Ok(2.0 * m * m - m + m * (m - 1.0).powi(2) * f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembledBound {
    pub c: f64,
    /// With `f` replaced by `64/(9πc)`.
    pub closed: f64,
    /// With the supplied numeric `f`, when given.
    pub tight: Option<f64>,
}

/// `(M³/4)·log₂(1 + γg/(2M²)) / E|v|⁴` with `c = 2|S|/(λd)`.
pub fn assembled_lower_bound(
    m: usize,
    gamma: f64,
    g: f64,
    area_m2: f64,
    lambda_d: f64,
    f_numeric: Option<f64>,
) -> Result<AssembledBound> {
    let s = area_m2 / lambda_d;
    if s.is_nan() || s < 1.0 {
        return Err(Error::invariant(format!("lower bound needs |S|/(λd) >= 1, got {s}")));
    }
    let c = 2.0 * s;
    let mf = m as f64;
    let numerator = mf.powi(3) / 4.0 * (gamma * g / (2.0 * mf * mf)).ln_1p() / LN_2;
    let closed = numerator / fourth_moment(m, f_upper_bound(c))?;
    let tight = match f_numeric {
        Some(f) => Some(numerator / fourth_moment(m, f)?),
        None => None,
    };
    Ok(AssembledBound { c, closed, tight })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMoments {
    /// `(1/M)·‖H̃H̃*‖_F²` over trials.
    pub fourth: SampleStats,
    /// Largest deviation of `(1/M)·tr(H̃H̃*)` from `M` over trials.
    pub second_max_deviation: f64,
}

/// Monte Carlo of `E|v|⁴` over uniform disc clusters.
pub fn empirical_fourth_moment(cfg: &ScenarioConfig, trials: usize, seed: u64) -> Result<EmpiricalMoments> {
    if trials < MIN_MOMENT_TRIALS {
        return Err(Error::invariant(format!(
            "empirical moments need at least {MIN_MOMENT_TRIALS} trials, got {trials}"
        )));
    }
    let m = cfg.streams as f64;
    let per_trial: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let h = draw_reduced_channel(cfg, seed, t)?;
            let gram = &h.entries * h.entries.adjoint();
            Ok((gram.norm_squared() / m, (h.entries.norm_squared() / m - m).abs()))
        })
        .collect::<Result<_>>()?;
    let fourth: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    Ok(EmpiricalMoments {
        fourth: SampleStats::from_samples(&fourth),
        second_max_deviation: per_trial.iter().map(|p| p.1).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub c: f64,
    pub streams: usize,
    pub f: FEstimate,
    pub f_monte_carlo: FEstimate,
    pub f_bound: f64,
    pub fourth_moment: f64,
    pub second_moment: f64,
    pub empirical: EmpiricalMoments,
    pub bound: AssembledBound,
}

impl MomentReport {
    pub fn to_report(&self) -> CsvReport {
        let mut r = CsvReport::new(
            "moments",
            &[
                "c", "M", "f_est", "f_se", "f_bound", "m4_closed", "m4_emp", "m4_se", "bound_closed", "bound_tight",
            ],
        );
        r.comment(format!("f_montecarlo={:?}", self.f_monte_carlo.estimate));
        r.comment(format!("f_montecarlo_se={:?}", self.f_monte_carlo.std_error));
        r.comment(format!("second_moment={:?}", self.second_moment));
        if self.f_bound > 1.0 {
            r.comment("f_bound exceeds 1 and is vacuous");
        }
        r.push(vec![
            self.c.into(),
            self.streams.into(),
            self.f.estimate.into(),
            self.f.std_error.into(),
            self.f_bound.into(),
            self.fourth_moment.into(),
            self.empirical.fourth.mean.into(),
            self.empirical.fourth.std_error.into(),
            self.bound.closed.into(),
            self.bound.tight.unwrap_or(f64::NAN).into(),
        ]);
        r
    }
}

/// Every moment quantity for one scenario.
pub fn moment_report(cfg: &ScenarioConfig, trials: usize, seed: u64) -> Result<MomentReport> {
    let c = cfg.bandwidth_c();
    let f = f_of_c(c, FMethod::BesselQuadrature, cfg.f_panels, seed)?;
    let f_mc = f_of_c(c, FMethod::MonteCarlo, cfg.f_samples, seed)?;
    let empirical = empirical_fourth_moment(cfg, trials, seed)?;
    let bound = assembled_lower_bound(
        cfg.streams,
        cfg.gamma(),
        cfg.g(),
        cfg.area_m2(),
        cfg.lambda_d(),
        Some(f.estimate),
    )?;
    Ok(MomentReport {
        c,
        streams: cfg.streams,
        f,
        f_monte_carlo: f_mc,
        f_bound: f_upper_bound(c),
        fourth_moment: fourth_moment(cfg.streams, f.estimate)?,
        second_moment: cfg.streams as f64,
        empirical,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkbudget::LinkBudget;
    use crate::numerics::bessel_j;
    use crate::scenario::{Geometry, PartitionLayout, Sampling};

    /// `E_{w,x}[2J₁(c‖w−x‖)/(c‖w−x‖)]²` by a tensor Gauss-Legendre rule over
    /// both discs in polar coordinates.
    fn four_dim_oracle(c: f64) -> f64 {
        let radial = GaussLegendre::on_interval(24, 0.0, 1.0);
        let angular = 48;
        let mut pts = Vec::new();
        for (r, w) in radial.nodes.iter().zip(&radial.weights) {
            for k in 0..angular {
                let t = 2.0 * PI * (k as f64 + 0.5) / angular as f64;
                pts.push(([r * t.cos(), r * t.sin()], w * r * 2.0 * PI / angular as f64 / PI));
            }
        }
        let mut acc = 0.0;
        for (a, wa) in &pts {
            for (b, wb) in &pts {
                let x = c * (a[0] - b[0]).hypot(a[1] - b[1]);
                let j = if x < 1e-12 { 1.0 } else { 2.0 * bessel_j(1, x) / x };
                acc += wa * wb * j * j;
            }
        }
        acc
    }

    fn scenario(m: usize, s_over_ld: f64) -> ScenarioConfig {
        let base = ScenarioConfig {
            budget: LinkBudget {
                wavelength_m: 0.01,
                range_m: 4e8,
                tx_aperture_m2: 10.0,
                rx_aperture_m2: 10.0,
                loss_factor: 1.0,
                power_w: 1.0,
                bandwidth_hz: 1e6,
                noise_psd_w_per_hz: 1e-20,
            },
            streams: m,
            geometry: Geometry::AreaOverLambdaD(s_over_ld),
            trials: 100,
            seed: 0,
            quadrature_order: None,
            max_azimuthal_order: None,
            cell_counts: vec![],
            partition: PartitionLayout::Shared,
            f_samples: 20_000,
            f_panels: 64,
            sampling: Sampling::Disc,
            scan_m: vec![],
            scan_s_over_ld: vec![],
            scan_gamma_g: vec![],
        };
        base.with_targets(m, s_over_ld, 8.0)
    }

    #[test]
    fn quadrature_matches_four_dimensional_rule() {
        for c in [0.5, 2.0, 5.0] {
            let q = f_of_c(c, FMethod::BesselQuadrature, 64, 0).unwrap().estimate;
            let o = four_dim_oracle(c);
            assert!((q - o).abs() < 1e-7, "c={c}: {q} vs {o}");
        }
    }

    #[test]
    fn zero_frequency_limit() {
        let f = f_of_c(1e-6, FMethod::BesselQuadrature, 8, 0).unwrap();
        assert!((f.estimate - 1.0).abs() < 1e-9);
        let mc = f_of_c(1e-6, FMethod::MonteCarlo, 1000, 0).unwrap();
        assert!((mc.estimate - 1.0).abs() < 1e-9);
    }

    #[test]
    fn methods_agree_within_three_sigma() {
        for (i, c) in [2.0, 10.0, 20.0].into_iter().enumerate() {
            let q = f_of_c(c, FMethod::BesselQuadrature, 64, 0).unwrap();
            let mc = f_of_c(c, FMethod::MonteCarlo, 200_000, 40 + i as u64).unwrap();
            assert!((q.estimate - mc.estimate).abs() < 3.0 * mc.std_error, "c={c}");
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let a = f_of_c(7.0, FMethod::MonteCarlo, 10_000, 3).unwrap();
        let b = f_of_c(7.0, FMethod::MonteCarlo, 10_000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_errors() {
        assert!(f_of_c(5000.0, FMethod::BesselQuadrature, 2, 0).is_err());
        assert!(f_of_c(5.0, FMethod::MonteCarlo, 99, 0).is_err());
        assert!(f_of_c(0.0, FMethod::BesselQuadrature, 64, 0).is_err());
    }

    #[test]
    fn bound_examples() {
        assert!((f_upper_bound(64.0 / (9.0 * PI)) - 1.0).abs() < 1e-15);
        assert!((f_upper_bound(1.0) - 2.263537).abs() < 1e-6);
        assert!((f_upper_bound(20.0) - 0.113177).abs() < 1e-6);
        assert_eq!(f_upper_bound(3.0), 2.0 * f_upper_bound(6.0));
    }

    #[test]
    fn numeric_f_below_bound_and_non_increasing() {
        let mut prev = f64::INFINITY;
        for c in [2.0, 5.0, 10.0, 20.0, 50.0] {
            let f = f_of_c(c, FMethod::BesselQuadrature, 64, 0).unwrap().estimate;
            assert!((0.0..=1.0).contains(&f));
            assert!(f <= prev);
            if c >= 64.0 / (9.0 * PI) {
                assert!(f <= f_upper_bound(c));
            }
            prev = f;
        }
    }

    #[test]
    fn fourth_moment_examples() {
        assert_eq!(fourth_moment(1, 0.7).unwrap(), 1.0);
        assert_eq!(fourth_moment(2, 0.0).unwrap(), 6.0);
        for m in 1..20 {
            for f in [0.0, 0.3, 1.0, 2.5] {
                assert!(fourth_moment(m, f).unwrap() >= (m * m) as f64);
            }
        }
        assert!(fourth_moment(2, -0.1).is_err());
        assert!(fourth_moment(0, 0.1).is_err());
    }

    #[test]
    fn assembled_bound_matches_capacity_module() {
        use crate::capacity::{expected_spectral_efficiency_lower_bound, CapacityInputs};
        let b = assembled_lower_bound(2, 8.0, 1.0, 10.0, 1.0, None).unwrap();
        assert!((b.closed - 0.32122).abs() < 5e-6);
        for (m, s, gg) in [(1usize, 1.0, 3.0), (3, 1.0, 100.0), (8, 4.5, 1e4), (16, 30.0, 10.0)] {
            let inputs = CapacityInputs::from_geometry(gg, 1.0, m, s, 1.0).unwrap();
            let cap = expected_spectral_efficiency_lower_bound(&inputs).unwrap();
            let f = f_of_c(2.0 * s, FMethod::BesselQuadrature, 64, 0).unwrap().estimate;
            let asm = assembled_lower_bound(m, gg, 1.0, s, 1.0, Some(f)).unwrap();
            assert!((asm.closed / cap - 1.0).abs() < 1e-12);
            assert!(asm.tight.unwrap() >= asm.closed * (1.0 - 1e-12));
        }
        let one = assembled_lower_bound(1, 6.0, 1.0, 3.0, 1.0, Some(0.9)).unwrap();
        assert!((one.closed - 0.25 * 4f64.log2()).abs() < 1e-15);
        assert_eq!(one.tight, Some(one.closed));
        assert!(assembled_lower_bound(2, 6.0, 1.0, 0.5, 1.0, None).is_err());
    }

    #[test]
    fn single_stream_moment_is_one() {
        let e = empirical_fourth_moment(&scenario(1, 3.0), 100, 0).unwrap();
        // |e^{iφ}|⁴ is 1 up to rounding of the computed phasor
        assert!((e.fourth.mean - 1.0).abs() < 1e-14);
        assert!(e.fourth.std_error < 1e-15);
    }

    #[test]
    fn second_moment_is_exact_and_fourth_matches_closed_form() {
        let cfg = scenario(3, 5.0);
        let e = empirical_fourth_moment(&cfg, 4000, 1).unwrap();
        assert!(e.second_max_deviation < 1e-12);
        let f = f_of_c(cfg.bandwidth_c(), FMethod::BesselQuadrature, 64, 0).unwrap().estimate;
        let closed = fourth_moment(3, f).unwrap();
        assert!((e.fourth.mean - closed).abs() < 3.0 * e.fourth.std_error, "{} vs {closed}", e.fourth.mean);
    }

    #[test]
    fn report_row() {
        let r = moment_report(&scenario(2, 10.0), 200, 0).unwrap();
        assert_eq!(r.to_report().rows.len(), 1);
        assert!(r.fourth_moment >= r.second_moment * r.second_moment);
        assert!(r.bound.tight.unwrap() >= r.bound.closed);
    }
}
