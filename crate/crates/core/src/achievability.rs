//! Constructive achievability: distributed antennas built from sampled
//! prolate modes on a partition of the disc.
//!
//! The disc is cut into `N` cells of equal area `|S|/N`. Antenna `m` places a
//! small element disc of area `A/N` at every cell centre, excited with the
//! mode value `p_m` there and scaled by `√(|S|/A)`, so its total element area
//! is exactly the aperture `A`. With the kernel held constant over each pair
//! of cells, the coupling between receive antenna `m` and transmit antenna
//! `n` is
//!
//! ```text
//! E_mn = √(A_T A_R)/|S| · Σ_ij a_i a_j conj(p_m(v_i)) H(v_i, u_j) p_n(u_j),
//! H(v, u) = √L/(λd) · e^{i2π⟨v,u⟩/(λd)},    a_i = |S|/N,
//! ```
//!
//! and the normalized matrix is `H̃_N = (M/√g)·E`. As `N` grows, `E` tends to
//! `√(A_T A_R)/|S| · diag(ν_m)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use crate::capacity::uniform_spectral_efficiency;
use crate::channel::{singular_spectrum, ChannelMatrix, ChannelMeta, MatrixKind};
use crate::error::{Error, Result};
use crate::prolate::{assemble_operator_spectrum, OperatorSpectrum, ProlateProblem};
use crate::report::CsvReport;
use crate::scenario::{PartitionLayout, ScenarioConfig};

/// Rotation applied to the receive partition in the independent layout.
pub const INDEPENDENT_ROTATION: f64 = 0.7;
/// Receive cell count relative to transmit in the independent layout.
pub const INDEPENDENT_CELL_RATIO: f64 = 1.1;

/// An annular sector `r_inner ≤ r ≤ r_outer`, `phi_start ≤ φ < phi_start + phi_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub center: [f64; 2],
    pub area: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub phi_start: f64,
    pub phi_width: f64,
}

impl Cell {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let r = p[0].hypot(p[1]);
        if r < self.r_inner || r >= self.r_outer {
            return false;
        }
        if self.phi_width >= TAU {
            return true;
        }
        let phi = (p[1].atan2(p[0]) - self.phi_start).rem_euclid(TAU);
        phi < self.phi_width
    }

    /// A lower bound on the distance from the centre to the cell boundary.
    pub fn inscribed_radius(&self) -> f64 {
        let rho = self.center[0].hypot(self.center[1]);
        let radial = (self.r_outer - rho).min(if self.r_inner > 0.0 { rho - self.r_inner } else { f64::INFINITY });
        if self.phi_width >= TAU {
            return radial;
        }
        // distance to the supporting lines of the two straight edges
        let half = (0.5 * self.phi_width).min(0.5 * PI);
        radial.min(rho * half.sin())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscPartition {
    pub cells: Vec<Cell>,
    pub disc_radius_m: f64,
}

impl DiscPartition {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn total_area(&self) -> f64 {
        crate::numerics::pairwise_sum(&self.cells.iter().map(|c| c.area).collect::<Vec<_>>())
    }

    pub fn locate(&self, p: [f64; 2]) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(p))
    }
}

/// Equal-area polar partition into `N` cells.
pub fn build_partition(disc_radius_m: f64, n: usize) -> Result<DiscPartition> {
    build_partition_rotated(disc_radius_m, n, 0.0)
}

/// As [`build_partition`], with every ring rotated by `rotation` radians.
///
/// A central disc of area `|S|/N` is surrounded by rings whose widths are
/// close to the cell side `√(|S|/N)`. Ring `k` holds `n_k` equal sectors,
/// with `n_k` proportional to its area, and its outer radius solves
/// `r_k² = r_{k−1}² + n_k R²/N`, so every cell has area exactly `πR²/N`.
pub fn build_partition_rotated(disc_radius_m: f64, n: usize, rotation: f64) -> Result<DiscPartition> {
    if !(disc_radius_m.is_finite() && disc_radius_m > 0.0) {
        return Err(Error::invariant(format!("disc radius must be > 0, got {disc_radius_m}")));
    }
    if n == 0 {
        return Err(Error::invariant("partition needs at least one cell"));
    }
    let r = disc_radius_m;
    let cell_area = PI * r * r / n as f64;
    let r0 = r / (n as f64).sqrt();
    let mut cells = vec![Cell {
        center: [0.0, 0.0],
        area: cell_area,
        r_inner: 0.0,
        r_outer: r0,
        phi_start: rotation,
        phi_width: TAU,
    }];
    if n == 1 {
        cells[0].r_outer = r;
        return Ok(DiscPartition { cells, disc_radius_m });
    }
    let rest = n - 1;
    let side = cell_area.sqrt();
    let rings = (((r - r0) / side).round() as usize).clamp(1, rest);
    // provisional equal-width rings decide how many cells each one gets
    let b = |k: usize| r0 + (r - r0) * k as f64 / rings as f64;
    let total = r * r - r0 * r0;
    let mut counts = Vec::with_capacity(rings);
    let mut assigned = 0usize;
    for k in 1..=rings {
        let cum = (b(k) * b(k) - r0 * r0) / total;
        let upto = if k == rings { rest } else { (cum * rest as f64).round() as usize };
        let nk = upto.saturating_sub(assigned);
        if nk == 0 {
            return Err(Error::invariant(format!("ring {k} received no cells for N = {n}")));
        }
        counts.push(nk);
        assigned += nk;
    }
    let mut inner2 = r0 * r0;
    let mut used = 1usize;
    for (k, &nk) in counts.iter().enumerate() {
        used += nk;
        let outer2 = if used == n { r * r } else { r * r * used as f64 / n as f64 };
        let (r1, r2) = (inner2.sqrt(), outer2.sqrt());
        let width = TAU / nk as f64;
        let offset = rotation + 0.5 * (k + 1) as f64 * width;
        for j in 0..nk {
            let start = offset + j as f64 * width;
            let mid = start + 0.5 * width;
            // centroid when it lies inside the sector; annuli and very wide
            // sectors fall back to the area-median radius
            let median = (0.5 * (r1 * r1 + r2 * r2)).sqrt();
            let half = 0.5 * width;
            let centroid = 2.0 / 3.0 * (r2.powi(3) - r1.powi(3)) / (r2 * r2 - r1 * r1) * half.sin() / half;
            let rho = if nk > 1 && centroid > r1 && centroid < r2 { centroid } else { median };
            cells.push(Cell {
                center: [rho * mid.cos(), rho * mid.sin()],
                area: cell_area,
                r_inner: r1,
                r_outer: r2,
                phi_start: start.rem_euclid(TAU),
                phi_width: if nk == 1 { TAU } else { width },
            });
        }
        inner2 = outer2;
    }
    Ok(DiscPartition { cells, disc_radius_m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Transmit,
    Receive,
}

/// `M` distributed antennas on one partition. `weights[(i, m)] = p_m(centre_i)`.
#[derive(Debug, Clone)]
pub struct SimpleAntennaSet {
    pub mode_count: usize,
    pub side: Side,
    pub centers: Vec<[f64; 2]>,
    pub cell_areas: Vec<f64>,
    pub weights: DMatrix<Complex64>,
    pub element_area: f64,
    pub aperture_m2: f64,
    /// `√(|S|/A)`.
    pub normalization: f64,
    /// `max |G − I|` for `G_mn = Σ_i a_i conj(p_m(u_i)) p_n(u_i)`.
    pub gram_defect: f64,
    pub disc_radius_m: f64,
}

impl SimpleAntennaSet {
    /// Sum of all element areas; equals the aperture.
    pub fn total_element_area(&self) -> f64 {
        self.element_area * self.centers.len() as f64
    }
}

pub fn build_simple_antennas(
    partition: &DiscPartition,
    modes: &OperatorSpectrum,
    m: usize,
    aperture_m2: f64,
    side: Side,
) -> Result<SimpleAntennaSet> {
    if m == 0 || m > modes.modes.len() {
        return Err(Error::invariant(format!(
            "requested {m} antennas but {} modes are available",
            modes.modes.len()
        )));
    }
    if (modes.scaling.disc_radius_m - partition.disc_radius_m).abs() > 1e-12 * partition.disc_radius_m {
        return Err(Error::invariant("partition and prolate modes use different discs"));
    }
    if !(aperture_m2.is_finite() && aperture_m2 > 0.0) {
        return Err(Error::invariant(format!("aperture must be > 0, got {aperture_m2}")));
    }
    let n = partition.cell_count();
    let element_area = aperture_m2 / n as f64;
    let element_radius = (element_area / PI).sqrt();
    if let Some((i, c)) = partition
        .cells
        .iter()
        .enumerate()
        .find(|(_, c)| c.inscribed_radius() < element_radius)
    {
        return Err(Error::invariant(format!(
            "element disc of radius {element_radius} m does not fit in cell {i} (room {} m)",
            c.inscribed_radius()
        )));
    }
    let funcs = (0..m).map(|k| modes.mode_function(k)).collect::<Result<Vec<_>>>()?;
    let centers: Vec<[f64; 2]> = partition.cells.iter().map(|c| c.center).collect();
    let cell_areas: Vec<f64> = partition.cells.iter().map(|c| c.area).collect();
    let weights = DMatrix::from_fn(n, m, |i, k| funcs[k].eval(centers[i]));
    let mut gram_defect = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let g: Complex64 = (0..n)
                .map(|i| weights[(i, a)].conj() * weights[(i, b)] * cell_areas[i])
                .sum();
            let want = if a == b { 1.0 } else { 0.0 };
            gram_defect = gram_defect.max((g - want).norm());
        }
    }
    let area = PI * partition.disc_radius_m.powi(2);
    Ok(SimpleAntennaSet {
        mode_count: m,
        side,
        centers,
        cell_areas,
        weights,
        element_area,
        aperture_m2,
        normalization: (area / aperture_m2).sqrt(),
        gram_defect,
        disc_radius_m: partition.disc_radius_m,
    })
}

/// `H̃_N = (M/√g)·E`, which reduces to
/// `(M/|S|)·Σ_ij a_i a_j conj(p_m(v_i)) e^{i2π⟨v_i,u_j⟩/(λd)} p_n(u_j)`.
pub fn discrete_channel_matrix(
    tx: &SimpleAntennaSet,
    rx: &SimpleAntennaSet,
    wavelength_m: f64,
    range_m: f64,
) -> Result<ChannelMatrix> {
    if tx.side != Side::Transmit || rx.side != Side::Receive {
        return Err(Error::invariant("antenna sets passed on the wrong sides"));
    }
    if tx.mode_count != rx.mode_count {
        return Err(Error::invariant(format!(
            "transmit has {} antennas, receive has {}",
            tx.mode_count, rx.mode_count
        )));
    }
    if (tx.disc_radius_m - rx.disc_radius_m).abs() > 1e-12 * tx.disc_radius_m {
        return Err(Error::invariant("transmit and receive discs differ"));
    }
    let m = tx.mode_count;
    let ld = wavelength_m * range_m;
    let area = PI * tx.disc_radius_m.powi(2);
    // a_j p_n(u_j), laid out per cell for the inner loop
    let tx_w: Vec<Vec<Complex64>> = (0..tx.centers.len())
        .map(|j| (0..m).map(|k| tx.weights[(j, k)] * tx.cell_areas[j]).collect())
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..rx.centers.len())
        .into_par_iter()
        .map(|i| {
            let v = rx.centers[i];
            let mut acc = vec![Complex64::new(0.0, 0.0); m];
            for (u, w) in tx.centers.iter().zip(&tx_w) {
                let h = Complex64::from_polar(1.0, TAU * (v[0] * u[0] + v[1] * u[1]) / ld);
                for (a, &wk) in acc.iter_mut().zip(w) {
                    *a += h * wk;
                }
            }
            acc
        })
        .collect();
    let scale = m as f64 / area;
    let mut entries = DMatrix::<Complex64>::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        let ai = rx.cell_areas[i];
        for a in 0..m {
            let left = rx.weights[(i, a)].conj() * ai;
            for b in 0..m {
                entries[(a, b)] += left * row[b];
            }
        }
    }
    entries *= Complex64::new(scale, 0.0);
    ChannelMatrix::new(
        entries,
        MatrixKind::Discretized,
        ChannelMeta {
            wavelength_m,
            range_m,
            tx_seed: None,
            rx_seed: None,
        },
    )
}

/// `Σ_{m≤M} log₂(1 + (γ/M)·(A_T A_R/|S|²)·|ν_m|²)`.
pub fn continuum_limit(modes: &OperatorSpectrum, m: usize, gamma: f64, tx_aperture: f64, rx_aperture: f64) -> f64 {
    let area = PI * modes.scaling.disc_radius_m.powi(2);
    let k = gamma / m as f64 * tx_aperture * rx_aperture / (area * area);
    modes.spectrum.values[..m.min(modes.spectrum.len())]
        .iter()
        .map(|&nu| (k * nu).ln_1p() / std::f64::consts::LN_2)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub n: usize,
    pub n_rx: usize,
    pub xi_discrete: f64,
    pub xi_limit: f64,
    pub gap: f64,
    pub gram_defect: f64,
    /// Largest relative error of the singular values of `H̃_N·√g/M` against
    /// `√(A_T A_R)/|S|·|ν_m|`.
    pub singular_value_error: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceCurve {
    pub points: Vec<ConvergencePoint>,
    pub streams: usize,
    pub layout: PartitionLayout,
    pub bandwidth_c: f64,
    /// `⌈(|S|/λd)²⌉`, shown as a reference cell count.
    pub nyquist_reference_n: usize,
}

impl ConvergenceCurve {
    /// Gap non-increasing over the last three points.
    pub fn tail_non_increasing(&self) -> bool {
        let k = self.points.len();
        let tail = &self.points[k.saturating_sub(3)..];
        tail.windows(2).all(|w| w[1].gap <= w[0].gap)
    }

    pub fn finest(&self) -> Option<&ConvergencePoint> {
        self.points.last()
    }

    pub fn to_report(&self) -> CsvReport {
        let mut r = CsvReport::new("convergence", &["N", "xi_discrete", "xi_limit", "gap", "gram_defect"]);
        r.comment(format!("streams={}", self.streams));
        r.comment(format!("c={:?}", self.bandwidth_c));
        r.comment(format!(
            "layout={}",
            match self.layout {
                PartitionLayout::Shared => "shared",
                PartitionLayout::Independent => "independent",
            }
        ));
        r.comment(format!("nyquist_reference_N={}", self.nyquist_reference_n));
        for p in &self.points {
            r.push(vec![p.n.into(), p.xi_discrete.into(), p.xi_limit.into(), p.gap.into(), p.gram_defect.into()]);
        }
        r
    }
}

/// Prolate problem for a scenario, honouring configured truncations.
pub fn prolate_problem_for(cfg: &ScenarioConfig) -> ProlateProblem {
    let mut p = ProlateProblem::with_defaults(cfg.bandwidth_c());
    if let Some(q) = cfg.quadrature_order {
        p.quadrature_order = q;
        p.radial_modes_per_order = q;
    }
    if let Some(n) = cfg.max_azimuthal_order {
        p.max_azimuthal_order = n;
    }
    p
}

pub fn operator_spectrum_for(cfg: &ScenarioConfig) -> Result<OperatorSpectrum> {
    assemble_operator_spectrum(
        &prolate_problem_for(cfg),
        cfg.budget.loss_factor,
        cfg.disc_radius_m(),
        cfg.budget.wavelength_m,
        cfg.budget.range_m,
    )
}

/// Discretized spectral efficiency against the limit for each cell count.
pub fn convergence_curve(
    cfg: &ScenarioConfig,
    cell_counts: &[usize],
    layout: PartitionLayout,
) -> Result<ConvergenceCurve> {
    let modes = operator_spectrum_for(cfg)?;
    convergence_curve_with(cfg, &modes, cell_counts, layout)
}

/// As [`convergence_curve`], reusing a solved operator spectrum.
pub fn convergence_curve_with(
    cfg: &ScenarioConfig,
    modes: &OperatorSpectrum,
    cell_counts: &[usize],
    layout: PartitionLayout,
) -> Result<ConvergenceCurve> {
    if cell_counts.is_empty() {
        return Err(Error::invariant("convergence curve needs at least one cell count"));
    }
    let m = cfg.streams;
    let radius = cfg.disc_radius_m();
    let area = cfg.area_m2();
    let b = &cfg.budget;
    let gamma = cfg.gamma();
    let g = cfg.g();
    let limit = continuum_limit(modes, m, gamma, b.tx_aperture_m2, b.rx_aperture_m2);
    let target_sv: Vec<f64> = modes.spectrum.values[..m]
        .iter()
        .map(|nu| (b.tx_aperture_m2 * b.rx_aperture_m2).sqrt() / area * nu.sqrt())
        .collect();
    let mut points = Vec::with_capacity(cell_counts.len());
    for &n in cell_counts {
        let tx_part = build_partition(radius, n)?;
        let (rx_part, n_rx) = match layout {
            PartitionLayout::Shared => (tx_part.clone(), n),
            PartitionLayout::Independent => {
                let n_rx = (n as f64 * INDEPENDENT_CELL_RATIO).round() as usize;
                (build_partition_rotated(radius, n_rx, INDEPENDENT_ROTATION)?, n_rx)
            }
        };
        let tx = build_simple_antennas(&tx_part, modes, m, b.tx_aperture_m2, Side::Transmit)?;
        let rx = build_simple_antennas(&rx_part, modes, m, b.rx_aperture_m2, Side::Receive)?;
        let h = discrete_channel_matrix(&tx, &rx, b.wavelength_m, b.range_m)?;
        let spectrum = singular_spectrum(&h)?;
        let xi = uniform_spectral_efficiency(&spectrum, gamma, g, m)?;
        let sv_scale = g.sqrt() / m as f64;
        let singular_value_error = spectrum
            .values
            .iter()
            .zip(&target_sv)
            .map(|(&s2, &t)| (s2.sqrt() * sv_scale - t).abs() / t)
            .fold(0.0, f64::max);
        points.push(ConvergencePoint {
            n,
            n_rx,
            xi_discrete: xi,
            xi_limit: limit,
            gap: (xi - limit).abs() / limit,
            gram_defect: tx.gram_defect.max(rx.gram_defect),
            singular_value_error,
        });
    }
    let s = cfg.s_over_ld();
    Ok(ConvergenceCurve {
        points,
        streams: m,
        layout,
        bandwidth_c: cfg.bandwidth_c(),
        nyquist_reference_n: crate::numerics::ceil_snapped(s * s) as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_disc_cluster;
    use crate::linkbudget::LinkBudget;
    use crate::scenario::Geometry;

    fn scenario(s_over_ld: f64, m: usize, gamma_g: f64) -> ScenarioConfig {
        let budget = LinkBudget {
            wavelength_m: 0.01,
            range_m: 4e8,
            tx_aperture_m2: 10.0,
            rx_aperture_m2: 10.0,
            loss_factor: 0.5,
            power_w: 1.0,
            bandwidth_hz: 1e6,
            noise_psd_w_per_hz: 1e-20,
        };
        let base = ScenarioConfig {
            budget,
            streams: m,
            geometry: Geometry::AreaOverLambdaD(s_over_ld),
            trials: 1,
            seed: 0,
            quadrature_order: None,
            max_azimuthal_order: None,
            cell_counts: vec![],
            partition: PartitionLayout::Shared,
            f_samples: 1,
            f_panels: 1,
            sampling: crate::scenario::Sampling::Disc,
            scan_m: vec![],
            scan_s_over_ld: vec![],
            scan_gamma_g: vec![],
        };
        base.with_targets(m, s_over_ld, gamma_g)
    }

    #[test]
    fn single_cell_is_whole_disc() {
        let p = build_partition(2.0, 1).unwrap();
        assert_eq!(p.cell_count(), 1);
        assert_eq!(p.cells[0].center, [0.0, 0.0]);
        assert!((p.total_area() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn partitions_have_exact_counts_and_equal_areas() {
        for n in [2usize, 3, 5, 7, 10, 64, 100, 257, 1024, 4096] {
            let p = build_partition(1.0, n).unwrap();
            assert_eq!(p.cell_count(), n);
            assert!((p.total_area() - PI).abs() < 1e-9 * PI);
            for c in &p.cells {
                assert!((c.area / (PI / n as f64) - 1.0).abs() < 0.1);
                // geometric area of the sector agrees with the nominal one
                let geo = 0.5 * c.phi_width * (c.r_outer * c.r_outer - c.r_inner * c.r_inner);
                assert!((geo / c.area - 1.0).abs() < 1e-9, "n={n}");
                assert!(c.contains(c.center), "n={n} centre outside its cell");
                assert!(c.inscribed_radius() > 0.0);
            }
        }
    }

    #[test]
    fn cells_tile_the_disc() {
        let p = build_partition_rotated(3.0, 200, 0.4).unwrap();
        let pts = sample_disc_cluster(3.0, 20_000, 8).unwrap();
        let mut hits = vec![0usize; p.cell_count()];
        for q in &pts.nodes {
            let owners: Vec<usize> = (0..p.cell_count()).filter(|&i| p.cells[i].contains(*q)).collect();
            assert_eq!(owners.len(), 1, "point {q:?} in {owners:?}");
            hits[owners[0]] += 1;
        }
        // each cell receives about 100 points
        assert!(hits.iter().all(|&h| h > 40 && h < 180));
    }

    #[test]
    fn constant_mode_gives_equal_weights() {
        let cfg = scenario(1e-3, 1, 1.0);
        let modes = operator_spectrum_for(&cfg).unwrap();
        let part = build_partition(cfg.disc_radius_m(), 64).unwrap();
        let set = build_simple_antennas(&part, &modes, 1, 10.0, Side::Transmit).unwrap();
        let w0 = set.weights[(0, 0)];
        for i in 0..64 {
            assert!((set.weights[(i, 0)] - w0).norm() < 1e-6 * w0.norm());
        }
        assert!(set.gram_defect < 1e-6);
        assert!((set.total_element_area() - 10.0).abs() < 1e-9 * 10.0);
    }

    #[test]
    fn oversized_aperture_is_rejected() {
        let cfg = scenario(3.0, 1, 1.0);
        let modes = operator_spectrum_for(&cfg).unwrap();
        let part = build_partition(cfg.disc_radius_m(), 16).unwrap();
        assert!(build_simple_antennas(&part, &modes, 1, cfg.area_m2(), Side::Transmit).is_err());
        assert!(build_simple_antennas(&part, &modes, 10_000, 1.0, Side::Transmit).is_err());
    }

    #[test]
    fn small_region_single_stream_reaches_siso() {
        let cfg = scenario(1e-3, 1, 50.0);
        let curve = convergence_curve(&cfg, &[16, 64], PartitionLayout::Shared).unwrap();
        let siso = (1.0f64 + cfg.gamma_g()).log2();
        let p = curve.finest().unwrap();
        assert!((p.xi_limit / siso - 1.0).abs() < 1e-6);
        assert!((p.xi_discrete / siso - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_stream_fine_cells_within_one_percent() {
        // cell diameter ~ 2√(|S|/(πN)) must drop below λd/(8R)
        let cfg = scenario(3.0, 1, 100.0);
        let r = cfg.disc_radius_m();
        let need = cfg.lambda_d() / (8.0 * r);
        let n = 1024;
        let diam = 2.0 * (cfg.area_m2() / (PI * n as f64)).sqrt();
        assert!(diam < need);
        let curve = convergence_curve(&cfg, &[n], PartitionLayout::Shared).unwrap();
        assert!(curve.points[0].gap < 0.01);
    }

    #[test]
    fn off_diagonal_coupling_vanishes() {
        let cfg = scenario(3.0, 4, 100.0);
        let modes = operator_spectrum_for(&cfg).unwrap();
        let r = cfg.disc_radius_m();
        let mut prev = f64::INFINITY;
        for n in [64usize, 256, 1024] {
            let part = build_partition(r, n).unwrap();
            let tx = build_simple_antennas(&part, &modes, 4, 10.0, Side::Transmit).unwrap();
            let rx = build_simple_antennas(&part, &modes, 4, 10.0, Side::Receive).unwrap();
            let h = discrete_channel_matrix(&tx, &rx, cfg.budget.wavelength_m, cfg.budget.range_m).unwrap();
            let diag = (0..4).map(|k| h.entries[(k, k)].norm()).fold(f64::INFINITY, f64::min);
            let mut off = 0.0f64;
            for a in 0..4 {
                for b in 0..4 {
                    if a != b {
                        off = off.max(h.entries[(a, b)].norm());
                        // shared partition: kernel symmetry
                        assert!((h.entries[(a, b)].norm() - h.entries[(b, a)].norm()).abs() < 1e-9 * diag);
                    }
                }
            }
            assert!(off / diag < prev);
            prev = off / diag;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn convergence_to_limit() {
        let cfg = scenario(3.0, 4, 100.0);
        let curve = convergence_curve(&cfg, &[64, 256, 1024], PartitionLayout::Shared).unwrap();
        assert!(curve.tail_non_increasing());
        assert!(curve.finest().unwrap().gap < 0.02);
        assert!(curve.finest().unwrap().singular_value_error < 0.02);
        assert_eq!(curve.nyquist_reference_n, 9);
        let r = curve.to_report();
        assert_eq!(r.rows.len(), 3);
    }

    #[test]
    fn plateau_limit_matches_rough_closed_form() {
        // M = ℳ = 9 at c = 6: the plateau estimate ℳ·log₂(1+γg/(Mℳ)) assumes
        // every |ν|² equals L, which overstates the modes past the edge.
        let cfg = scenario(3.0, 9, 100.0);
        let modes = operator_spectrum_for(&cfg).unwrap();
        let b = &cfg.budget;
        let limit = continuum_limit(&modes, 9, cfg.gamma(), b.tx_aperture_m2, b.rx_aperture_m2);
        let approx = 9.0 * (1.0 + cfg.gamma_g() / 81.0).log2();
        assert!(limit <= approx);
        assert!(limit / approx > 0.8, "{limit} vs {approx}");
    }
}
