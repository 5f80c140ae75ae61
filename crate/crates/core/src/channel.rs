//! Phase-only channel matrices and their singular spectra.
//!
//! `ChannelMatrix` holds the normalized coupling matrix: rows index receive
//! nodes, columns index transmit nodes, and the common amplitude `√(g/M²)`
//! is carried separately by the callers. The full matrix uses the parabolic
//! path-length model; the reduced matrix keeps only the cross term
//! `e^{i2π⟨v, u⟩/(λd)}`. The two differ by unit-modulus diagonal factors on
//! each side, so they share singular values.

use std::ops::{Add, Div, Neg};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{check_range_ratio, DiscCluster, NodeCluster};
use crate::numerics::phase::{phasor, DoubleDouble};
use crate::report::CsvReport;

pub const UNIT_MODULUS_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-9;

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Full,
    Reduced,
    Discretized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMeta {
    pub wavelength_m: f64,
    pub range_m: f64,
    pub tx_seed: Option<u64>,
    pub rx_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<Complex64>,
    pub kind: MatrixKind,
    pub meta: ChannelMeta,
}

impl ChannelMatrix {
    pub fn new(entries: DMatrix<Complex64>, kind: MatrixKind, meta: ChannelMeta) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::invariant(format!(
                "channel matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if kind != MatrixKind::Discretized {
            if let Some(z) = entries
                .iter()
                .find(|z| (z.norm() - 1.0).abs() > UNIT_MODULUS_TOL)
            {
                return Err(Error::invariant(format!(
                    "phase-only channel entry {z} is not unit modulus"
                )));
            }
        }
        Ok(Self {
            entries,
            kind,
            meta,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn to_report(&self) -> CsvReport {
        let mut r = CsvReport::new("matrix", &["i", "j", "re", "im"]);
        r.comment(format!("kind={:?}", self.kind));
        for i in 0..self.entries.nrows() {
            for j in 0..self.entries.ncols() {
                let z = self.entries[(i, j)];
                r.push(vec![i.into(), j.into(), z.re.into(), z.im.into()]);
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumContext {
    MatrixSingular,
    OperatorEigen,
    RadialEigen,
}

/// Non-negative values in non-increasing order, with their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    pub values: Vec<f64>,
    pub norm_sq: f64,
    pub context: SpectrumContext,
}

impl EigenSpectrum {
    /// Sorts `values` and records their sum. Tiny negative values from
    /// roundoff (above `-1e-12` of the largest magnitude) are clamped to 0.
    pub fn from_values(mut values: Vec<f64>, context: SpectrumContext) -> Result<Self> {
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::numerical("spectrum", format!("non-finite value {v}")));
            }
            if *v < 0.0 {
                if *v < -1e-12 * scale {
                    return Err(Error::invariant(format!("negative spectrum value {v}")));
                }
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let norm_sq = crate::numerics::pairwise_sum(&values);
        Ok(Self {
            values,
            norm_sq,
            context,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_report(&self) -> CsvReport {
        let mut r = CsvReport::new("spectrum", &["rank", "value"]);
        r.comment(format!("context={:?}", self.context));
        r.comment(format!("norm_sq={:?}", self.norm_sq));
        for (k, v) in self.values.iter().enumerate() {
            r.push(vec![(k + 1).into(), (*v).into()]);
        }
        r
    }
}

fn check_same_size(tx: usize, rx: usize) -> Result<()> {
    if tx != rx {
        return Err(Error::invariant(format!(
            "transmit and receive clusters differ in size ({tx} vs {rx})"
        )));
    }
    Ok(())
}

fn squared_radius(y: f64, z: f64) -> DoubleDouble {
    DoubleDouble::product(y, y).add(DoubleDouble::product(z, z))
}

/// Cycles of the lateral cross term `(y_R y_T + z_R z_T)/(λd)`.
fn cross_cycles(v: [f64; 2], u: [f64; 2], lambda_d: f64) -> DoubleDouble {
    DoubleDouble::product(v[0], u[0])
        .add(DoubleDouble::product(v[1], u[1]))
        .div(lambda_d)
}

/// `H_ij = e^{−i2π d_ij/λ}` with `d_ij` the parabolic path-length deviation,
/// evaluated as the product of the along-axis, radial and cross-term phases.
pub fn build_full_matrix(
    tx: &NodeCluster,
    rx: &NodeCluster,
    d: f64,
    lambda: f64,
) -> Result<ChannelMatrix> {
    check_same_size(tx.count(), rx.count())?;
    check_positive("wavelength", lambda)?;
    for u in &tx.nodes {
        for v in &rx.nodes {
            check_range_ratio(u, v, d)?;
        }
    }
    let ld = lambda * d;
    let m = tx.count();
    let entries = DMatrix::from_fn(m, m, |i, j| {
        let v = &rx.nodes[i];
        let u = &tx.nodes[j];
        let along = DoubleDouble::diff(v[0], u[0]).div(lambda);
        let radial = squared_radius(v[1], v[2])
            .add(squared_radius(u[1], u[2]))
            .div(2.0 * ld);
        let cross = cross_cycles([v[1], v[2]], [u[1], u[2]], ld);
        phasor(along.add(radial).neg().add(cross))
    });
    ChannelMatrix::new(
        entries,
        MatrixKind::Full,
        ChannelMeta {
            wavelength_m: lambda,
            range_m: d,
            tx_seed: tx.seed,
            rx_seed: rx.seed,
        },
    )
}

/// `H̃_ij = e^{i2π(y_R,i·y_T,j + z_R,i·z_T,j)/(λd)}`.
pub fn build_reduced_matrix(
    tx: &DiscCluster,
    rx: &DiscCluster,
    lambda: f64,
    d: f64,
) -> Result<ChannelMatrix> {
    check_same_size(tx.count(), rx.count())?;
    check_positive("wavelength", lambda)?;
    check_positive("range", d)?;
    let ld = lambda * d;
    let m = tx.count();
    let entries = DMatrix::from_fn(m, m, |i, j| phasor(cross_cycles(rx.nodes[i], tx.nodes[j], ld)));
    ChannelMatrix::new(
        entries,
        MatrixKind::Reduced,
        ChannelMeta {
            wavelength_m: lambda,
            range_m: d,
            tx_seed: tx.seed,
            rx_seed: rx.seed,
        },
    )
}

/// Unit-modulus vectors `(h_T, h_R)` such that
/// `H = diag(h_R) · H̃ · diag(conj h_T)`.
pub fn hadamard_factors(
    tx: &NodeCluster,
    rx: &NodeCluster,
    lambda: f64,
    d: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    check_positive("wavelength", lambda)?;
    check_positive("range", d)?;
    let ld = lambda * d;
    let h_t = tx
        .nodes
        .iter()
        .map(|u| {
            let c = DoubleDouble::from_f64(u[0])
                .div(lambda)
                .add(squared_radius(u[1], u[2]).div(2.0 * ld).neg());
            phasor(c.neg())
        })
        .collect();
    let h_r = rx
        .nodes
        .iter()
        .map(|v| {
            let c = DoubleDouble::from_f64(v[0])
                .div(lambda)
                .add(squared_radius(v[1], v[2]).div(2.0 * ld));
            phasor(c.neg())
        })
        .collect();
    Ok((h_t, h_r))
}

/// `diag(h_R) · H̃ · diag(conj h_T)`.
pub fn reconstruct_full(
    reduced: &DMatrix<Complex64>,
    h_t: &[Complex64],
    h_r: &[Complex64],
) -> DMatrix<Complex64> {
    DMatrix::from_fn(reduced.nrows(), reduced.ncols(), |i, j| {
        h_r[i] * reduced[(i, j)] * h_t[j].conj()
    })
}

/// Squared singular values, non-increasing.
pub fn singular_spectrum(m: &ChannelMatrix) -> Result<EigenSpectrum> {
    let values = squared_singular_values(&m.entries)?;
    let spectrum = EigenSpectrum::from_values(values, SpectrumContext::MatrixSingular)?;
    if m.kind != MatrixKind::Discretized {
        let expect = (m.size() * m.size()) as f64;
        if (spectrum.norm_sq - expect).abs() > NORM_TOL * expect {
            return Err(Error::numerical(
                "singular_spectrum",
                format!("sum of squared singular values {} != M^2 = {expect}", spectrum.norm_sq),
            ));
        }
    }
    Ok(spectrum)
}

pub(crate) fn squared_singular_values(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let svd = a
        .clone()
        .try_svd(false, false, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::numerical("svd", "singular value decomposition did not converge"))?;
    Ok(svd.singular_values.iter().map(|s| s * s).collect())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invariant(format!("{name} must be > 0, got {v}")))
    }
}
