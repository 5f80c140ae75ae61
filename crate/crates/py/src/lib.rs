//! Python bindings: link budgets, scenarios, capacity formulas, the prolate
//! spectrum, moment integrals and the CLI entry point.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

use spacemimo_core::capacity::{self, CapacityInputs};
use spacemimo_core::channel::{build_reduced_matrix, singular_spectrum, EigenSpectrum, SpectrumContext};
use spacemimo_core::cli::{self, Overrides, Subcommand};
use spacemimo_core::geometry::DiscCluster;
use spacemimo_core::linkbudget;
use spacemimo_core::moments::{self, FMethod};
use spacemimo_core::prolate::{assemble_operator_spectrum, ProlateProblem};
use spacemimo_core::scenario::ScenarioConfig;
use spacemimo_core::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Numerical { .. } => PyArithmeticError::new_err(err.to_string()),
        Error::Io { .. } => PyOSError::new_err(err.to_string()),
        Error::Config { .. } | Error::Invariant(_) => PyValueError::new_err(err.to_string()),
    }
}

fn spectrum(values: Vec<f64>) -> PyResult<EigenSpectrum> {
    EigenSpectrum::from_values(values, SpectrumContext::MatrixSingular).map_err(to_py)
}

#[pyclass(name = "LinkBudget", frozen)]
struct PyLinkBudget {
    inner: linkbudget::LinkBudget,
}

#[pymethods]
impl PyLinkBudget {
    #[new]
    #[pyo3(signature = (wavelength_m, range_m, tx_aperture_m2, rx_aperture_m2, power_w, bandwidth_hz, noise_psd_w_per_hz, loss_factor = 1.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        wavelength_m: f64,
        range_m: f64,
        tx_aperture_m2: f64,
        rx_aperture_m2: f64,
        power_w: f64,
        bandwidth_hz: f64,
        noise_psd_w_per_hz: f64,
        loss_factor: f64,
    ) -> PyResult<Self> {
        let inner = linkbudget::LinkBudget {
            wavelength_m,
            range_m,
            tx_aperture_m2,
            rx_aperture_m2,
            loss_factor,
            power_w,
            bandwidth_hz,
            noise_psd_w_per_hz,
        }
        .validated()
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        linkbudget::input_snr(&self.inner)
    }

    #[getter]
    fn g(&self) -> f64 {
        linkbudget::channel_gain(&self.inner)
    }

    #[getter]
    fn gamma_g(&self) -> f64 {
        self.inner.gamma_g()
    }

    #[getter]
    fn lambda_d(&self) -> f64 {
        self.inner.lambda_d()
    }

    fn warnings(&self) -> Vec<String> {
        self.inner.warnings()
    }

    /// `log₂(1 + γg)`.
    fn siso_spectral_efficiency(&self) -> f64 {
        linkbudget::siso_spectral_efficiency(self.gamma(), self.g())
    }

    fn __repr__(&self) -> String {
        format!("LinkBudget(gamma_g={:e}, lambda_d={:e})", self.gamma_g(), self.lambda_d())
    }
}

#[pyclass(name = "Scenario", frozen)]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    /// Parses `key = value` scenario text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ScenarioConfig::parse(text).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ScenarioConfig::load(&path).map(|inner| Self { inner }).map_err(to_py)
    }

    #[getter]
    fn streams(&self) -> usize {
        self.inner.streams
    }

    #[getter]
    fn gamma_g(&self) -> f64 {
        self.inner.gamma_g()
    }

    #[getter]
    fn s_over_ld(&self) -> f64 {
        self.inner.s_over_ld()
    }

    #[getter]
    fn disc_radius_m(&self) -> f64 {
        self.inner.disc_radius_m()
    }

    #[getter]
    fn bandwidth_c(&self) -> f64 {
        self.inner.bandwidth_c()
    }

    #[getter]
    fn degrees_of_freedom(&self) -> usize {
        self.inner.degrees_of_freedom()
    }

    #[getter]
    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    fn canonical(&self) -> String {
        self.inner.canonical()
    }

    /// Copy with `M`, `|S|/λd` and `γg` set; power is rescaled to reach `γg`.
    fn with_targets(&self, streams: usize, s_over_ld: f64, gamma_g: f64) -> Self {
        Self {
            inner: self.inner.with_targets(streams, s_over_ld, gamma_g),
        }
    }

    /// `(upper, lower)` spectral-efficiency bounds; `lower` is None when `|S|/λd < 1`.
    fn bounds(&self) -> PyResult<(f64, Option<f64>)> {
        let inputs = self.inner.capacity_inputs();
        let ub = capacity::spectral_efficiency_upper_bound(&inputs);
        let lb = if inputs.s_over_ld() >= 1.0 {
            Some(capacity::expected_spectral_efficiency_lower_bound(&inputs).map_err(to_py)?)
        } else {
            None
        };
        Ok((ub, lb))
    }

    /// `(mean, std_error)` of the uniform-power efficiency over random clusters.
    fn ergodic_uniform_xi(&self, py: Python<'_>, trials: usize, seed: u64) -> PyResult<(f64, f64)> {
        let e = py
            .detach(|| spacemimo_core::montecarlo::ergodic_uniform_xi(&self.inner, trials, seed))
            .map_err(to_py)?;
        Ok((e.mean_xi, e.std_error))
    }

    /// `(mean, std_error)` of `(1/M)·‖H̃H̃*‖_F²`.
    fn empirical_fourth_moment(&self, py: Python<'_>, trials: usize, seed: u64) -> PyResult<(f64, f64)> {
        let e = py
            .detach(|| moments::empirical_fourth_moment(&self.inner, trials, seed))
            .map_err(to_py)?;
        Ok((e.fourth.mean, e.fourth.std_error))
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(M={}, S_over_ld={:?}, gamma_g={:e})",
            self.inner.streams,
            self.inner.s_over_ld(),
            self.inner.gamma_g()
        )
    }
}

/// Squared singular values of the reduced channel between two sets of
/// lateral `(y, z)` positions.
#[pyfunction]
fn reduced_channel_spectrum(
    tx: Vec<[f64; 2]>,
    rx: Vec<[f64; 2]>,
    disc_radius_m: f64,
    wavelength_m: f64,
    range_m: f64,
) -> PyResult<Vec<f64>> {
    let tx = DiscCluster::new(tx, disc_radius_m).map_err(to_py)?;
    let rx = DiscCluster::new(rx, disc_radius_m).map_err(to_py)?;
    let h = build_reduced_matrix(&tx, &rx, wavelength_m, range_m).map_err(to_py)?;
    Ok(singular_spectrum(&h).map_err(to_py)?.values)
}

#[pyfunction]
fn uniform_spectral_efficiency(eigenvalues: Vec<f64>, gamma: f64, g: f64, m: usize) -> PyResult<f64> {
    capacity::uniform_spectral_efficiency(&spectrum(eigenvalues)?, gamma, g, m).map_err(to_py)
}

#[pyfunction]
fn waterfilling_spectral_efficiency(eigenvalues: Vec<f64>, gamma: f64, g: f64, m: usize) -> PyResult<f64> {
    capacity::waterfilling_spectral_efficiency(&spectrum(eigenvalues)?, gamma, g, m).map_err(to_py)
}

/// `(upper, lower)` bounds for `M` streams on a region of `area_m2`.
#[pyfunction]
fn spectral_efficiency_bounds(gamma: f64, g: f64, m: usize, area_m2: f64, lambda_d: f64) -> PyResult<(f64, f64)> {
    let inputs = CapacityInputs::from_geometry(gamma, g, m, area_m2, lambda_d).map_err(to_py)?;
    Ok((
        capacity::spectral_efficiency_upper_bound(&inputs),
        capacity::expected_spectral_efficiency_lower_bound(&inputs).map_err(to_py)?,
    ))
}

/// `(M_opt, x_opt, xi)` maximising `M·log₂(1 + γg/M²)`.
#[pyfunction]
fn optimal_stream_count(gamma: f64, g: f64) -> PyResult<(usize, f64, f64)> {
    let d = capacity::optimal_stream_count(gamma, g).map_err(to_py)?;
    Ok((d.m_opt, d.x_opt, d.xi))
}

#[pyfunction]
fn stationary_constant() -> f64 {
    capacity::stationary_constant()
}

/// Decreasing `|ν|²` of the disc-to-disc operator.
#[pyfunction]
#[pyo3(signature = (disc_radius_m, wavelength_m, range_m, loss_factor = 1.0))]
fn prolate_spectrum(
    py: Python<'_>,
    disc_radius_m: f64,
    wavelength_m: f64,
    range_m: f64,
    loss_factor: f64,
) -> PyResult<Vec<f64>> {
    let c = 2.0 * std::f64::consts::PI * disc_radius_m * disc_radius_m / (wavelength_m * range_m);
    py.detach(|| {
        assemble_operator_spectrum(
            &ProlateProblem::with_defaults(c),
            loss_factor,
            disc_radius_m,
            wavelength_m,
            range_m,
        )
    })
    .map(|s| s.spectrum.values)
    .map_err(to_py)
}

/// `(estimate, error)` of `f(c)`; `method` is "quadrature" or "montecarlo".
#[pyfunction]
#[pyo3(signature = (c, method = "quadrature", budget = 64, seed = 0))]
fn f_of_c(py: Python<'_>, c: f64, method: &str, budget: usize, seed: u64) -> PyResult<(f64, f64)> {
    let method = match method {
        "quadrature" => FMethod::BesselQuadrature,
        "montecarlo" => FMethod::MonteCarlo,
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    let f = py.detach(|| moments::f_of_c(c, method, budget, seed)).map_err(to_py)?;
    Ok((f.estimate, f.std_error))
}

#[pyfunction]
fn f_upper_bound(c: f64) -> f64 {
    moments::f_upper_bound(c)
}

#[pyfunction]
fn fourth_moment(m: usize, f: f64) -> PyResult<f64> {
    moments::fourth_moment(m, f).map_err(to_py)
}

/// Runs a CLI subcommand and returns the written file paths.
#[pyfunction]
#[pyo3(signature = (subcommand, config, out, trials = None, seed = None))]
fn run(
    py: Python<'_>,
    subcommand: &str,
    config: PathBuf,
    out: PathBuf,
    trials: Option<u64>,
    seed: Option<u64>,
) -> PyResult<Vec<PathBuf>> {
    let cmd = Subcommand::from_name(subcommand)
        .ok_or_else(|| PyValueError::new_err(format!("unknown subcommand `{subcommand}`")))?;
    py.detach(|| cli::run(cmd, &config, &out, &Overrides { trials, seed }))
        .map_err(to_py)
}

#[pymodule(name = "spacemimo")]
fn spacemimo_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLinkBudget>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(reduced_channel_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_spectral_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(waterfilling_spectral_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_efficiency_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_stream_count, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_constant, m)?)?;
    m.add_function(wrap_pyfunction!(prolate_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(f_of_c, m)?)?;
    m.add_function(wrap_pyfunction!(f_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(fourth_moment, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
