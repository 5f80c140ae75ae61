//! Ergodic estimation over random cluster placements and per-trial bound
//! checks across scenario grids.
//!
//! Trial `t` of a scenario draws its transmit and receive clusters from
//! seeds derived from `(seed, scenario stream id, t)`, so a trial's channel
//! does not depend on how many trials run, on their scheduling, or on the
//! other scenarios in a scan.

use rayon::prelude::*;

use crate::capacity::{
    deterministic_capacity, expected_spectral_efficiency_lower_bound, spectral_efficiency_upper_bound,
    uniform_spectral_efficiency,
};
use crate::channel::{build_reduced_matrix, singular_spectrum, ChannelMatrix};
use crate::error::{Error, Result};
use crate::geometry::{project_to_disc, sample_ball_cluster, sample_disc_cluster, DiscCluster};
use crate::numerics::SampleStats;
use crate::report::CsvReport;
use crate::scenario::{Sampling, ScenarioConfig};
use crate::seed::{derive_seed, RX_STREAM, TX_STREAM};

pub const MIN_ERGODIC_TRIALS: usize = 30;

/// Slack on the per-trial upper-bound comparison.
const VIOLATION_RTOL: f64 = 1e-12;
const VIOLATION_ATOL: f64 = 1e-12;

/// Transmit and receive clusters for one trial.
pub fn draw_clusters(cfg: &ScenarioConfig, seed: u64, trial: u64) -> Result<(DiscCluster, DiscCluster)> {
    let stream = cfg.stream_id();
    let radius = cfg.disc_radius_m();
    let m = cfg.streams;
    let draw = |side: u64| -> Result<DiscCluster> {
        let s = derive_seed(seed, &[stream, trial, side]);
        match cfg.sampling {
            Sampling::Disc => sample_disc_cluster(radius, m, s),
            Sampling::Ball => Ok(project_to_disc(&sample_ball_cluster(radius, m, s)?)),
        }
    };
    Ok((draw(TX_STREAM)?, draw(RX_STREAM)?))
}

pub fn draw_reduced_channel(cfg: &ScenarioConfig, seed: u64, trial: u64) -> Result<ChannelMatrix> {
    let (tx, rx) = draw_clusters(cfg, seed, trial)?;
    build_reduced_matrix(&tx, &rx, cfg.budget.wavelength_m, cfg.budget.range_m)
}

/// `f(trial)` for every trial in parallel, collected in trial order.
pub fn map_trials<F>(trials: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

/// Uniform-power spectral efficiency of every trial.
pub fn trial_spectral_efficiencies(cfg: &ScenarioConfig, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let (gamma, g, m) = (cfg.gamma(), cfg.g(), cfg.streams);
    map_trials(trials, |t| {
        let h = draw_reduced_channel(cfg, seed, t)?;
        uniform_spectral_efficiency(&singular_spectrum(&h)?, gamma, g, m)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicEstimate {
    pub mean_xi: f64,
    pub std_error: f64,
    pub trials: usize,
    pub batched: bool,
    pub fingerprint: String,
}

impl ErgodicEstimate {
    fn from_samples(cfg: &ScenarioConfig, samples: &[f64]) -> Self {
        let s = SampleStats::from_samples(samples);
        Self {
            mean_xi: s.mean,
            std_error: s.std_error,
            trials: s.count,
            batched: s.batched,
            fingerprint: cfg.fingerprint(),
        }
    }

    pub fn to_report(&self, cfg: &ScenarioConfig) -> CsvReport {
        let mut r = CsvReport::new(
            "ergodic",
            &["scenario_id", "M", "S_over_ld", "gamma_g", "trials", "mean_xi", "se"],
        );
        r.comment(format!("fingerprint={}", self.fingerprint));
        r.comment(format!("seed={}", cfg.seed));
        r.comment(format!("batched_se={}", self.batched));
        r.push(vec![
            scenario_id(&self.fingerprint).into(),
            cfg.streams.into(),
            cfg.s_over_ld().into(),
            cfg.gamma_g().into(),
            self.trials.into(),
            self.mean_xi.into(),
            self.std_error.into(),
        ]);
        r
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_ERGODIC_TRIALS {
        return Err(Error::invariant(format!(
            "ergodic estimates need at least {MIN_ERGODIC_TRIALS} trials, got {trials}"
        )));
    }
    Ok(())
}

/// Sample mean and standard error of the uniform-power spectral efficiency
/// over i.i.d. cluster draws.
pub fn ergodic_uniform_xi(cfg: &ScenarioConfig, trials: usize, seed: u64) -> Result<ErgodicEstimate> {
    check_trials(trials)?;
    let samples = trial_spectral_efficiencies(cfg, trials, seed)?;
    Ok(ErgodicEstimate::from_samples(cfg, &samples))
}

/// Short scenario label: the first 16 hex digits of the fingerprint.
pub fn scenario_id(fingerprint: &str) -> String {
    fingerprint.chars().take(16).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub scenario_id: String,
    pub streams: usize,
    pub s_over_ld: f64,
    pub gamma_g: f64,
    pub estimate: ErgodicEstimate,
    /// Expected-value lower bound; NaN when `|S|/λd < 1`.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub deterministic_capacity: f64,
    pub ub_violations: usize,
    /// Largest `ξ − upper bound` over the trials.
    pub max_excess: f64,
}

impl ScanRow {
    /// `mean ≥ lower bound − 3σ`, vacuously true where the bound is undefined.
    pub fn mean_above_lower_bound(&self) -> bool {
        self.lower_bound.is_nan() || self.estimate.mean_xi >= self.lower_bound - 3.0 * self.estimate.std_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub trials: usize,
    pub seed: u64,
}

impl ScanReport {
    pub fn total_violations(&self) -> usize {
        self.rows.iter().map(|r| r.ub_violations).sum()
    }

    pub fn total_trials(&self) -> usize {
        self.rows.len() * self.trials
    }

    pub fn to_report(&self) -> CsvReport {
        let mut r = CsvReport::new(
            "scan",
            &[
                "scenario_id",
                "M",
                "S_over_ld",
                "gamma_g",
                "mean_xi",
                "se",
                "lb15",
                "ub14",
                "det_cap",
                "ub_violations",
            ],
        );
        r.comment(format!("trials={}", self.trials));
        r.comment(format!("seed={}", self.seed));
        for row in &self.rows {
            r.push(vec![
                row.scenario_id.clone().into(),
                row.streams.into(),
                row.s_over_ld.into(),
                row.gamma_g.into(),
                row.estimate.mean_xi.into(),
                row.estimate.std_error.into(),
                row.lower_bound.into(),
                row.upper_bound.into(),
                row.deterministic_capacity.into(),
                row.ub_violations.into(),
            ]);
        }
        r
    }
}

/// One scan row: ergodic estimate, both bounds and a per-trial upper-bound
/// check.
pub fn scan_scenario(cfg: &ScenarioConfig, trials: usize, seed: u64) -> Result<ScanRow> {
    check_trials(trials)?;
    let inputs = cfg.capacity_inputs();
    let ub = spectral_efficiency_upper_bound(&inputs);
    let lb = if inputs.s_over_ld() >= 1.0 {
        expected_spectral_efficiency_lower_bound(&inputs)?
    } else {
        f64::NAN
    };
    let samples = trial_spectral_efficiencies(cfg, trials, seed)?;
    let limit = ub * (1.0 + VIOLATION_RTOL) + VIOLATION_ATOL;
    let ub_violations = samples.iter().filter(|&&x| x > limit).count();
    let max_excess = samples.iter().map(|x| x - ub).fold(f64::NEG_INFINITY, f64::max);
    let estimate = ErgodicEstimate::from_samples(cfg, &samples);
    Ok(ScanRow {
        scenario_id: scenario_id(&estimate.fingerprint),
        streams: cfg.streams,
        s_over_ld: cfg.s_over_ld(),
        gamma_g: cfg.gamma_g(),
        estimate,
        lower_bound: lb,
        upper_bound: ub,
        deterministic_capacity: deterministic_capacity(&inputs),
        ub_violations,
        max_excess,
    })
}

pub fn bound_scan(grid: &[ScenarioConfig], trials: usize, seed: u64) -> Result<ScanReport> {
    if grid.is_empty() {
        return Err(Error::invariant("scan grid is empty"));
    }
    let rows = grid
        .iter()
        .map(|cfg| scan_scenario(cfg, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport { rows, trials, seed })
}

/// Cartesian grid over `scan_m × scan_s_over_ld × scan_gamma_g`; an empty
/// list keeps the base scenario's value.
pub fn scan_grid(base: &ScenarioConfig) -> Vec<ScenarioConfig> {
    let ms = if base.scan_m.is_empty() { vec![base.streams] } else { base.scan_m.clone() };
    let ss = if base.scan_s_over_ld.is_empty() {
        vec![base.s_over_ld()]
    } else {
        base.scan_s_over_ld.clone()
    };
    let gs = if base.scan_gamma_g.is_empty() {
        vec![base.gamma_g()]
    } else {
        base.scan_gamma_g.clone()
    };
    let mut out = Vec::with_capacity(ms.len() * ss.len() * gs.len());
    for &m in &ms {
        for &s in &ss {
            for &gg in &gs {
                let mut c = base.with_targets(m, s, gg);
                c.scan_m.clear();
                c.scan_s_over_ld.clear();
                c.scan_gamma_g.clear();
                out.push(c);
            }
        }
    }
    out
}
