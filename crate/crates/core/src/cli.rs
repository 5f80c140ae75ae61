//! Subcommand dispatch for the `spacemimo` binary.
//!
//! Each subcommand reads one scenario file, applies command-line overrides
//! and writes one or more CSV reports into the output directory. Failures
//! become a one-line JSON record on stderr and a kind-specific exit code.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use crate::achievability::{convergence_curve_with, operator_spectrum_for};
use crate::capacity::{
    optimal_stream_count, required_array_area, spectral_efficiency_upper_bound, uniform_spectral_efficiency,
    waterfilling,
};
use crate::channel::{build_reduced_matrix, singular_spectrum};
use crate::error::{Error, Result};
use crate::linkbudget::siso_spectral_efficiency;
use crate::montecarlo::{bound_scan, draw_clusters, ergodic_uniform_xi, scan_grid, scenario_id, trial_spectral_efficiencies};
use crate::moments::moment_report;
use crate::numerics::SampleStats;
use crate::prolate::plateau_mode_count;
use crate::report::{emit_csv, CsvReport};
use crate::scenario::{RawConfig, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Siso,
    MimoSample,
    Ergodic,
    Bounds,
    Prolate,
    Achievability,
    Design,
    Moments,
    Scan,
}

impl Subcommand {
    pub const ALL: [Subcommand; 9] = [
        Subcommand::Siso,
        Subcommand::MimoSample,
        Subcommand::Ergodic,
        Subcommand::Bounds,
        Subcommand::Prolate,
        Subcommand::Achievability,
        Subcommand::Design,
        Subcommand::Moments,
        Subcommand::Scan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Siso => "siso",
            Subcommand::MimoSample => "mimo-sample",
            Subcommand::Ergodic => "ergodic",
            Subcommand::Bounds => "bounds",
            Subcommand::Prolate => "prolate",
            Subcommand::Achievability => "achievability",
            Subcommand::Design => "design",
            Subcommand::Moments => "moments",
            Subcommand::Scan => "scan",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Values given on the command line; each replaces the config key of the
/// same name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

pub fn load_scenario(config_path: &Path, overrides: &Overrides) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(config_path).map_err(|source| Error::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let mut raw = RawConfig::parse(&text)?;
    if let Some(t) = overrides.trials {
        raw.set_override("trials", &t.to_string())?;
    }
    if let Some(s) = overrides.seed {
        raw.set_override("seed", &s.to_string())?;
    }
    ScenarioConfig::from_raw(&raw)
}

/// Runs one subcommand and returns the files written, in write order.
pub fn run(cmd: Subcommand, config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<Vec<PathBuf>> {
    let cfg = load_scenario(config_path, overrides)?;
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let reports = match cmd {
        Subcommand::Siso => vec![("siso", siso_report(&cfg))],
        Subcommand::MimoSample => mimo_sample_reports(&cfg)?,
        Subcommand::Ergodic => {
            let e = ergodic_uniform_xi(&cfg, cfg.trials, cfg.seed)?;
            vec![("ergodic", e.to_report(&cfg))]
        }
        Subcommand::Bounds => {
            let scan = bound_scan(&scan_grid(&cfg), cfg.trials, cfg.seed)?;
            vec![("bounds", scan.to_report())]
        }
        Subcommand::Prolate => {
            let spec = operator_spectrum_for(&cfg)?;
            let mut r = spec.to_report();
            r.comment(format!("plateau_modes={}", plateau_mode_count(&spec.spectrum, cfg.budget.loss_factor)));
            r.comment(format!("degrees_of_freedom={}", cfg.degrees_of_freedom()));
            vec![("prolate", r)]
        }
        Subcommand::Achievability => {
            let modes = operator_spectrum_for(&cfg)?;
            let curve = convergence_curve_with(&cfg, &modes, &cfg.cell_counts, cfg.partition)?;
            let mut r = curve.to_report();
            r.comment(format!("gamma_g={:?}", cfg.gamma_g()));
            vec![("achievability", r)]
        }
        Subcommand::Design => vec![("design", design_report(&cfg)?)],
        Subcommand::Moments => vec![("moments", moment_report(&cfg, cfg.trials, cfg.seed)?.to_report())],
        Subcommand::Scan => vec![("scan", asymptote_report(&cfg)?)],
    };
    let mut written = Vec::with_capacity(reports.len());
    for (name, mut report) in reports {
        report.comment(format!("fingerprint={}", cfg.fingerprint()));
        let path = out_dir.join(format!("{name}.csv"));
        emit_csv(&report, &path)?;
        written.push(path);
    }
    Ok(written)
}

fn siso_report(cfg: &ScenarioConfig) -> CsvReport {
    let mut r = CsvReport::new("siso", &["gamma", "g", "gamma_g", "xi"]);
    for w in cfg.budget.warnings() {
        r.comment(format!("warning: {w}"));
    }
    r.push(vec![
        cfg.gamma().into(),
        cfg.g().into(),
        cfg.gamma_g().into(),
        siso_spectral_efficiency(cfg.gamma(), cfg.g()).into(),
    ]);
    r
}

/// The first trial of the scenario: both clusters, the reduced matrix, its
/// spectrum and a one-row summary.
fn mimo_sample_reports(cfg: &ScenarioConfig) -> Result<Vec<(&'static str, CsvReport)>> {
    let (tx, rx) = draw_clusters(cfg, cfg.seed, 0)?;
    let h = build_reduced_matrix(&tx, &rx, cfg.budget.wavelength_m, cfg.budget.range_m)?;
    let spectrum = singular_spectrum(&h)?;
    let (gamma, g, m) = (cfg.gamma(), cfg.g(), cfg.streams);
    let wf = waterfilling(&spectrum, gamma, g, m)?;
    let mut summary = CsvReport::new(
        "mimo_sample",
        &["M", "S_over_ld", "gamma_g", "xi_uniform", "xi_waterfilling", "active_streams", "ub14"],
    );
    summary.push(vec![
        m.into(),
        cfg.s_over_ld().into(),
        cfg.gamma_g().into(),
        uniform_spectral_efficiency(&spectrum, gamma, g, m)?.into(),
        wf.xi.into(),
        wf.active.into(),
        spectral_efficiency_upper_bound(&cfg.capacity_inputs()).into(),
    ]);
    Ok(vec![
        ("tx_cluster", tx.to_report()),
        ("rx_cluster", rx.to_report()),
        ("matrix", h.to_report()),
        ("spectrum", spectrum.to_report()),
        ("mimo_sample", summary),
    ])
}

fn design_report(cfg: &ScenarioConfig) -> Result<CsvReport> {
    let d = optimal_stream_count(cfg.gamma(), cfg.g())?;
    let area = required_array_area(d.m_opt, cfg.budget.wavelength_m, cfg.budget.range_m)?;
    let mut r = CsvReport::new(
        "design",
        &["gamma_g", "t_star", "x_opt", "M_lower", "M_upper", "M_opt", "xi", "area_m2", "disc_radius_m"],
    );
    r.comment(format!("xi_over_sqrt_gamma_g_bits={:?}", d.xi_ratio_bits()));
    r.comment(format!("xi_over_sqrt_gamma_g_nats={:?}", d.xi_ratio_nats()));
    r.push(vec![
        d.gamma_g.into(),
        d.t_star.into(),
        d.x_opt.into(),
        d.m_lower.into(),
        d.m_upper.into(),
        d.m_opt.into(),
        d.xi.into(),
        area.into(),
        (area / PI).sqrt().into(),
    ]);
    Ok(r)
}

/// Ergodic means over the scan grid against `M·log₂(1 + γg/M²)`.
fn asymptote_report(cfg: &ScenarioConfig) -> Result<CsvReport> {
    let mut r = CsvReport::new(
        "asymptote",
        &["scenario_id", "M", "S_over_ld", "gamma_g", "mean_xi", "se", "asymptote", "rel_gap"],
    );
    r.comment(format!("trials={}", cfg.trials));
    r.comment(format!("seed={}", cfg.seed));
    for s in scan_grid(cfg) {
        let samples = trial_spectral_efficiencies(&s, cfg.trials, cfg.seed)?;
        let stats = SampleStats::from_samples(&samples);
        let m = s.streams as f64;
        let asym = m * (1.0 + s.gamma_g() / (m * m)).log2();
        r.push(vec![
            scenario_id(&s.fingerprint()).into(),
            s.streams.into(),
            s.s_over_ld().into(),
            s.gamma_g().into(),
            stats.mean.into(),
            stats.std_error.into(),
            asym.into(),
            ((stats.mean - asym).abs() / asym).into(),
        ]);
    }
    Ok(r)
}

/// Machine-readable error record for stderr.
pub fn error_record(err: &Error) -> String {
    let mut rec = serde_json::json!({
        "error": err.kind(),
        "exit_code": err.exit_code(),
        "message": err.to_string(),
    });
    match err {
        Error::Config { key, line, .. } => {
            rec["key"] = key.clone().into();
            rec["line"] = (*line).into();
        }
        Error::Numerical { operation, .. } => rec["operation"] = (*operation).into(),
        Error::Io { path, .. } => rec["path"] = path.display().to_string().into(),
        Error::Invariant(_) => {}
    }
    rec.to_string()
}
