//! Scenario configuration: a flat `key = value` text format with `#`
//! comments, parsed into [`ScenarioConfig`].
//!
//! Unknown keys, duplicates and malformed values are errors that name the key
//! and line. Every key has one canonical rendering, and the SHA-256 of the
//! canonical form (all keys, defaults filled in, sorted) is the scenario
//! fingerprint used to join outputs and to derive random streams.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::capacity::{degrees_of_freedom, CapacityInputs};
use crate::error::{Error, Result};
use crate::linkbudget::{channel_gain, input_snr, LinkBudget};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    DiscRadius(f64),
    AreaOverLambdaD(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Disc,
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionLayout {
    /// Transmit and receive antennas use the same cell partition.
    Shared,
    /// The receive partition is rotated and has a different cell count.
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub budget: LinkBudget,
    pub streams: usize,
    pub geometry: Geometry,
    pub trials: usize,
    pub seed: u64,
    pub quadrature_order: Option<usize>,
    pub max_azimuthal_order: Option<usize>,
    pub cell_counts: Vec<usize>,
    pub partition: PartitionLayout,
    pub f_samples: usize,
    pub f_panels: usize,
    pub sampling: Sampling,
    pub scan_m: Vec<usize>,
    pub scan_s_over_ld: Vec<f64>,
    pub scan_gamma_g: Vec<f64>,
}

const BUDGET_KEYS: [&str; 8] = [
    "wavelength_m",
    "range_m",
    "tx_aperture_m2",
    "rx_aperture_m2",
    "loss_factor",
    "power_w",
    "bandwidth_hz",
    "noise_psd_w_per_hz",
];

/// Every recognised key.
pub const KNOWN_KEYS: [&str; 24] = [
    "wavelength_m",
    "range_m",
    "tx_aperture_m2",
    "rx_aperture_m2",
    "loss_factor",
    "power_w",
    "bandwidth_hz",
    "noise_psd_w_per_hz",
    "streams",
    "disc_radius_m",
    "area_over_lambda_d",
    "trials",
    "seed",
    "quadrature_order",
    "max_azimuthal_order",
    "cell_counts",
    "partition",
    "f_samples",
    "f_panels",
    "sampling",
    "scan_m",
    "scan_s_over_ld",
    "scan_gamma_g",
    "schema",
];

/// Raw `key → (value, line)` pairs; line 0 marks command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                Error::config(content, line, "expected `key = value`")
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::config("", line, "empty key"));
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::config(key, line, "unknown key"));
            }
            if value.is_empty() {
                return Err(Error::config(key, line, "empty value"));
            }
            if let Some((_, prev)) = entries.get(key) {
                return Err(Error::config(key, line, format!("duplicate key (first set on line {prev})")));
            }
            entries.insert(key.to_string(), (value.to_string(), line));
        }
        Ok(Self { entries })
    }

    pub fn set_override(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::config(key, 0, "unknown key"));
        }
        self.entries.insert(key.to_string(), (value.to_string(), 0));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => parse_float(key, v, line).map(Some),
        }
    }

    fn required_float(&self, key: &str) -> Result<f64> {
        self.float(key)?
            .ok_or_else(|| Error::config(key, 0, "missing required key"))
    }

    fn uint(&self, key: &str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| Error::config(key, line, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn positive_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.uint(key)? {
            Some(0) => Err(Error::config(key, self.line(key), "must be >= 1")),
            other => Ok(other.map(|v| v as usize)),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.get(key).map_or(0, |(_, l)| l)
    }

    fn list<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    parse(s).ok_or_else(|| Error::config(key, line, format!("bad list element `{s}`")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

fn parse_float(key: &str, v: &str, line: usize) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::config(key, line, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::config(key, line, "must be finite"));
    }
    Ok(x)
}

fn positive_float(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0)
}

fn positive_int(s: &str) -> Option<usize> {
    s.parse::<usize>().ok().filter(|&v| v > 0)
}

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_CELL_COUNTS: [usize; 4] = [64, 256, 1024, 4096];
pub const DEFAULT_F_SAMPLES: usize = 100_000;
pub const DEFAULT_F_PANELS: usize = 64;

impl ScenarioConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut vals = [0.0; 8];
        for (slot, key) in vals.iter_mut().zip(BUDGET_KEYS) {
            *slot = if key == "loss_factor" {
                raw.float(key)?.unwrap_or(1.0)
            } else {
                raw.required_float(key)?
            };
            if slot.is_nan() || *slot <= 0.0 {
                return Err(Error::config(key, raw.line(key), "must be > 0"));
            }
        }
        let budget = LinkBudget {
            wavelength_m: vals[0],
            range_m: vals[1],
            tx_aperture_m2: vals[2],
            rx_aperture_m2: vals[3],
            loss_factor: vals[4],
            power_w: vals[5],
            bandwidth_hz: vals[6],
            noise_psd_w_per_hz: vals[7],
        };
        if budget.loss_factor > 1.0 {
            return Err(Error::config("loss_factor", raw.line("loss_factor"), "must be <= 1"));
        }
        let budget = budget.validated()?;
        let streams = raw
            .positive_usize("streams")?
            .ok_or_else(|| Error::config("streams", 0, "missing required key"))?;
        let geometry = match (raw.float("disc_radius_m")?, raw.float("area_over_lambda_d")?) {
            (Some(r), None) if r > 0.0 => Geometry::DiscRadius(r),
            (None, Some(s)) if s > 0.0 => Geometry::AreaOverLambdaD(s),
            (Some(_), None) => return Err(Error::config("disc_radius_m", raw.line("disc_radius_m"), "must be > 0")),
            (None, Some(_)) => {
                return Err(Error::config("area_over_lambda_d", raw.line("area_over_lambda_d"), "must be > 0"))
            }
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "area_over_lambda_d",
                    raw.line("area_over_lambda_d"),
                    "give exactly one of disc_radius_m and area_over_lambda_d",
                ))
            }
            (None, None) => {
                return Err(Error::config(
                    "disc_radius_m",
                    0,
                    "one of disc_radius_m and area_over_lambda_d is required",
                ))
            }
        };
        let sampling = match raw.get("sampling") {
            None | Some(("disc", _)) => Sampling::Disc,
            Some(("ball", _)) => Sampling::Ball,
            Some((v, line)) => return Err(Error::config("sampling", line, format!("`{v}` is not disc or ball"))),
        };
        let partition = match raw.get("partition") {
            None | Some(("shared", _)) => PartitionLayout::Shared,
            Some(("independent", _)) => PartitionLayout::Independent,
            Some((v, line)) => {
                return Err(Error::config("partition", line, format!("`{v}` is not shared or independent")))
            }
        };
        let cfg = Self {
            budget,
            streams,
            geometry,
            trials: raw.positive_usize("trials")?.unwrap_or(DEFAULT_TRIALS),
            seed: raw.uint("seed")?.unwrap_or(0),
            quadrature_order: raw.positive_usize("quadrature_order")?,
            max_azimuthal_order: raw.positive_usize("max_azimuthal_order")?,
            cell_counts: raw
                .list("cell_counts", positive_int)?
                .unwrap_or_else(|| DEFAULT_CELL_COUNTS.to_vec()),
            partition,
            f_samples: raw.positive_usize("f_samples")?.unwrap_or(DEFAULT_F_SAMPLES),
            f_panels: raw.positive_usize("f_panels")?.unwrap_or(DEFAULT_F_PANELS),
            sampling,
            scan_m: raw.list("scan_m", positive_int)?.unwrap_or_default(),
            scan_s_over_ld: raw.list("scan_s_over_ld", positive_float)?.unwrap_or_default(),
            scan_gamma_g: raw.list("scan_gamma_g", positive_float)?.unwrap_or_default(),
        };
        if let Some((v, line)) = raw.get("schema") {
            if v != "scenario/1" {
                return Err(Error::config("schema", line, format!("unsupported schema `{v}`")));
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn lambda_d(&self) -> f64 {
        self.budget.lambda_d()
    }

    pub fn disc_radius_m(&self) -> f64 {
        match self.geometry {
            Geometry::DiscRadius(r) => r,
            Geometry::AreaOverLambdaD(s) => (s * self.lambda_d() / PI).sqrt(),
        }
    }

    /// `|S| = πR²`.
    pub fn area_m2(&self) -> f64 {
        match self.geometry {
            Geometry::DiscRadius(r) => PI * r * r,
            Geometry::AreaOverLambdaD(s) => s * self.lambda_d(),
        }
    }

    pub fn s_over_ld(&self) -> f64 {
        match self.geometry {
            Geometry::DiscRadius(_) => self.area_m2() / self.lambda_d(),
            Geometry::AreaOverLambdaD(s) => s,
        }
    }

    /// Prolate bandwidth `c = 2πR²/(λd) = 2|S|/(λd)`.
    pub fn bandwidth_c(&self) -> f64 {
        2.0 * self.s_over_ld()
    }

    pub fn gamma(&self) -> f64 {
        input_snr(&self.budget)
    }

    pub fn g(&self) -> f64 {
        channel_gain(&self.budget)
    }

    pub fn gamma_g(&self) -> f64 {
        self.gamma() * self.g()
    }

    pub fn degrees_of_freedom(&self) -> usize {
        degrees_of_freedom(self.area_m2(), self.lambda_d())
    }

    pub fn capacity_inputs(&self) -> CapacityInputs {
        CapacityInputs {
            gamma: self.gamma(),
            g: self.g(),
            m: self.streams,
            m_script: self.degrees_of_freedom(),
            area_m2: self.area_m2(),
            lambda_d: self.lambda_d(),
        }
    }

    /// A copy with `M`, `|S|/λd` and `γg` set to the given targets. `γg` is
    /// reached by scaling the transmit power.
    pub fn with_targets(&self, m: usize, s_over_ld: f64, gamma_g: f64) -> Self {
        let mut out = self.clone();
        out.streams = m;
        out.geometry = Geometry::AreaOverLambdaD(s_over_ld);
        out.budget.power_w = gamma_g * self.budget.bandwidth_hz * self.budget.noise_psd_w_per_hz / self.g();
        out
    }

    /// Canonical `key = value` rendering with every key present and sorted.
    pub fn canonical(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        let b = &self.budget;
        for (k, v) in BUDGET_KEYS.iter().zip([
            b.wavelength_m,
            b.range_m,
            b.tx_aperture_m2,
            b.rx_aperture_m2,
            b.loss_factor,
            b.power_w,
            b.bandwidth_hz,
            b.noise_psd_w_per_hz,
        ]) {
            kv.insert(k, format!("{v:?}"));
        }
        kv.insert("streams", self.streams.to_string());
        match self.geometry {
            Geometry::DiscRadius(r) => kv.insert("disc_radius_m", format!("{r:?}")),
            Geometry::AreaOverLambdaD(s) => kv.insert("area_over_lambda_d", format!("{s:?}")),
        };
        kv.insert("trials", self.trials.to_string());
        kv.insert("seed", self.seed.to_string());
        if let Some(q) = self.quadrature_order {
            kv.insert("quadrature_order", q.to_string());
        }
        if let Some(n) = self.max_azimuthal_order {
            kv.insert("max_azimuthal_order", n.to_string());
        }
        kv.insert("cell_counts", join(&self.cell_counts, |v| v.to_string()));
        kv.insert(
            "partition",
            match self.partition {
                PartitionLayout::Shared => "shared",
                PartitionLayout::Independent => "independent",
            }
            .to_string(),
        );
        kv.insert("f_samples", self.f_samples.to_string());
        kv.insert("f_panels", self.f_panels.to_string());
        kv.insert(
            "sampling",
            match self.sampling {
                Sampling::Disc => "disc",
                Sampling::Ball => "ball",
            }
            .to_string(),
        );
        kv.insert("scan_m", join(&self.scan_m, |v| v.to_string()));
        kv.insert("scan_s_over_ld", join(&self.scan_s_over_ld, |v| format!("{v:?}")));
        kv.insert("scan_gamma_g", join(&self.scan_gamma_g, |v| format!("{v:?}")));
        let mut out = String::from("schema = scenario/1\n");
        for (k, v) in kv {
            if !v.is_empty() {
                writeln!(out, "{k} = {v}").unwrap();
            }
        }
        out
    }

    /// Hex SHA-256 of [`ScenarioConfig::canonical`].
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
    }

    /// First 64 bits of the fingerprint, used as a random-stream id.
    pub fn fingerprint_id(&self) -> u64 {
        let digest = Sha256::digest(self.canonical().as_bytes());
        u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    /// Fingerprint of the physical scenario only (seed and trial count
    /// excluded), so random streams depend on the seed separately.
    pub fn stream_id(&self) -> u64 {
        let mut base = self.clone();
        base.seed = 0;
        base.trials = 1;
        base.fingerprint_id()
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}
