#![allow(dead_code)]

use spacemimo::linkbudget::LinkBudget;
use spacemimo::scenario::{Geometry, PartitionLayout, Sampling, ScenarioConfig};

/// 1 cm carrier over 4·10⁵ km between 10 m² apertures.
pub fn base_scenario() -> ScenarioConfig {
    ScenarioConfig {
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
        streams: 1,
        geometry: Geometry::AreaOverLambdaD(1.0),
        trials: 100,
        seed: 0,
        quadrature_order: None,
        max_azimuthal_order: None,
        cell_counts: vec![64, 256, 1024, 4096],
        partition: PartitionLayout::Shared,
        f_samples: 100_000,
        f_panels: 64,
        sampling: Sampling::Disc,
        scan_m: vec![],
        scan_s_over_ld: vec![],
        scan_gamma_g: vec![],
    }
}

pub fn scenario(m: usize, s_over_ld: f64, gamma_g: f64) -> ScenarioConfig {
    base_scenario().with_targets(m, s_over_ld, gamma_g)
}

pub const UNIT_CONFIG: &str = "\
# 1 cm carrier, 400 000 km, 10 m^2 apertures
wavelength_m = 0.01
range_m = 4e8
tx_aperture_m2 = 10
rx_aperture_m2 = 10
loss_factor = 1
power_w = 1
bandwidth_hz = 1e6
noise_psd_w_per_hz = 1e-20
streams = 4
area_over_lambda_d = 3
trials = 200
seed = 42
cell_counts = 64, 256
f_samples = 20000
scan_m = 1, 4
scan_s_over_ld = 1, 10
scan_gamma_g = 1, 100
";

/// Prints one verdict line and returns whether it passed.
pub fn verdict(id: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {id:>2} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
