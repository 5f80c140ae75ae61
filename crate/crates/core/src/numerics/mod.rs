//! Numerical building blocks shared by the physics modules.

pub mod bessel;
pub mod phase;
pub mod quadrature;
pub mod summation;

pub use bessel::{bessel_j, bessel_j_orders, j1_over_x};
pub use quadrature::GaussLegendre;
pub use summation::{pairwise_sum, SampleStats};

/// `⌈x⌉`, except that values within `1e-9` (relative) of an integer snap to it.
/// Keeps identities like `⌈(√M·λd)²/(λd)²⌉ = M` exact under rounding.
pub fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}
