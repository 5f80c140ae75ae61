//! Scalar link-budget arithmetic and the SISO baseline.
//!
//! Everything is in SI units; spectral efficiencies are in bits/s/Hz.

use crate::error::{Error, Result};

/// Above this channel gain the deep-space approximations start to strain.
pub const DEEP_SPACE_GAIN_WARNING: f64 = 1e-3;

/// Physical parameters of a point-to-point link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub wavelength_m: f64,
    pub range_m: f64,
    pub tx_aperture_m2: f64,
    pub rx_aperture_m2: f64,
    /// Aggregate unmodeled loss factor, in (0, 1].
    pub loss_factor: f64,
    pub power_w: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_w_per_hz: f64,
}

impl LinkBudget {
    /// Checks every field and the `g < 1` regime requirement.
    pub fn validated(self) -> Result<Self> {
        let fields = [
            ("wavelength_m", self.wavelength_m),
            ("range_m", self.range_m),
            ("tx_aperture_m2", self.tx_aperture_m2),
            ("rx_aperture_m2", self.rx_aperture_m2),
            ("loss_factor", self.loss_factor),
            ("power_w", self.power_w),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_psd_w_per_hz", self.noise_psd_w_per_hz),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invariant(format!(
                    "link budget field {name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.loss_factor > 1.0 {
            return Err(Error::invariant(format!(
                "loss_factor must be <= 1, got {}",
                self.loss_factor
            )));
        }
        let g = channel_gain(&self);
        if g >= 1.0 {
            return Err(Error::invariant(format!(
                "channel gain g = {g} >= 1 is outside the far-field regime"
            )));
        }
        Ok(self)
    }

    /// Non-fatal diagnostics about the budget.
    pub fn warnings(&self) -> Vec<String> {
        let g = channel_gain(self);
        if g > DEEP_SPACE_GAIN_WARNING {
            vec![format!(
                "channel gain g = {g:e} exceeds {DEEP_SPACE_GAIN_WARNING:e}; \
                 the g << 1 approximations may be loose"
            )]
        } else {
            Vec::new()
        }
    }

    pub fn lambda_d(&self) -> f64 {
        self.wavelength_m * self.range_m
    }

    pub fn gamma_g(&self) -> f64 {
        input_snr(self) * channel_gain(self)
    }
}

/// `g = A_T·A_R·L / (λ²d²)`.
pub fn channel_gain(budget: &LinkBudget) -> f64 {
    let ld = budget.wavelength_m * budget.range_m;
    budget.tx_aperture_m2 * budget.rx_aperture_m2 * budget.loss_factor / (ld * ld)
}

/// `γ = P / (B·N₀)`.
pub fn input_snr(budget: &LinkBudget) -> f64 {
    budget.power_w / (budget.bandwidth_hz * budget.noise_psd_w_per_hz)
}

/// `log₂(1 + γg)`.
pub fn siso_spectral_efficiency(gamma: f64, g: f64) -> f64 {
    (gamma * g).ln_1p() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> LinkBudget {
        LinkBudget {
            wavelength_m: 1.0,
            range_m: 1.0,
            tx_aperture_m2: 1.0,
            rx_aperture_m2: 1.0,
            loss_factor: 1.0,
            power_w: 1.0,
            bandwidth_hz: 1.0,
            noise_psd_w_per_hz: 1.0,
        }
    }

    #[test]
    fn unit_budget_has_unit_gain_and_snr() {
        assert_eq!(channel_gain(&unit()), 1.0);
        assert_eq!(input_snr(&unit()), 1.0);
        // g = 1 is rejected as a scenario
        assert!(unit().validated().is_err());
    }

    #[test]
    fn deep_space_gain_example() {
        let b = LinkBudget {
            wavelength_m: 0.01,
            range_m: 4e8,
            tx_aperture_m2: 10.0,
            rx_aperture_m2: 10.0,
            loss_factor: 0.5,
            ..unit()
        };
        let g = channel_gain(&b);
        assert!((g - 3.125e-12).abs() < 1e-12 * 3.125e-12);
        assert!(b.validated().is_ok());
        assert!(b.warnings().is_empty());
        let far = LinkBudget {
            range_m: 8e8,
            ..b
        };
        assert!((channel_gain(&far) * 4.0 - g).abs() < 1e-15 * g);
    }

    #[test]
    fn snr_example() {
        let b = LinkBudget {
            power_w: 100.0,
            bandwidth_hz: 1e6,
            noise_psd_w_per_hz: 1e-20,
            ..unit()
        };
        assert!((input_snr(&b) - 1e16).abs() < 1.0);
        let double = LinkBudget {
            power_w: 200.0,
            ..b
        };
        assert!((input_snr(&double) - 2.0 * input_snr(&b)).abs() < 4.0);
    }

    #[test]
    fn siso_values() {
        assert_eq!(siso_spectral_efficiency(0.0, 5.0), 0.0);
        assert!((siso_spectral_efficiency(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((siso_spectral_efficiency(3.0, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_fields_are_rejected() {
        let base = LinkBudget {
            range_m: 1e6,
            ..unit()
        };
        assert!(base.validated().is_ok());
        assert!(LinkBudget { loss_factor: 1.5, ..base }.validated().is_err());
        assert!(LinkBudget { power_w: 0.0, ..base }.validated().is_err());
        assert!(LinkBudget { wavelength_m: -1.0, ..base }.validated().is_err());
        assert!(LinkBudget { bandwidth_hz: f64::NAN, ..base }.validated().is_err());
        let near = LinkBudget { range_m: 10.0, ..base };
        assert_eq!(near.validated().unwrap().warnings().len(), 1);
    }

    proptest! {
        #[test]
        fn gain_scaling_laws(
            at in 0.1f64..100.0, ar in 0.1f64..100.0, l in 0.01f64..1.0,
            lam in 1e-3f64..1.0, d in 1e3f64..1e9, k in 0.1f64..10.0,
        ) {
            let b = LinkBudget { wavelength_m: lam, range_m: d, tx_aperture_m2: at,
                rx_aperture_m2: ar, loss_factor: l, ..unit() };
            let g = channel_gain(&b);
            let tol = 1e-13 * g;
            let scaled_at = channel_gain(&LinkBudget { tx_aperture_m2: k * at, ..b });
            let scaled_ar = channel_gain(&LinkBudget { rx_aperture_m2: k * ar, ..b });
            let scaled_lam = channel_gain(&LinkBudget { wavelength_m: k * lam, ..b });
            let scaled_d = channel_gain(&LinkBudget { range_m: k * d, ..b });
            prop_assert!((scaled_at - k * g).abs() <= tol * k);
            prop_assert!((scaled_ar - k * g).abs() <= tol * k);
            prop_assert!((scaled_lam * k * k - g).abs() <= tol);
            prop_assert!((scaled_d * k * k - g).abs() <= tol);
        }

        #[test]
        fn siso_strictly_increasing(a in 0.0f64..1e6, da in 1e-6f64..1e3) {
            prop_assert!(siso_spectral_efficiency(a + da, 1.0) > siso_spectral_efficiency(a, 1.0));
        }
    }
}
