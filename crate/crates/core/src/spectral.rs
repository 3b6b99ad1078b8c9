//! Biphoton joint spectral intensity.
//!
//! The JSI factorises in rotated coordinates `s = ω1 + ω2 - 2ω0` (diagonal,
//! set by the pump) and `x = ω1 - ω2` (antidiagonal, set by the bandpass
//! filter): `S(ω1, ω2) = 2·a(x)·d(s)`, where `a` and `d` are unit-area
//! densities and the factor 2 is the Jacobian of the rotation.
//!
//! Gaussian widths follow the `exp[-2(x/Ω)²]` scale, so a full width at half
//! maximum maps to `FWHM = Ω·sqrt(2 ln 2)`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{QoctError, Result};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AntidiagonalProfile {
    #[default]
    Gaussian,
    /// Top-hat of full width `Ω_a` in `ω1 - ω2`.
    Rectangular,
}

impl std::str::FromStr for AntidiagonalProfile {
    type Err = QoctError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "rectangular" | "rect" => Ok(Self::Rectangular),
            other => Err(QoctError::InvalidSpectralModel(format!(
                "unknown filter shape '{other}' (expected gaussian or rectangular)"
            ))),
        }
    }
}

impl std::fmt::Display for AntidiagonalProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Rectangular => "rectangular",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    /// Degenerate centre frequency (half the pump frequency), rad/s.
    pub omega0: f64,
    /// Antidiagonal bandwidth, rad/s.
    pub omega_a: f64,
    /// Diagonal bandwidth, rad/s.
    pub omega_d: f64,
    pub profile: AntidiagonalProfile,
}

impl SpectralModel {
    pub fn new(
        omega0: f64,
        omega_a: f64,
        omega_d: f64,
        profile: AntidiagonalProfile,
    ) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("Omega_a", omega_a), ("Omega_d", omega_d)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(QoctError::InvalidSpectralModel(format!(
                    "{name} must be finite and > 0, got {v:e}"
                )));
            }
        }
        Ok(Self {
            omega0,
            omega_a,
            omega_d,
            profile,
        })
    }

    /// Maps laboratory settings onto the JSI parameters.
    ///
    /// The filter acts on each photon, so a filter width `Δω_f` at
    /// `center_nm` spans `2Δω_f` in `x = ω1 - ω2` once the pump pins
    /// `ω1 + ω2`. Gaussian: `Ω_a = 2Δω_f / sqrt(2 ln 2)`; rectangular:
    /// `Ω_a = 2Δω_f`. The pump linewidth (Hz, FWHM) sets
    /// `Ω_d = 2π·Δν / sqrt(2 ln 2)`.
    pub fn from_wavelengths(
        pump_nm: f64,
        center_nm: f64,
        filter_fwhm_nm: f64,
        pump_linewidth_hz: f64,
        profile: AntidiagonalProfile,
    ) -> Result<Self> {
        for (name, v) in [
            ("pump wavelength", pump_nm),
            ("center wavelength", center_nm),
            ("filter width", filter_fwhm_nm),
            ("pump linewidth", pump_linewidth_hz),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(QoctError::InvalidSpectralModel(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        let omega0 = omega0_for_pump(pump_nm);
        let center = center_nm * 1e-9;
        let filter_omega = 2.0 * PI * SPEED_OF_LIGHT * (filter_fwhm_nm * 1e-9) / (center * center);
        let fwhm_to_scale = (2.0 * LN_2).sqrt();
        let omega_a = match profile {
            AntidiagonalProfile::Gaussian => 2.0 * filter_omega / fwhm_to_scale,
            AntidiagonalProfile::Rectangular => 2.0 * filter_omega,
        };
        let omega_d = 2.0 * PI * pump_linewidth_hz / fwhm_to_scale;
        Self::new(omega0, omega_a, omega_d, profile)
    }

    /// Same bandwidths, different pump wavelength.
    pub fn with_pump_nm(&self, pump_nm: f64) -> Result<Self> {
        Self::new(omega0_for_pump(pump_nm), self.omega_a, self.omega_d, self.profile)
    }

    pub fn with_omega_d(&self, omega_d: f64) -> Result<Self> {
        Self::new(self.omega0, self.omega_a, omega_d, self.profile)
    }

    pub fn pump_nm(&self) -> f64 {
        PI * SPEED_OF_LIGHT / self.omega0 * 1e9
    }

    pub fn tau_a(&self) -> f64 {
        4.0 / self.omega_a
    }

    pub fn tau_d(&self) -> f64 {
        4.0 / self.omega_d
    }

    /// Unit-area antidiagonal density `a(x)`.
    pub fn antidiagonal_density(&self, x: f64) -> f64 {
        match self.profile {
            AntidiagonalProfile::Gaussian => {
                let u = x / self.omega_a;
                (2.0 / PI).sqrt() / self.omega_a * (-2.0 * u * u).exp()
            }
            AntidiagonalProfile::Rectangular => {
                if x.abs() <= 0.5 * self.omega_a {
                    1.0 / self.omega_a
                } else {
                    0.0
                }
            }
        }
    }

    /// Unit-area diagonal density `d(s)`.
    pub fn diagonal_density(&self, s: f64) -> f64 {
        let u = s / self.omega_d;
        (2.0 / PI).sqrt() / self.omega_d * (-2.0 * u * u).exp()
    }

    /// Half-width of the antidiagonal support used by quadrature.
    pub fn antidiagonal_half_width(&self, span_bandwidths: f64) -> f64 {
        match self.profile {
            AntidiagonalProfile::Gaussian => span_bandwidths * self.omega_a,
            AntidiagonalProfile::Rectangular => 0.5 * self.omega_a,
        }
    }

    /// `∫ a(x)·e^{-ixτ} dx`: the normalised single-dip shape at delay `tau`.
    pub fn dip_shape(&self, tau: f64) -> f64 {
        match self.profile {
            AntidiagonalProfile::Gaussian => {
                let u = tau / self.tau_a();
                (-2.0 * u * u).exp()
            }
            AntidiagonalProfile::Rectangular => sinc(0.5 * self.omega_a * tau),
        }
    }

    /// Overlap factor of two paths `delta` apart inside `Γ0`: the
    /// antidiagonal part of the coherence at `delta/2`.
    pub fn antidiagonal_coherence(&self, delta: f64) -> f64 {
        self.dip_shape(0.5 * delta)
    }

    /// Gaussian damping `exp[-½(Δ/τ_d)²]` from the pump bandwidth.
    pub fn diagonal_damping(&self, delta: f64) -> f64 {
        let u = delta / self.tau_d();
        (-0.5 * u * u).exp()
    }

    /// Joint spectral intensity `S(ω1, ω2)`, units 1/(rad/s)².
    pub fn jsi(&self, omega1: f64, omega2: f64) -> f64 {
        let s = omega1 + omega2 - 2.0 * self.omega0;
        let x = omega1 - omega2;
        2.0 * self.antidiagonal_density(x) * self.diagonal_density(s)
    }
}

/// `ω0 = πc/λp`.
pub fn omega0_for_pump(pump_nm: f64) -> f64 {
    PI * SPEED_OF_LIGHT / (pump_nm * 1e-9)
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> SpectralModel {
        SpectralModel::new(2.3e15, 2.0e14, 5.0e13, AntidiagonalProfile::Gaussian).unwrap()
    }

    #[test]
    fn peak_value() {
        let m = model();
        assert_relative_eq!(
            m.jsi(m.omega0, m.omega0),
            4.0 / (PI * m.omega_a * m.omega_d),
            max_relative = 1e-14
        );
    }

    #[test]
    fn unit_argument_exponential() {
        let m = model();
        let w1 = m.omega0 + 0.5 * m.omega_a;
        let w2 = m.omega0 - 0.5 * m.omega_a;
        assert_relative_eq!(
            m.jsi(w1, w2),
            4.0 / (PI * m.omega_a * m.omega_d) * (-2.0f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn symmetric_in_frequencies() {
        for profile in [AntidiagonalProfile::Gaussian, AntidiagonalProfile::Rectangular] {
            let m = SpectralModel { profile, ..model() };
            for (a, b) in [(2.31e15, 2.28e15), (2.2e15, 2.45e15), (2.3e15, 2.3e15)] {
                assert_eq!(m.jsi(a, b), m.jsi(b, a));
            }
        }
    }

    #[test]
    fn pump_sets_half_frequency() {
        let m = SpectralModel::from_wavelengths(404.5, 800.0, 40.0, 2e5, AntidiagonalProfile::Gaussian)
            .unwrap();
        assert_relative_eq!(m.omega0, PI * SPEED_OF_LIGHT / 404.5e-9, max_relative = 1e-15);
        assert_relative_eq!(m.pump_nm(), 404.5, max_relative = 1e-12);
    }

    #[test]
    fn filter_width_scales_tau_a() {
        for profile in [AntidiagonalProfile::Gaussian, AntidiagonalProfile::Rectangular] {
            let narrow = SpectralModel::from_wavelengths(404.5, 800.0, 20.0, 2e5, profile).unwrap();
            let wide = SpectralModel::from_wavelengths(404.5, 800.0, 40.0, 2e5, profile).unwrap();
            assert_relative_eq!(wide.tau_a(), 0.5 * narrow.tau_a(), max_relative = 1e-14);
        }
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let g = AntidiagonalProfile::Gaussian;
        assert!(SpectralModel::from_wavelengths(0.0, 800.0, 40.0, 1.0, g).is_err());
        assert!(SpectralModel::from_wavelengths(404.5, -1.0, 40.0, 1.0, g).is_err());
        assert!(SpectralModel::from_wavelengths(404.5, 800.0, 0.0, 1.0, g).is_err());
        assert!(SpectralModel::from_wavelengths(404.5, 800.0, 40.0, 0.0, g).is_err());
        assert!(SpectralModel::new(1.0, 1.0, f64::NAN, g).is_err());
    }

    #[test]
    fn wider_bandwidth_shortens_tau_a() {
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let m = SpectralModel::new(2.3e15, k as f64 * 1e13, 1e10, AntidiagonalProfile::Gaussian)
                .unwrap();
            assert!(m.tau_a() < prev);
            prev = m.tau_a();
        }
    }

    #[test]
    fn profile_parsing() {
        assert_eq!("Gaussian".parse::<AntidiagonalProfile>().unwrap(), AntidiagonalProfile::Gaussian);
        assert_eq!("rectangular".parse::<AntidiagonalProfile>().unwrap(), AntidiagonalProfile::Rectangular);
        assert!("lorentzian".parse::<AntidiagonalProfile>().is_err());
    }
}
