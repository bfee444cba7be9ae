//! Free-space link-budget gains for the three paths of the downlink:
//! satellite to RIS, RIS to ground terminal, and the direct satellite to
//! ground link.
//!
//! All functions are pure. Subcarrier indices are zero-based throughout the
//! crate; subcarrier `m` sits at `f_c + (m - (M - 1) / 2) * B`, a uniform grid
//! centred on the carrier.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed used for every wavelength computation (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Geostationary altitude, used as the default slant range (m).
pub const GEO_ALTITUDE_M: f64 = 35_786e3;

/// Complex channel coefficient.
pub type ComplexGain = Complex64;

/// Converts a power ratio in decibels to a linear ratio.
pub fn db_to_linear(value_db: f64) -> Result<f64> {
    if !value_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "decibel value must be finite, got {value_db}"
        )));
    }
    Ok(10f64.powf(value_db / 10.0))
}

/// Distances, angles and the subcarrier plan of the three links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGeometry {
    /// Satellite to ground terminal distance (m).
    pub d1: f64,
    /// Satellite to RIS distance (m).
    pub d2: f64,
    /// RIS to ground terminal distance (m).
    pub d3: f64,
    /// Angle of incidence at the RIS (rad), in `[0, pi/2]`.
    pub psi: f64,
    /// Carrier frequency (Hz).
    pub carrier_freq: f64,
    /// Bandwidth of each subcarrier (Hz).
    pub subcarrier_bandwidth: f64,
    pub num_subcarriers: usize,
    /// Satellite antenna phase (rad).
    pub phi: f64,
}

impl Default for ScenarioGeometry {
    fn default() -> Self {
        Self {
            d1: GEO_ALTITUDE_M,
            d2: GEO_ALTITUDE_M,
            d3: 500.0,
            psi: 60f64.to_radians(),
            carrier_freq: 1.5e9,
            subcarrier_bandwidth: 10e6,
            num_subcarriers: 8,
            phi: 0.0,
        }
    }
}

impl ScenarioGeometry {
    /// Returns every violated invariant as a human readable message.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [("d1", self.d1), ("d2", self.d2), ("d3", self.d3)] {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if !(0.0..=FRAC_PI_2).contains(&self.psi) {
            out.push(format!(
                "psi must lie in [0, 90] degrees, got {} degrees",
                self.psi.to_degrees()
            ));
        }
        if !(self.carrier_freq.is_finite() && self.carrier_freq > 0.0) {
            out.push(format!("carrier_freq must be > 0, got {}", self.carrier_freq));
        }
        if !(self.subcarrier_bandwidth.is_finite() && self.subcarrier_bandwidth > 0.0) {
            out.push(format!(
                "subcarrier_bandwidth must be > 0, got {}",
                self.subcarrier_bandwidth
            ));
        }
        if self.num_subcarriers == 0 {
            out.push("num_subcarriers must be >= 1".into());
        }
        if !self.phi.is_finite() {
            out.push(format!("phi must be finite, got {}", self.phi));
        }
        if self.num_subcarriers > 0 {
            let lowest = self.carrier_freq
                - (self.num_subcarriers as f64 - 1.0) / 2.0 * self.subcarrier_bandwidth;
            if lowest <= 0.0 {
                out.push(format!(
                    "subcarrier plan reaches non-positive frequency {lowest} Hz"
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    fn check_index(&self, m: usize) -> Result<()> {
        if m >= self.num_subcarriers {
            return Err(Error::IndexOutOfRange {
                index: m,
                lo: 0,
                hi: self.num_subcarriers.saturating_sub(1),
            });
        }
        Ok(())
    }
}

/// Satellite beam gain and ground terminal gain, both as linear power ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaGains {
    pub sat_beam_gain: f64,
    pub ground_gain: f64,
}

impl AntennaGains {
    pub fn new(sat_beam_gain: f64, ground_gain: f64) -> Result<Self> {
        let g = Self {
            sat_beam_gain,
            ground_gain,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn from_db(sat_beam_gain_db: f64, ground_gain_db: f64) -> Result<Self> {
        Self::new(db_to_linear(sat_beam_gain_db)?, db_to_linear(ground_gain_db)?)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("sat_beam_gain", self.sat_beam_gain),
            ("ground_gain", self.ground_gain),
        ] {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

impl Default for AntennaGains {
    /// 51.8 dBi satellite beam, -13.5 dB ground terminal.
    fn default() -> Self {
        Self {
            sat_beam_gain: 10f64.powf(5.18),
            ground_gain: 10f64.powf(-1.35),
        }
    }
}

/// Reflecting surface dimensions. `num_elements == 0` models the conventional
/// system with no RIS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisPanel {
    pub num_elements: usize,
    /// Width (m).
    pub width: f64,
    /// Length (m).
    pub length: f64,
}

impl Default for RisPanel {
    fn default() -> Self {
        Self {
            num_elements: 10,
            width: 1.0,
            length: 1.0,
        }
    }
}

impl RisPanel {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [("width", self.width), ("length", self.length)] {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("RIS {name} must be finite and > 0, got {v}"));
            }
        }
        out
    }
}

/// Centre frequency of subcarrier `m` (Hz).
pub fn subcarrier_frequency(geom: &ScenarioGeometry, m: usize) -> Result<f64> {
    geom.check_index(m)?;
    let offset = m as f64 - (geom.num_subcarriers as f64 - 1.0) / 2.0;
    Ok(geom.carrier_freq + offset * geom.subcarrier_bandwidth)
}

/// Wavelength of subcarrier `m` (m).
pub fn subcarrier_wavelength(geom: &ScenarioGeometry, m: usize) -> Result<f64> {
    Ok(SPEED_OF_LIGHT / subcarrier_frequency(geom, m)?)
}

/// Satellite to RIS element gain `sqrt(G_S) / (4 pi d2 / lambda) * exp(-i phi)`.
/// Identical for every element.
pub fn sat_to_ris_gain(
    geom: &ScenarioGeometry,
    gains: &AntennaGains,
    m: usize,
) -> Result<ComplexGain> {
    let lambda = subcarrier_wavelength(geom, m)?;
    let magnitude = gains.sat_beam_gain.sqrt() / (4.0 * PI * geom.d2 / lambda);
    Ok(Complex64::from_polar(magnitude, -geom.phi))
}

/// RIS element to ground gain `sqrt(G_D) X Y / d3 * cos^2(psi)`. Real,
/// non-negative and identical for every element.
pub fn ris_to_ground_gain(
    geom: &ScenarioGeometry,
    gains: &AntennaGains,
    panel: &RisPanel,
    m: usize,
) -> Result<f64> {
    geom.check_index(m)?;
    let c = geom.psi.cos();
    // cos(pi/2) is ~6e-17 in floating point; the gain there is exactly zero.
    let cos_sq = if geom.psi >= FRAC_PI_2 { 0.0 } else { c * c };
    Ok(gains.ground_gain.sqrt() * panel.width * panel.length / geom.d3 * cos_sq)
}

/// Direct satellite to ground gain `sqrt(G_S G_D) / (4 pi d1 / lambda)`.
pub fn direct_gain(geom: &ScenarioGeometry, gains: &AntennaGains, m: usize) -> Result<f64> {
    let lambda = subcarrier_wavelength(geom, m)?;
    Ok((gains.sat_beam_gain * gains.ground_gain).sqrt() / (4.0 * PI * geom.d1 / lambda))
}
