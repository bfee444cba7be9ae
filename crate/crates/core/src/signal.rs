//! Effective channel, SNR, capacity and constraint checks for one channel
//! realization.

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{self, AntennaGains, ComplexGain, RisPanel, ScenarioGeometry};
use crate::error::{Error, Result};

/// Relative slack on the power budget below which a sum is considered to
/// meet it. Absorbs the rounding of `budget / M` summed `M` times.
pub const BUDGET_RTOL: f64 = 1e-12;

/// Maps a phase onto `[0, 2pi)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Per-element reflection amplitudes and phases of the surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisConfiguration {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

impl RisConfiguration {
    /// Validates amplitudes and stores phases canonically in `[0, 2pi)`.
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes but {} phases",
                amplitudes.len(),
                phases.len()
            )));
        }
        if let Some(a) = amplitudes.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidArgument(format!(
                "reflection amplitude {a} outside [0, 1]"
            )));
        }
        if let Some(p) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("phase {p} is not finite")));
        }
        let phases = phases.into_iter().map(wrap_phase).collect();
        Ok(Self { amplitudes, phases })
    }

    /// Every element at the given amplitude with the given phases.
    pub fn uniform(amplitude: f64, phases: Vec<f64>) -> Result<Self> {
        Self::new(vec![amplitude; phases.len()], phases)
    }

    /// Unit-amplitude surface.
    pub fn unit(phases: Vec<f64>) -> Result<Self> {
        Self::uniform(1.0, phases)
    }

    /// A surface that reflects nothing: the conventional no-RIS system.
    pub fn off(num_elements: usize) -> Self {
        Self {
            amplitudes: vec![0.0; num_elements],
            phases: vec![0.0; num_elements],
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Diagonal reflection coefficient `alpha_k exp(i theta_k)`.
    pub fn coefficient(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.amplitudes[k], self.phases[k])
    }
}

/// Per-subcarrier transmit powers under a total budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// Watts per subcarrier.
    pub powers: Vec<f64>,
    /// Total budget (W).
    pub budget: f64,
}

impl PowerAllocation {
    pub fn new(powers: Vec<f64>, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "power budget must be finite and >= 0, got {budget}"
            )));
        }
        if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "subcarrier power {p} must be finite and >= 0"
            )));
        }
        let alloc = Self { powers, budget };
        if alloc.budget_excess() > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "powers sum to {} W, exceeding the {} W budget",
                alloc.total(),
                budget
            )));
        }
        Ok(alloc)
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// `max(0, sum - budget)`, with sums within [`BUDGET_RTOL`] of the budget
    /// counted as meeting it.
    pub fn budget_excess(&self) -> f64 {
        let excess = self.total() - self.budget;
        if excess > BUDGET_RTOL * self.budget {
            excess
        } else {
            0.0
        }
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// Channel coefficients of one realization. Element gains are stored
/// row-major, `M` rows of `K` elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRealization {
    num_subcarriers: usize,
    num_elements: usize,
    sat_to_ris: Vec<ComplexGain>,
    ris_to_ground: Vec<f64>,
    direct: Vec<f64>,
    noise_variance: f64,
}

impl LinkRealization {
    pub fn new(
        num_subcarriers: usize,
        num_elements: usize,
        sat_to_ris: Vec<ComplexGain>,
        ris_to_ground: Vec<f64>,
        direct: Vec<f64>,
        noise_variance: f64,
    ) -> Result<Self> {
        let cells = num_subcarriers * num_elements;
        if num_subcarriers == 0 {
            return Err(Error::ShapeMismatch("link needs at least one subcarrier".into()));
        }
        if sat_to_ris.len() != cells || ris_to_ground.len() != cells {
            return Err(Error::ShapeMismatch(format!(
                "expected {num_subcarriers}x{num_elements} element gains, got {} and {}",
                sat_to_ris.len(),
                ris_to_ground.len()
            )));
        }
        if direct.len() != num_subcarriers {
            return Err(Error::ShapeMismatch(format!(
                "expected {num_subcarriers} direct gains, got {}",
                direct.len()
            )));
        }
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be finite and > 0, got {noise_variance}"
            )));
        }
        let finite = sat_to_ris.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && ris_to_ground.iter().all(|x| x.is_finite())
            && direct.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("channel gains must be finite".into()));
        }
        Ok(Self {
            num_subcarriers,
            num_elements,
            sat_to_ris,
            ris_to_ground,
            direct,
            noise_variance,
        })
    }

    /// Deterministic link-budget gains for every subcarrier and element.
    pub fn from_channel_model(
        geom: &ScenarioGeometry,
        gains: &AntennaGains,
        panel: &RisPanel,
        noise_variance: f64,
    ) -> Result<Self> {
        geom.validate()?;
        gains.validate()?;
        let (m_count, k_count) = (geom.num_subcarriers, panel.num_elements);
        let mut g = Vec::with_capacity(m_count * k_count);
        let mut h = Vec::with_capacity(m_count * k_count);
        let mut f = Vec::with_capacity(m_count);
        for m in 0..m_count {
            let gm = channel::sat_to_ris_gain(geom, gains, m)?;
            let hm = channel::ris_to_ground_gain(geom, gains, panel, m)?;
            g.extend(std::iter::repeat_n(gm, k_count));
            h.extend(std::iter::repeat_n(hm, k_count));
            f.push(channel::direct_gain(geom, gains, m)?);
        }
        Self::new(m_count, k_count, g, h, f, noise_variance)
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn sat_to_ris(&self, m: usize, k: usize) -> ComplexGain {
        self.sat_to_ris[m * self.num_elements + k]
    }

    pub fn ris_to_ground(&self, m: usize, k: usize) -> f64 {
        self.ris_to_ground[m * self.num_elements + k]
    }

    pub fn direct(&self, m: usize) -> f64 {
        self.direct[m]
    }

    /// Multiplies every element gain of element `k` by `exp(i xi_k)`.
    pub fn rotate_elements(&mut self, element_phases: &[f64]) -> Result<()> {
        if element_phases.len() != self.num_elements {
            return Err(Error::ShapeMismatch(format!(
                "{} element phases for {} elements",
                element_phases.len(),
                self.num_elements
            )));
        }
        for row in self.sat_to_ris.chunks_mut(self.num_elements.max(1)) {
            for (z, xi) in row.iter_mut().zip(element_phases) {
                *z *= Complex64::from_polar(1.0, *xi);
            }
        }
        Ok(())
    }

    fn check_subcarrier(&self, m: usize) -> Result<()> {
        if m >= self.num_subcarriers {
            return Err(Error::IndexOutOfRange {
                index: m,
                lo: 0,
                hi: self.num_subcarriers - 1,
            });
        }
        Ok(())
    }

    fn check_ris(&self, ris: &RisConfiguration) -> Result<()> {
        if ris.amplitudes.len() != self.num_elements || ris.phases.len() != self.num_elements {
            return Err(Error::ShapeMismatch(format!(
                "RIS configuration has {}/{} amplitudes/phases, link has {} elements",
                ris.amplitudes.len(),
                ris.phases.len(),
                self.num_elements
            )));
        }
        Ok(())
    }

    fn check_power(&self, power: &PowerAllocation) -> Result<()> {
        if power.powers.len() != self.num_subcarriers {
            return Err(Error::ShapeMismatch(format!(
                "{} powers for {} subcarriers",
                power.powers.len(),
                self.num_subcarriers
            )));
        }
        Ok(())
    }
}

/// Minimum SNR (linear) demanded on each subcarrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QosRequirement {
    pub min_snr: Vec<f64>,
}

impl QosRequirement {
    pub fn none(num_subcarriers: usize) -> Self {
        Self::uniform(num_subcarriers, 0.0)
    }

    pub fn uniform(num_subcarriers: usize, min_snr: f64) -> Self {
        Self {
            min_snr: vec![min_snr; num_subcarriers],
        }
    }
}

/// `H_m = sum_k g_mk alpha_k exp(i theta_k) h_mk + f_m`.
pub fn effective_channel(
    link: &LinkRealization,
    ris: &RisConfiguration,
    m: usize,
) -> Result<ComplexGain> {
    link.check_ris(ris)?;
    link.check_subcarrier(m)?;
    Ok(effective_channel_unchecked(link, ris, m))
}

fn effective_channel_unchecked(link: &LinkRealization, ris: &RisConfiguration, m: usize) -> Complex64 {
    let mut acc = Complex64::new(link.direct(m), 0.0);
    for k in 0..link.num_elements {
        acc += link.sat_to_ris(m, k) * ris.coefficient(k) * link.ris_to_ground(m, k);
    }
    acc
}

/// Effective channel of every subcarrier.
pub fn effective_channels(link: &LinkRealization, ris: &RisConfiguration) -> Result<Vec<ComplexGain>> {
    link.check_ris(ris)?;
    let coeffs: Vec<Complex64> = (0..link.num_elements).map(|k| ris.coefficient(k)).collect();
    Ok(channels_with(link, &coeffs).collect())
}

/// `|H_m|^2` for every subcarrier when all elements share one amplitude.
pub fn channel_power_gains(link: &LinkRealization, amplitude: f64, phases: &[f64]) -> Result<Vec<f64>> {
    if phases.len() != link.num_elements {
        return Err(Error::ShapeMismatch(format!(
            "{} phases for {} elements",
            phases.len(),
            link.num_elements
        )));
    }
    let coeffs: Vec<Complex64> = phases.iter().map(|&t| Complex64::from_polar(amplitude, t)).collect();
    Ok(channels_with(link, &coeffs).map(|h| h.norm_sqr()).collect())
}

fn channels_with<'l>(
    link: &'l LinkRealization,
    coeffs: &'l [Complex64],
) -> impl Iterator<Item = ComplexGain> + 'l {
    (0..link.num_subcarriers).map(move |m| {
        let row = m * link.num_elements;
        let mut acc = Complex64::new(link.direct[m], 0.0);
        for (k, c) in coeffs.iter().enumerate() {
            acc += link.sat_to_ris[row + k] * c * link.ris_to_ground[row + k];
        }
        acc
    })
}

/// Received SNR `|H_m|^2 p_m / sigma^2`.
pub fn snr(
    link: &LinkRealization,
    ris: &RisConfiguration,
    power: &PowerAllocation,
    m: usize,
) -> Result<f64> {
    link.check_power(power)?;
    let h = effective_channel(link, ris, m)?;
    Ok(h.norm_sqr() * power.powers[m] / link.noise_variance)
}

fn snrs(link: &LinkRealization, ris: &RisConfiguration, power: &PowerAllocation) -> Result<Vec<f64>> {
    link.check_power(power)?;
    Ok(effective_channels(link, ris)?
        .iter()
        .zip(&power.powers)
        .map(|(h, p)| h.norm_sqr() * p / link.noise_variance)
        .collect())
}

/// Shannon rate `B log2(1 + gamma)` of one subcarrier, accurate for tiny SNR.
pub fn shannon_rate(bandwidth: f64, snr: f64) -> f64 {
    bandwidth * snr.ln_1p() / LN_2
}

/// Sum Shannon capacity `sum_m B log2(1 + gamma_m)` in bits/s.
pub fn capacity(
    link: &LinkRealization,
    ris: &RisConfiguration,
    power: &PowerAllocation,
    bandwidth: f64,
) -> Result<f64> {
    Ok(snrs(link, ris, power)?
        .into_iter()
        .map(|g| shannon_rate(bandwidth, g))
        .sum())
}

/// Received-power objective `sum_m |H_m|^2 p_m`.
pub fn objective_eq6(
    link: &LinkRealization,
    ris: &RisConfiguration,
    power: &PowerAllocation,
) -> Result<f64> {
    link.check_power(power)?;
    Ok(effective_channels(link, ris)?
        .iter()
        .zip(&power.powers)
        .map(|(h, p)| h.norm_sqr() * p)
        .sum())
}

/// Per-constraint violation magnitudes; zero everywhere means feasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    /// `max(0, gamma_min_m - gamma_m)` per subcarrier.
    pub qos: Vec<f64>,
    /// `max(0, sum p_m - p_t)`.
    pub budget: f64,
    /// `max(0, -p_m)` per subcarrier.
    pub negative_power: Vec<f64>,
    /// Distance of `alpha_k` outside `[0, 1]` per element.
    pub amplitude: Vec<f64>,
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        self.total() == 0.0
    }

    pub fn total(&self) -> f64 {
        self.qos.iter().sum::<f64>()
            + self.budget
            + self.negative_power.iter().sum::<f64>()
            + self.amplitude.iter().sum::<f64>()
    }
}

/// Evaluates QoS, power and reflection-amplitude constraints.
pub fn check_feasibility(
    link: &LinkRealization,
    ris: &RisConfiguration,
    power: &PowerAllocation,
    qos: &QosRequirement,
) -> Result<FeasibilityVerdict> {
    if qos.min_snr.len() != link.num_subcarriers {
        return Err(Error::ShapeMismatch(format!(
            "{} QoS targets for {} subcarriers",
            qos.min_snr.len(),
            link.num_subcarriers
        )));
    }
    let gammas = snrs(link, ris, power)?;
    Ok(FeasibilityVerdict {
        qos: qos
            .min_snr
            .iter()
            .zip(&gammas)
            .map(|(min, g)| (min - g).max(0.0))
            .collect(),
        budget: power.budget_excess(),
        negative_power: power.powers.iter().map(|p| (-p).max(0.0)).collect(),
        amplitude: ris
            .amplitudes
            .iter()
            .map(|a| (a - 1.0).max(0.0) + (-a).max(0.0))
            .collect(),
    })
}
