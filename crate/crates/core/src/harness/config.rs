use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{AntennaGains, RisPanel, ScenarioGeometry, GEO_ALTITUDE_M};
use crate::error::{Error, Result};
use crate::mads::{MadsSettings, UpdateRule};
use crate::signal::QosRequirement;

/// What the optimizer maximizes. Reported results are always Shannon
/// capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    #[default]
    ShannonCapacity,
    /// Received power `sum |H_m|^2 p_m`.
    Eq6Objective,
}

/// Source of per-realization randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Randomization {
    /// Uniform satellite antenna phase and per-element cascade phases.
    #[default]
    PhaseOnly,
    None,
}

/// How each realization is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    #[default]
    Mads,
    /// Phases aligned on the first subcarrier, water-filled power.
    Aligned,
}

/// Flat experiment configuration. Every key is optional in the config file;
/// missing keys fall back to the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d1_m: f64,
    /// Defaults to `d1_m` when absent.
    pub d2_m: Option<f64>,
    pub d3_m: f64,
    pub psi_deg: f64,
    pub carrier_freq_hz: f64,
    pub subcarrier_bandwidth_hz: f64,
    pub num_subcarriers: usize,
    pub phi_rad: f64,
    pub sat_beam_gain_dbi: f64,
    pub ground_gain_db: f64,
    pub num_elements: usize,
    pub ris_width_m: f64,
    pub ris_length_m: f64,
    pub reflection_amplitude: f64,
    pub budget_w: f64,
    pub noise_variance: f64,
    /// Minimum linear SNR on every subcarrier.
    pub min_snr: f64,
    pub epsilon: f64,
    pub max_evaluations: usize,
    pub initial_mesh_width: f64,
    pub initial_poll_size: f64,
    pub expand_factor: f64,
    pub contract_factor: f64,
    pub mesh_cap: f64,
    pub update_rule: UpdateRule,
    pub random_direction: bool,
    pub metric: Metric,
    pub randomization: Randomization,
    pub solver: Solver,
    pub monte_carlo_runs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mads = MadsSettings::default();
        Self {
            d1_m: GEO_ALTITUDE_M,
            d2_m: None,
            d3_m: 500.0,
            psi_deg: 60.0,
            carrier_freq_hz: 1.5e9,
            subcarrier_bandwidth_hz: 10e6,
            num_subcarriers: 8,
            phi_rad: 0.0,
            sat_beam_gain_dbi: 51.8,
            ground_gain_db: -13.5,
            num_elements: 10,
            ris_width_m: 1.0,
            ris_length_m: 1.0,
            reflection_amplitude: 1.0,
            budget_w: 140.0,
            noise_variance: 0.01,
            min_snr: 0.0,
            epsilon: mads.epsilon,
            max_evaluations: 5_000,
            initial_mesh_width: mads.initial_mesh_width,
            initial_poll_size: mads.initial_poll_size,
            expand_factor: mads.expand_factor,
            contract_factor: mads.contract_factor,
            mesh_cap: mads.mesh_cap,
            update_rule: mads.rule,
            random_direction: mads.random_direction,
            metric: Metric::default(),
            randomization: Randomization::default(),
            solver: Solver::default(),
            monte_carlo_runs: 1000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn geometry(&self) -> ScenarioGeometry {
        ScenarioGeometry {
            d1: self.d1_m,
            d2: self.d2_m.unwrap_or(self.d1_m),
            d3: self.d3_m,
            psi: self.psi_deg.to_radians(),
            carrier_freq: self.carrier_freq_hz,
            subcarrier_bandwidth: self.subcarrier_bandwidth_hz,
            num_subcarriers: self.num_subcarriers,
            phi: self.phi_rad,
        }
    }

    pub fn gains(&self) -> Result<AntennaGains> {
        AntennaGains::from_db(self.sat_beam_gain_dbi, self.ground_gain_db)
    }

    pub fn panel(&self) -> RisPanel {
        RisPanel {
            num_elements: self.num_elements,
            width: self.ris_width_m,
            length: self.ris_length_m,
        }
    }

    pub fn qos(&self) -> QosRequirement {
        QosRequirement::uniform(self.num_subcarriers, self.min_snr)
    }

    pub fn mads_settings(&self, seed: u64) -> MadsSettings {
        MadsSettings {
            epsilon: self.epsilon,
            max_evaluations: self.max_evaluations,
            initial_mesh_width: self.initial_mesh_width,
            initial_poll_size: self.initial_poll_size,
            expand_factor: self.expand_factor,
            contract_factor: self.contract_factor,
            mesh_cap: self.mesh_cap,
            random_direction: self.random_direction,
            seed,
            rule: self.update_rule,
            ..MadsSettings::default()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..=90.0).contains(&self.psi_deg) {
            out.push(format!("psi_deg must lie in [0, 90], got {}", self.psi_deg));
        }
        let mut geom = self.geometry();
        // psi is reported above in the config's own units
        geom.psi = geom.psi.clamp(0.0, std::f64::consts::FRAC_PI_2);
        out.extend(geom.violations());
        for (key, v) in [
            ("sat_beam_gain_dbi", self.sat_beam_gain_dbi),
            ("ground_gain_db", self.ground_gain_db),
        ] {
            if !v.is_finite() {
                out.push(format!("{key} must be finite, got {v}"));
            }
        }
        out.extend(self.panel().violations());
        if !(0.0..=1.0).contains(&self.reflection_amplitude) {
            out.push(format!(
                "reflection_amplitude must lie in [0, 1], got {}",
                self.reflection_amplitude
            ));
        }
        if !(self.budget_w.is_finite() && self.budget_w >= 0.0) {
            out.push(format!("budget_w must be finite and >= 0, got {}", self.budget_w));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance > 0.0) {
            out.push(format!("noise_variance must be > 0, got {}", self.noise_variance));
        }
        if !(self.min_snr.is_finite() && self.min_snr >= 0.0) {
            out.push(format!("min_snr must be finite and >= 0, got {}", self.min_snr));
        }
        if self.monte_carlo_runs == 0 {
            out.push("monte_carlo_runs must be >= 1".into());
        }
        out.extend(self.mads_settings(0).violations());
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

/// Reads and validates a TOML config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    ExperimentConfig::from_toml_str(&text)
}
