use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Metric, Solver};
use super::realization::draw_realization;
use crate::baselines;
use crate::error::{Error, Result};
use crate::mads::{self, BlackBoxProblem, TerminationReason};
use crate::signal::{
    self, LinkRealization, PowerAllocation, QosRequirement, RisConfiguration, BUDGET_RTOL,
};

/// Fraction of the budget spread evenly at the optimizer's starting point.
pub const START_POWER_FRACTION: f64 = 0.999;

/// Joint power/phase problem over `x = [p_1..p_M, theta_1..theta_K]`.
/// Powers live in `[0, p_t]`, phases are periodic on `[0, 2pi)`. The power
/// sum and per-subcarrier SNR floors are barrier constraints.
pub fn satcom_problem<'a>(
    link: &'a LinkRealization,
    budget: f64,
    amplitude: f64,
    qos: &'a QosRequirement,
    bandwidth: f64,
    metric: Metric,
) -> Result<BlackBoxProblem<'a>> {
    let (m_count, k_count) = (link.num_subcarriers(), link.num_elements());
    if qos.min_snr.len() != m_count {
        return Err(Error::ShapeMismatch(format!(
            "{} QoS targets for {m_count} subcarriers",
            qos.min_snr.len()
        )));
    }
    let lower = vec![0.0; m_count + k_count];
    let upper: Vec<f64> = std::iter::repeat_n(budget, m_count)
        .chain(std::iter::repeat_n(TAU, k_count))
        .collect();
    let channel_gains = move |x: &[f64]| -> Vec<f64> {
        signal::channel_power_gains(link, amplitude, &x[m_count..]).expect("shapes fixed at construction")
    };
    let noise = link.noise_variance();
    let objective = move |x: &[f64]| -> f64 {
        let gains = channel_gains(x);
        let powers = &x[..m_count];
        match metric {
            Metric::ShannonCapacity => gains
                .iter()
                .zip(powers)
                .map(|(g, p)| signal::shannon_rate(bandwidth, g * p / noise))
                .sum(),
            Metric::Eq6Objective => gains.iter().zip(powers).map(|(g, p)| g * p).sum(),
        }
    };
    let mut problem = BlackBoxProblem::new(lower, upper, objective)?
        .with_periodic(&(m_count..m_count + k_count).collect::<Vec<_>>())?
        .with_exchange_group((0..m_count).collect())?
        .with_constraint(move |x: &[f64]| {
            let excess = x[..m_count].iter().sum::<f64>() - budget;
            if excess > BUDGET_RTOL * budget {
                excess
            } else {
                0.0
            }
        });
    if qos.min_snr.iter().any(|&g| g > 0.0) {
        problem = problem.with_constraint(move |x: &[f64]| {
            channel_gains(x)
                .iter()
                .zip(&x[..m_count])
                .zip(&qos.min_snr)
                .map(|((g, p), min)| (min - g * p / noise).max(0.0))
                .sum()
        });
    }
    Ok(problem)
}

/// Splits a decision vector into power allocation and surface configuration.
pub fn decode_point(
    x: &[f64],
    num_subcarriers: usize,
    budget: f64,
    amplitude: f64,
) -> Result<(PowerAllocation, RisConfiguration)> {
    let power = PowerAllocation {
        powers: x[..num_subcarriers].to_vec(),
        budget,
    };
    let ris = RisConfiguration::uniform(amplitude, x[num_subcarriers..].to_vec())?;
    Ok((power, ris))
}

/// Outcome of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_index: u64,
    /// Shannon capacity of the solution (bits/s); `None` when infeasible.
    pub capacity: Option<f64>,
    /// No-RIS capacity with water-filled power (bits/s).
    pub baseline_capacity: f64,
    /// Capacity at the equal-power, zero-phase starting point (bits/s).
    pub start_capacity: f64,
    pub evaluations: usize,
    pub termination: Option<TerminationReason>,
    pub powers: Vec<f64>,
    pub phases: Vec<f64>,
}

impl RunOutcome {
    pub fn is_feasible(&self) -> bool {
        self.capacity.is_some()
    }
}

fn mix_seed(seed: u64, run_index: u64) -> u64 {
    seed ^ run_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Draws one realization and solves it with the configured solver.
pub fn run_single(config: &ExperimentConfig, seed: u64, run_index: u64) -> Result<RunOutcome> {
    config.validate()?;
    let link = draw_realization(config, seed, run_index)?;
    solve_link(config, &link, mix_seed(seed, run_index), run_index)
}

/// Solves a given realization with the configured solver.
pub fn solve_link(
    config: &ExperimentConfig,
    link: &LinkRealization,
    optimizer_seed: u64,
    run_index: u64,
) -> Result<RunOutcome> {
    let (m_count, k_count) = (link.num_subcarriers(), link.num_elements());
    let bandwidth = config.subcarrier_bandwidth_hz;
    let budget = config.budget_w;
    let amplitude = config.reflection_amplitude;
    let qos = config.qos();
    let baseline_capacity = baselines::no_ris_water_filled_capacity(link, budget, bandwidth)?;

    let start: Vec<f64> = std::iter::repeat_n(budget / m_count as f64 * START_POWER_FRACTION, m_count)
        .chain(std::iter::repeat_n(0.0, k_count))
        .collect();
    let (p0, r0) = decode_point(&start, m_count, budget, amplitude)?;
    let start_capacity = signal::capacity(link, &r0, &p0, bandwidth)?;

    let infeasible = |evaluations, termination| RunOutcome {
        run_index,
        capacity: None,
        baseline_capacity,
        start_capacity,
        evaluations,
        termination,
        powers: Vec::new(),
        phases: Vec::new(),
    };

    match config.solver {
        Solver::Mads => {
            let problem = satcom_problem(link, budget, amplitude, &qos, bandwidth, config.metric)?;
            let report = mads::optimize(&problem, &start, &config.mads_settings(optimizer_seed))?;
            let Some(best) = report.best else {
                return Ok(infeasible(report.evaluations, Some(report.termination_reason)));
            };
            let (power, ris) = decode_point(&best.point, m_count, budget, amplitude)?;
            Ok(RunOutcome {
                run_index,
                capacity: Some(signal::capacity(link, &ris, &power, bandwidth)?),
                baseline_capacity,
                start_capacity,
                evaluations: report.evaluations,
                termination: Some(report.termination_reason),
                powers: power.powers,
                phases: ris.phases,
            })
        }
        Solver::Aligned => {
            let mut ris = baselines::aligned_phases(link, 0)?;
            ris.amplitudes = vec![amplitude; k_count];
            let gains: Vec<f64> = signal::effective_channels(link, &ris)?
                .iter()
                .map(|h| h.norm_sqr())
                .collect();
            let power = match baselines::water_filling(&gains, link.noise_variance(), budget) {
                Ok(w) => w.allocation,
                Err(Error::DegenerateInput(_)) => baselines::equal_power(budget, m_count)?,
                Err(e) => return Err(e),
            };
            if !signal::check_feasibility(link, &ris, &power, &qos)?.is_feasible() {
                return Ok(infeasible(0, None));
            }
            Ok(RunOutcome {
                run_index,
                capacity: Some(signal::capacity(link, &ris, &power, bandwidth)?),
                baseline_capacity,
                start_capacity,
                evaluations: 0,
                termination: None,
                powers: power.powers,
                phases: ris.phases,
            })
        }
    }
}

/// Aggregated Monte Carlo result for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    /// Swept parameter, `"none"` for a single run.
    pub axis_name: String,
    pub axis_value: f64,
    pub config: ExperimentConfig,
    pub seed: u64,
    /// Per-run capacity (bits/s), `None` where the run was infeasible.
    pub capacities: Vec<Option<f64>>,
    pub baseline_capacities: Vec<f64>,
    /// Mean over feasible runs; `None` if every run was infeasible.
    pub mean_capacity_bps: Option<f64>,
    /// Population standard deviation over feasible runs.
    pub std_capacity_bps: Option<f64>,
    pub baseline_capacity_bps: f64,
    pub runs: usize,
    pub infeasible_runs: usize,
    pub evaluations_mean: f64,
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    // Rounding can push the mean a hair outside the sample range.
    let mean = (values.iter().sum::<f64>() / n).clamp(lo, hi);
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Runs `monte_carlo_runs` independent realizations and aggregates them in
/// run order.
pub fn run_monte_carlo(config: &ExperimentConfig, seed: u64) -> Result<ResultRecord> {
    config.validate()?;
    let outcomes: Vec<RunOutcome> = (0..config.monte_carlo_runs as u64)
        .into_par_iter()
        .map(|run| run_single(config, seed, run))
        .collect::<Result<_>>()?;
    let capacities: Vec<Option<f64>> = outcomes.iter().map(|o| o.capacity).collect();
    let feasible: Vec<f64> = capacities.iter().flatten().copied().collect();
    let baseline_capacities: Vec<f64> = outcomes.iter().map(|o| o.baseline_capacity).collect();
    let runs = outcomes.len();
    let stats = mean_std(&feasible);
    Ok(ResultRecord {
        axis_name: "none".into(),
        axis_value: 0.0,
        config: config.clone(),
        seed,
        mean_capacity_bps: stats.map(|s| s.0),
        std_capacity_bps: stats.map(|s| s.1),
        baseline_capacity_bps: mean_std(&baseline_capacities).map_or(0.0, |s| s.0),
        infeasible_runs: runs - feasible.len(),
        evaluations_mean: outcomes.iter().map(|o| o.evaluations as f64).sum::<f64>() / runs as f64,
        runs,
        capacities,
        baseline_capacities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Subcarriers,
    Elements,
    Power,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Subcarriers => "num_subcarriers",
            SweepAxis::Elements => "num_elements",
            SweepAxis::Power => "budget_w",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    #[default]
    RisVsConventional,
    ElementCounts,
    PowerLevels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub comparison: Comparison,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Result<Self> {
        let spec = Self {
            axis,
            values,
            comparison: Comparison::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.values.is_empty() {
            errs.push("sweep needs at least one value".to_string());
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            errs.push("sweep values must be strictly increasing".to_string());
        }
        if matches!(self.axis, SweepAxis::Subcarriers | SweepAxis::Elements)
            && self.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0)
        {
            errs.push(format!("{} values must be non-negative integers", self.axis.name()));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Config with the swept parameter set to `value`.
    pub fn apply(&self, config: &ExperimentConfig, value: f64) -> ExperimentConfig {
        let mut c = config.clone();
        match self.axis {
            SweepAxis::Subcarriers => c.num_subcarriers = value as usize,
            SweepAxis::Elements => c.num_elements = value as usize,
            SweepAxis::Power => c.budget_w = value,
        }
        c
    }
}

/// One record per sweep value. Every point reuses `seed`, so run `i` sees
/// the same random phases everywhere along the sweep.
pub fn run_sweep(config: &ExperimentConfig, sweep: &SweepSpec, seed: u64) -> Result<Vec<ResultRecord>> {
    sweep.validate()?;
    sweep
        .values
        .iter()
        .map(|&v| {
            let mut rec = run_monte_carlo(&sweep.apply(config, v), seed)?;
            rec.axis_name = sweep.axis.name().into();
            rec.axis_value = v;
            Ok(rec)
        })
        .collect()
}
