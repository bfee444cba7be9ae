//! Oracle-equivalence suites run by `ris-satcom oracle --check ...`.
//!
//! Each suite draws seeded random links with gains of order one (so SNRs are
//! far from the linear regime of the satellite link budget) and compares the
//! optimizer or the water-filling routine against an exact reference.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, PhaseGrid, PowerCandidates};
use crate::error::Result;
use crate::harness::{satcom_problem, Metric, START_POWER_FRACTION};
use crate::mads::{self, MadsSettings};
use crate::signal::{self, LinkRealization, PowerAllocation, QosRequirement, RisConfiguration};

pub const ALIGNMENT_CASES: usize = 100;
pub const ALIGNMENT_RTOL: f64 = 1e-3;
pub const BRUTE_FORCE_CASES: usize = 20;
pub const BRUTE_FORCE_LEVELS: usize = 16;
pub const BRUTE_FORCE_RTOL: f64 = 0.01;
pub const WATER_FILLING_CASES: usize = 1000;
pub const WATER_FILLING_TOL: f64 = 1e-9;
pub const CHECK_EVALUATIONS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCheck {
    /// MADS against closed-form phase alignment on single-subcarrier links.
    Alignment,
    /// KKT conditions of water-filling on random gain vectors.
    Waterfilling,
    /// MADS against an exhaustive phase grid with water-filled power.
    Bruteforce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: OracleCheck,
    pub cases: usize,
    /// Largest observed error measure; what it measures depends on the check.
    pub worst: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random link: direct gains in `[0.5, 1.5]`, satellite-to-element gains
/// with magnitude in `[0.05, 0.3]` and uniform phase, element-to-ground
/// gains in `[0.5, 1.5]`, unit noise.
pub fn random_link(rng: &mut impl Rng, num_subcarriers: usize, num_elements: usize) -> Result<LinkRealization> {
    let cells = num_subcarriers * num_elements;
    let g = (0..cells)
        .map(|_| Complex64::from_polar(rng.gen_range(0.05..0.3), rng.gen_range(0.0..TAU)))
        .collect();
    let h = (0..cells).map(|_| rng.gen_range(0.5..1.5)).collect();
    let f = (0..num_subcarriers).map(|_| rng.gen_range(0.5..1.5)).collect();
    LinkRealization::new(num_subcarriers, num_elements, g, h, f, 1.0)
}

/// Joint MADS solve of `link` with the default optimizer settings at
/// `CHECK_EVALUATIONS`; returns the capacity of the best point.
pub fn mads_capacity(link: &LinkRealization, budget: f64, bandwidth: f64, seed: u64) -> Result<Option<f64>> {
    let m_count = link.num_subcarriers();
    let qos = QosRequirement::none(m_count);
    let problem = satcom_problem(link, budget, 1.0, &qos, bandwidth, Metric::ShannonCapacity)?;
    let start: Vec<f64> = std::iter::repeat_n(budget / m_count as f64 * START_POWER_FRACTION, m_count)
        .chain(std::iter::repeat_n(0.0, link.num_elements()))
        .collect();
    let settings = MadsSettings {
        max_evaluations: CHECK_EVALUATIONS,
        seed,
        ..MadsSettings::default()
    };
    let report = mads::optimize(&problem, &start, &settings)?;
    let Some(best) = report.best else { return Ok(None) };
    let power = PowerAllocation::new(best.point[..m_count].to_vec(), budget)?;
    let ris = RisConfiguration::unit(best.point[m_count..].to_vec())?;
    Ok(Some(signal::capacity(link, &ris, &power, bandwidth)?))
}

pub fn run_check(check: OracleCheck, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match check {
        OracleCheck::Alignment => alignment(&mut rng),
        OracleCheck::Waterfilling => water_filling(&mut rng),
        OracleCheck::Bruteforce => brute_force(&mut rng),
    }
}

fn alignment(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for case in 0..ALIGNMENT_CASES {
        let k = 1 + case % 8;
        let link = random_link(rng, 1, k)?;
        let budget = rng.gen_range(1.0..10.0);
        let ris = baselines::aligned_phases_single_carrier(&link)?;
        let exact = signal::capacity(&link, &ris, &PowerAllocation::new(vec![budget], budget)?, 1.0)?;
        let got = mads_capacity(&link, budget, 1.0, case as u64)?;
        let gap = got.map_or(f64::INFINITY, |c| (exact - c) / exact);
        worst = worst.max(gap);
        if !(gap <= ALIGNMENT_RTOL) {
            failures.push(format!("case {case} (K={k}): optimizer {got:?}, closed form {exact}"));
        }
    }
    Ok(CheckReport {
        check: OracleCheck::Alignment,
        cases: ALIGNMENT_CASES,
        worst,
        tolerance: ALIGNMENT_RTOL,
        failures,
    })
}

/// Budget residual `|sum p - p_t| / p_t` and complementary-slackness
/// residual `max_m |max(0, mu - sigma^2/g_m) - p_m| / mu` of one fill.
pub fn water_filling_residuals(gains: &[f64], noise: f64, budget: f64) -> Result<(f64, f64)> {
    let w = baselines::water_filling(gains, noise, budget)?;
    let p = &w.allocation.powers;
    let mu = w.water_level;
    let budget_residual = (p.iter().sum::<f64>() - budget).abs() / budget;
    let slackness = gains
        .iter()
        .zip(p)
        .map(|(&g, &pm)| {
            let target = if g > 0.0 { (mu - noise / g).max(0.0) } else { 0.0 };
            (target - pm).abs() / mu
        })
        .fold(0.0, f64::max);
    Ok((budget_residual, slackness))
}

fn water_filling(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for case in 0..WATER_FILLING_CASES {
        let m = rng.gen_range(1..=16);
        // Log-uniform gains over six decades exercise both full and sparse
        // active sets.
        let gains: Vec<f64> = (0..m).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
        let noise = 10f64.powf(rng.gen_range(-2.0..1.0));
        let budget = 10f64.powf(rng.gen_range(-1.0..2.0));
        let (b, s) = water_filling_residuals(&gains, noise, budget)?;
        worst = worst.max(b).max(s);
        if !(b <= WATER_FILLING_TOL && s <= WATER_FILLING_TOL) {
            failures.push(format!("case {case} (M={m}): budget residual {b:e}, slackness {s:e}"));
        }
    }
    Ok(CheckReport {
        check: OracleCheck::Waterfilling,
        cases: WATER_FILLING_CASES,
        worst,
        tolerance: WATER_FILLING_TOL,
        failures,
    })
}

fn brute_force(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let grid = PhaseGrid::new(BRUTE_FORCE_LEVELS, 2)?;
    for case in 0..BRUTE_FORCE_CASES {
        let link = random_link(rng, 2, 2)?;
        let budget = rng.gen_range(1.0..10.0);
        let qos = QosRequirement::none(2);
        let optimum = baselines::brute_force_best(
            &link,
            &grid,
            &PowerCandidates::WaterFilled { budget },
            &qos,
            1.0,
            baselines::DEFAULT_GRID_CAP,
        )?
        .expect("no QoS constraint, every grid point is feasible");
        let got = mads_capacity(&link, budget, 1.0, case as u64)?;
        let shortfall = got.map_or(f64::INFINITY, |c| (optimum.value - c) / optimum.value);
        worst = worst.max(shortfall);
        if !(shortfall <= BRUTE_FORCE_RTOL) {
            failures.push(format!("case {case}: optimizer {got:?}, grid optimum {}", optimum.value));
        }
    }
    Ok(CheckReport {
        check: OracleCheck::Bruteforce,
        cases: BRUTE_FORCE_CASES,
        worst,
        tolerance: BRUTE_FORCE_RTOL,
        failures,
    })
}
