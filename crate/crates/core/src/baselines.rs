//! Reference solutions: equal-power and water-filling allocations, the
//! closed-form phase alignment for a single subcarrier, exhaustive grid
//! search, and the conventional no-RIS capacity.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{self, LinkRealization, PowerAllocation, QosRequirement, RisConfiguration};

/// Default cap on brute-force evaluations.
pub const DEFAULT_GRID_CAP: f64 = 1e7;

pub fn equal_power(budget: f64, num_subcarriers: usize) -> Result<PowerAllocation> {
    if num_subcarriers == 0 {
        return Err(Error::InvalidArgument("need at least one subcarrier".into()));
    }
    PowerAllocation::new(vec![budget / num_subcarriers as f64; num_subcarriers], budget)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFilling {
    pub allocation: PowerAllocation,
    /// Water level `mu`: active subcarriers get `mu - sigma^2 / |H_m|^2`.
    pub water_level: f64,
}

/// Capacity-maximizing allocation of `budget` over channels with power gains
/// `channel_gains` (`|H_m|^2`) and noise `noise`.
///
/// Breakpoints are scanned in order of increasing inverse gain, so the result
/// is exact up to rounding. Powers are formed from differences of inverse
/// gains, which keeps the budget residual small even when `sigma^2/|H|^2`
/// dwarfs the budget.
pub fn water_filling(channel_gains: &[f64], noise: f64, budget: f64) -> Result<WaterFilling> {
    if channel_gains.is_empty() {
        return Err(Error::InvalidArgument("no channels to fill".into()));
    }
    if let Some(g) = channel_gains.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::InvalidArgument(format!("channel gain {g} must be finite and >= 0")));
    }
    if !(noise.is_finite() && noise > 0.0) {
        return Err(Error::InvalidArgument(format!("noise must be > 0, got {noise}")));
    }
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::InvalidArgument(format!("budget must be >= 0, got {budget}")));
    }
    let mut order: Vec<usize> = (0..channel_gains.len()).filter(|&m| channel_gains[m] > 0.0).collect();
    if order.is_empty() {
        return Err(Error::DegenerateInput("all channel gains are zero".into()));
    }
    let floor = |m: usize| noise / channel_gains[m];
    order.sort_by(|&a, &b| floor(a).total_cmp(&floor(b)).then(a.cmp(&b)));

    // Largest active set whose water level still clears the last floor.
    let mut active = 0;
    for k in 1..=order.len() {
        let last = floor(order[k - 1]);
        let headroom: f64 = budget + order[..k - 1].iter().map(|&i| floor(i) - last).sum::<f64>();
        if headroom > 0.0 {
            active = k;
        } else {
            break;
        }
    }

    let mut powers = vec![0.0; channel_gains.len()];
    let water_level = if active == 0 {
        floor(order[0])
    } else {
        let set = &order[..active];
        for &m in set {
            let nm = floor(m);
            let p = (budget + set.iter().map(|&i| floor(i) - nm).sum::<f64>()) / active as f64;
            powers[m] = p.max(0.0);
        }
        (budget + set.iter().map(|&i| floor(i)).sum::<f64>()) / active as f64
    };
    Ok(WaterFilling {
        allocation: PowerAllocation { powers, budget },
        water_level,
    })
}

/// Phases that co-phase every reflected term of subcarrier `m` with its
/// direct link: `theta_k = arg f_m - arg g_mk - arg h_mk`, unit amplitude.
pub fn aligned_phases(link: &LinkRealization, m: usize) -> Result<RisConfiguration> {
    if m >= link.num_subcarriers() {
        return Err(Error::IndexOutOfRange {
            index: m,
            lo: 0,
            hi: link.num_subcarriers() - 1,
        });
    }
    let reference = phase_of(link.direct(m));
    let phases = (0..link.num_elements())
        .map(|k| reference - link.sat_to_ris(m, k).arg() - phase_of(link.ris_to_ground(m, k)))
        .collect();
    RisConfiguration::unit(phases)
}

fn phase_of(x: f64) -> f64 {
    if x < 0.0 {
        std::f64::consts::PI
    } else {
        0.0
    }
}

/// Closed-form maximizer of `|H_1|` for a single-subcarrier link.
pub fn aligned_phases_single_carrier(link: &LinkRealization) -> Result<RisConfiguration> {
    if link.num_subcarriers() != 1 {
        return Err(Error::InvalidArgument(format!(
            "closed-form alignment needs exactly one subcarrier, link has {}",
            link.num_subcarriers()
        )));
    }
    aligned_phases(link, 0)
}

/// Phases quantized to multiples of `2 pi / levels` on each of `dimensions`
/// elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub levels: usize,
    pub dimensions: usize,
}

impl PhaseGrid {
    pub fn new(levels: usize, dimensions: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidArgument(format!("phase grid needs >= 2 levels, got {levels}")));
        }
        Ok(Self { levels, dimensions })
    }

    pub fn size(&self) -> f64 {
        (self.levels as f64).powi(self.dimensions as i32)
    }

    pub fn phase(&self, level: usize) -> f64 {
        level as f64 * TAU / self.levels as f64
    }
}

/// Power allocations tried by the brute-force search.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerCandidates {
    Fixed(Vec<PowerAllocation>),
    /// Water-fill the budget for each phase configuration.
    WaterFilled { budget: f64 },
}

impl PowerCandidates {
    fn count(&self) -> usize {
        match self {
            PowerCandidates::Fixed(c) => c.len(),
            PowerCandidates::WaterFilled { .. } => 1,
        }
    }

    /// Quarter-step simplex grid for up to three subcarriers, water-filling
    /// beyond that.
    pub fn default_for(budget: f64, num_subcarriers: usize) -> Result<Self> {
        if num_subcarriers > 3 {
            return Ok(PowerCandidates::WaterFilled { budget });
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; num_subcarriers];
        loop {
            if idx.iter().sum::<usize>() <= 4 {
                let powers = idx.iter().map(|&q| q as f64 * budget / 4.0).collect();
                out.push(PowerAllocation::new(powers, budget)?);
            }
            if !advance(&mut idx, 5) {
                break;
            }
        }
        Ok(PowerCandidates::Fixed(out))
    }
}

/// Odometer increment, last digit fastest. Returns false after wrapping.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceOptimum {
    pub ris: RisConfiguration,
    pub power: PowerAllocation,
    /// Sum capacity (bits/s).
    pub value: f64,
}

/// Exhaustive capacity maximization over a phase grid and power candidates
/// at unit amplitude. Infeasible points are skipped; ties go to the
/// lexicographically smallest `(powers, phases)` point. Returns `None` when
/// nothing is feasible.
pub fn brute_force_best(
    link: &LinkRealization,
    grid: &PhaseGrid,
    power_candidates: &PowerCandidates,
    qos: &QosRequirement,
    bandwidth: f64,
    cap: f64,
) -> Result<Option<BruteForceOptimum>> {
    if grid.dimensions != link.num_elements() {
        return Err(Error::ShapeMismatch(format!(
            "grid has {} dimensions, link has {} elements",
            grid.dimensions,
            link.num_elements()
        )));
    }
    let required = grid.size() * power_candidates.count() as f64;
    if required > cap {
        return Err(Error::BudgetExceeded { required, cap });
    }

    let mut best: Option<(Vec<f64>, BruteForceOptimum)> = None;
    let mut levels = vec![0usize; grid.dimensions];
    loop {
        let phases: Vec<f64> = levels.iter().map(|&l| grid.phase(l)).collect();
        let ris = RisConfiguration::unit(phases)?;
        let powers: Vec<PowerAllocation> = match power_candidates {
            PowerCandidates::Fixed(c) => c.clone(),
            PowerCandidates::WaterFilled { budget } => {
                let gains: Vec<f64> = signal::effective_channels(link, &ris)?
                    .iter()
                    .map(|h| h.norm_sqr())
                    .collect();
                let alloc = match water_filling(&gains, link.noise_variance(), *budget) {
                    Ok(w) => w.allocation,
                    Err(Error::DegenerateInput(_)) => equal_power(*budget, link.num_subcarriers())?,
                    Err(e) => return Err(e),
                };
                vec![alloc]
            }
        };
        for power in powers {
            if !signal::check_feasibility(link, &ris, &power, qos)?.is_feasible() {
                continue;
            }
            let value = signal::capacity(link, &ris, &power, bandwidth)?;
            let key: Vec<f64> = power.powers.iter().chain(&ris.phases).copied().collect();
            let better = match &best {
                None => true,
                Some((bk, b)) => value > b.value || (value == b.value && key < *bk),
            };
            if better {
                best = Some((
                    key,
                    BruteForceOptimum {
                        ris: ris.clone(),
                        power,
                        value,
                    },
                ));
            }
        }
        if !advance(&mut levels, grid.levels) {
            break;
        }
    }
    Ok(best.map(|(_, b)| b))
}

/// Capacity of the direct link alone (`alpha = 0`).
pub fn no_ris_capacity(link: &LinkRealization, power: &PowerAllocation, bandwidth: f64) -> Result<f64> {
    signal::capacity(link, &RisConfiguration::off(link.num_elements()), power, bandwidth)
}

/// No-RIS capacity with the budget water-filled over the direct gains.
pub fn no_ris_water_filled_capacity(link: &LinkRealization, budget: f64, bandwidth: f64) -> Result<f64> {
    let gains: Vec<f64> = (0..link.num_subcarriers()).map(|m| link.direct(m).powi(2)).collect();
    match water_filling(&gains, link.noise_variance(), budget) {
        Ok(w) => no_ris_capacity(link, &w.allocation, bandwidth),
        Err(Error::DegenerateInput(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Aligned phases on subcarrier 0 with water-filled power. Exact for a
/// single subcarrier; for realizations whose element phases are shared
/// across subcarriers the alignment holds on every subcarrier.
pub fn aligned_capacity(link: &LinkRealization, budget: f64, bandwidth: f64) -> Result<f64> {
    let ris = aligned_phases(link, 0)?;
    let gains: Vec<f64> = signal::effective_channels(link, &ris)?
        .iter()
        .map(|h| h.norm_sqr())
        .collect();
    match water_filling(&gains, link.noise_variance(), budget) {
        Ok(w) => signal::capacity(link, &ris, &w.allocation, bandwidth),
        Err(Error::DegenerateInput(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn equal_split() {
        assert_eq!(equal_power(100.0, 4).unwrap().powers, vec![25.0; 4]);
        assert_eq!(equal_power(0.0, 3).unwrap().powers, vec![0.0; 3]);
        assert_eq!(equal_power(100.0, 4).unwrap().total(), 100.0);
    }

    #[test]
    fn water_filling_examples() {
        let w = water_filling(&[3.0, 3.0], 1.0, 2.0).unwrap();
        assert_eq!(w.allocation.powers, vec![1.0, 1.0]);
        let w = water_filling(&[1.0, 0.0], 1.0, 5.0).unwrap();
        assert_eq!(w.allocation.powers, vec![5.0, 0.0]);
        let w = water_filling(&[1.0, 4.0], 1.0, 1.0).unwrap();
        assert_relative_eq!(w.water_level, 1.125, max_relative = 1e-15);
        assert_relative_eq!(w.allocation.powers[0], 0.125, max_relative = 1e-14);
        assert_relative_eq!(w.allocation.powers[1], 0.875, max_relative = 1e-14);
    }

    #[test]
    fn water_filling_matches_grid_search() {
        // log2(1 + p) + log2(1 + 4(1 - p)) over p in [0, 1]
        let f = |p: f64| (1.0 + p).log2() + (1.0 + 4.0 * (1.0 - p)).log2();
        let n = 1_000_000;
        let best = (0..=n).map(|i| i as f64 / n as f64).max_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        assert!((best - 0.125).abs() < 2e-6);
    }

    #[test]
    fn water_filling_errors() {
        assert!(matches!(water_filling(&[0.0, 0.0], 1.0, 1.0), Err(Error::DegenerateInput(_))));
        assert!(water_filling(&[-1.0], 1.0, 1.0).is_err());
        let w = water_filling(&[1.0, 2.0], 1.0, 0.0).unwrap();
        assert_eq!(w.allocation.powers, vec![0.0, 0.0]);
    }

    #[test]
    fn water_filling_tiny_gains_keep_budget() {
        let gains = [1.33e-15, 1.30e-15, 1.27e-15];
        let w = water_filling(&gains, 0.01, 140.0).unwrap();
        assert!((w.allocation.total() - 140.0).abs() <= 1e-9 * 140.0);
        assert_eq!(w.allocation.powers[0], 140.0);
    }

    fn single(phi: f64, gmag: &[f64], h: &[f64], f: f64) -> LinkRealization {
        let g = gmag.iter().map(|a| Complex64::from_polar(*a, -phi)).collect();
        LinkRealization::new(1, gmag.len(), g, h.to_vec(), vec![f], 1.0).unwrap()
    }

    #[test]
    fn alignment_cancels_satellite_phase() {
        let link = single(0.8, &[0.2, 0.5, 0.1], &[1.0, 0.3, 2.0], 1.5);
        let ris = aligned_phases_single_carrier(&link).unwrap();
        for t in &ris.phases {
            assert_relative_eq!(*t, 0.8, epsilon = 1e-15);
        }
        let h = signal::effective_channel(&link, &ris, 0).unwrap();
        assert_relative_eq!(h.norm(), 1.5 + 0.2 + 0.15 + 0.2, max_relative = 1e-14);
    }

    #[test]
    fn alignment_perturbation_decreases_gain() {
        let link = single(2.1, &[0.4, 0.7], &[0.9, 0.6], 0.8);
        let ris = aligned_phases_single_carrier(&link).unwrap();
        let peak = signal::effective_channel(&link, &ris, 0).unwrap().norm();
        for i in 1..=2000 {
            let delta = -PI + i as f64 * TAU / 2001.0;
            let mut p = ris.phases.clone();
            p[1] += delta;
            let v = signal::effective_channel(&link, &RisConfiguration::unit(p).unwrap(), 0)
                .unwrap()
                .norm();
            assert!(v < peak, "delta {delta}: {v} >= {peak}");
        }
    }

    #[test]
    fn alignment_requires_single_carrier() {
        let link = LinkRealization::new(2, 0, vec![], vec![], vec![1.0, 1.0], 1.0).unwrap();
        assert!(matches!(aligned_phases_single_carrier(&link), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn brute_force_four_levels() {
        // g = exp(-i pi/2) so the aligned phase is pi/2, which is on the grid.
        let link = single(FRAC_PI_2, &[1.0], &[1.0], 1.0);
        let power = PowerCandidates::Fixed(vec![PowerAllocation::new(vec![1.0], 1.0).unwrap()]);
        let grid = PhaseGrid::new(4, 1).unwrap();
        let best = brute_force_best(&link, &grid, &power, &QosRequirement::none(1), 1.0, DEFAULT_GRID_CAP)
            .unwrap()
            .unwrap();
        assert_eq!(best.ris.phases, vec![FRAC_PI_2]);
        // |H| = 2, SNR = 4, rate log2(5)
        assert_relative_eq!(best.value, 5f64.log2(), max_relative = 1e-14);

        // aligned phase 0.9 rounds to the nearest grid point pi/2
        let link = single(0.9, &[1.0], &[1.0], 1.0);
        let best = brute_force_best(&link, &grid, &power, &QosRequirement::none(1), 1.0, DEFAULT_GRID_CAP)
            .unwrap()
            .unwrap();
        assert_eq!(best.ris.phases, vec![FRAC_PI_2]);
    }

    #[test]
    fn brute_force_agrees_with_closed_form_on_grid() {
        let link = single(PI / 4.0, &[0.3, 0.6], &[1.0, 0.5], 0.9);
        let power = PowerAllocation::new(vec![2.0], 2.0).unwrap();
        let closed = signal::capacity(&link, &aligned_phases_single_carrier(&link).unwrap(), &power, 1.0).unwrap();
        let best = brute_force_best(
            &link,
            &PhaseGrid::new(8, 2).unwrap(),
            &PowerCandidates::Fixed(vec![power]),
            &QosRequirement::none(1),
            1.0,
            DEFAULT_GRID_CAP,
        )
        .unwrap()
        .unwrap();
        assert_relative_eq!(best.value, closed, max_relative = 1e-14);
    }

    #[test]
    fn brute_force_infeasible_and_cap() {
        let link = single(0.0, &[1.0], &[1.0], 1.0);
        let power = PowerCandidates::default_for(1.0, 1).unwrap();
        let qos = QosRequirement::uniform(1, 1e9);
        let grid = PhaseGrid::new(4, 1).unwrap();
        assert!(brute_force_best(&link, &grid, &power, &qos, 1.0, DEFAULT_GRID_CAP).unwrap().is_none());
        assert!(matches!(
            brute_force_best(&link, &grid, &power, &QosRequirement::none(1), 1.0, 10.0),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn simplex_candidates() {
        let PowerCandidates::Fixed(c) = PowerCandidates::default_for(4.0, 2).unwrap() else {
            panic!("expected fixed candidates");
        };
        // pairs (a, b) of quarters with a + b <= 4
        assert_eq!(c.len(), 15);
        assert!(c.iter().all(|p| p.total() <= 4.0));
        assert!(matches!(
            PowerCandidates::default_for(4.0, 4).unwrap(),
            PowerCandidates::WaterFilled { .. }
        ));
    }

    #[test]
    fn no_ris_matches_switched_off_surface() {
        let link = single(0.3, &[0.5, 0.5], &[1.0, 1.0], 0.7);
        let power = PowerAllocation::new(vec![3.0], 3.0).unwrap();
        let a = no_ris_capacity(&link, &power, 1e7).unwrap();
        let b = signal::capacity(&link, &RisConfiguration::off(2), &power, 1e7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let dead = single(0.3, &[0.5], &[1.0], 0.0);
        assert_eq!(no_ris_capacity(&dead, &PowerAllocation::new(vec![1.0], 1.0).unwrap(), 1e7).unwrap(), 0.0);
    }
}
