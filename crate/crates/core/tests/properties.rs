use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use ris_satcom::baselines::{self, PhaseGrid, PowerCandidates};
use ris_satcom::mads::{optimize, BlackBoxProblem, MadsSettings, UpdateRule};
use ris_satcom::signal::{self, LinkRealization, PowerAllocation, QosRequirement, RisConfiguration};

#[derive(Debug, Clone)]
struct Link {
    m: usize,
    k: usize,
    g: Vec<Complex64>,
    h: Vec<f64>,
    f: Vec<f64>,
}

impl Link {
    fn build(&self) -> LinkRealization {
        LinkRealization::new(self.m, self.k, self.g.clone(), self.h.clone(), self.f.clone(), 1.0).unwrap()
    }
}

fn link(max_m: usize, max_k: usize) -> impl Strategy<Value = Link> {
    (1..=max_m, 1..=max_k).prop_flat_map(|(m, k)| {
        (
            prop::collection::vec((0.01..1.0f64, 0.0..TAU), m * k),
            prop::collection::vec(0.1..2.0f64, m * k),
            prop::collection::vec(-2.0..2.0f64, m),
        )
            .prop_map(move |(g, h, f)| Link {
                m,
                k,
                g: g.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect(),
                h,
                f,
            })
    })
}

fn phases(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..TAU, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn effective_channel_is_linear_in_each_coefficient(l in link(3, 5), seed in phases(5), amp in prop::collection::vec(0.0..0.5f64, 5), pick in 0usize..5) {
        let link = l.build();
        let k = pick % l.k;
        let ris = RisConfiguration::new(amp[..l.k].to_vec(), seed[..l.k].to_vec()).unwrap();
        let mut doubled = ris.clone();
        doubled.amplitudes[k] *= 2.0;
        for m in 0..l.m {
            let before = signal::effective_channel(&link, &ris, m).unwrap();
            let after = signal::effective_channel(&link, &doubled, m).unwrap();
            let term = link.sat_to_ris(m, k) * ris.coefficient(k) * link.ris_to_ground(m, k);
            prop_assert!((after - before - term).norm() <= 1e-12 * (1.0 + before.norm()));
        }
    }

    #[test]
    fn triangle_inequality_tight_when_aligned(l in link(1, 6), theta in phases(6)) {
        let link = l.build();
        let bound = link.direct(0).abs()
            + (0..l.k).map(|k| link.sat_to_ris(0, k).norm() * link.ris_to_ground(0, k)).sum::<f64>();
        let any = RisConfiguration::unit(theta[..l.k].to_vec()).unwrap();
        prop_assert!(signal::effective_channel(&link, &any, 0).unwrap().norm() <= bound * (1.0 + 1e-12));
        let aligned = baselines::aligned_phases_single_carrier(&link).unwrap();
        let best = signal::effective_channel(&link, &aligned, 0).unwrap().norm();
        prop_assert!((best - bound).abs() <= 1e-12 * bound);
    }

    #[test]
    fn capacity_increases_with_power(l in link(4, 3), theta in phases(3), p in prop::collection::vec(0.0..5.0f64, 4), pick in 0usize..4) {
        let link = l.build();
        let m = pick % l.m;
        let ris = RisConfiguration::unit(theta[..l.k].to_vec()).unwrap();
        let powers = p[..l.m].to_vec();
        let mut more = powers.clone();
        more[m] += 0.5;
        let lo = signal::capacity(&link, &ris, &PowerAllocation::new(powers, 100.0).unwrap(), 1e7).unwrap();
        let hi = signal::capacity(&link, &ris, &PowerAllocation::new(more, 100.0).unwrap(), 1e7).unwrap();
        if signal::effective_channel(&link, &ris, m).unwrap().norm() > 1e-6 {
            prop_assert!(hi > lo);
        }
    }

    #[test]
    fn capacity_invariant_under_subcarrier_permutation(l in link(4, 3), theta in phases(3), p in prop::collection::vec(0.0..5.0f64, 4), rotate in 0usize..4) {
        let link = l.build();
        let ris = RisConfiguration::unit(theta[..l.k].to_vec()).unwrap();
        let order: Vec<usize> = (0..l.m).map(|i| (i + rotate) % l.m).collect();
        let permuted = LinkRealization::new(
            l.m,
            l.k,
            order.iter().flat_map(|&m| l.g[m * l.k..(m + 1) * l.k].to_vec()).collect(),
            order.iter().flat_map(|&m| l.h[m * l.k..(m + 1) * l.k].to_vec()).collect(),
            order.iter().map(|&m| l.f[m]).collect(),
            1.0,
        )
        .unwrap();
        let power = PowerAllocation::new(p[..l.m].to_vec(), 100.0).unwrap();
        let permuted_power = PowerAllocation::new(order.iter().map(|&m| p[m]).collect(), 100.0).unwrap();
        let a = signal::capacity(&link, &ris, &power, 1.0).unwrap();
        let b = signal::capacity(&permuted, &ris, &permuted_power, 1.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn switched_off_surface_is_conventional_link(l in link(4, 4), p in prop::collection::vec(0.0..5.0f64, 4)) {
        let link = l.build();
        let power = PowerAllocation::new(p[..l.m].to_vec(), 100.0).unwrap();
        let off = signal::capacity(&link, &RisConfiguration::off(l.k), &power, 1e7).unwrap();
        prop_assert_eq!(off, baselines::no_ris_capacity(&link, &power, 1e7).unwrap());
    }

    #[test]
    fn aligned_surface_never_loses_to_direct_link(l in link(1, 6), p in 0.0..10.0f64) {
        let link = l.build();
        let power = PowerAllocation::new(vec![p], p).unwrap();
        let ris = baselines::aligned_phases_single_carrier(&link).unwrap();
        let with = signal::capacity(&link, &ris, &power, 1.0).unwrap();
        prop_assert!(with >= baselines::no_ris_capacity(&link, &power, 1.0).unwrap());
    }

    #[test]
    fn aligned_phases_beat_every_grid_point(l in link(1, 3), p in 0.1..10.0f64) {
        let link = l.build();
        let power = PowerAllocation::new(vec![p], p).unwrap();
        let ris = baselines::aligned_phases_single_carrier(&link).unwrap();
        let closed = signal::capacity(&link, &ris, &power, 1.0).unwrap();
        let grid = baselines::brute_force_best(
            &link,
            &PhaseGrid::new(12, l.k).unwrap(),
            &PowerCandidates::Fixed(vec![power]),
            &QosRequirement::none(1),
            1.0,
            baselines::DEFAULT_GRID_CAP,
        )
        .unwrap()
        .unwrap();
        prop_assert!(closed >= grid.value * (1.0 - 1e-12));
    }

    #[test]
    fn feasible_verdict_means_constraints_hold(l in link(3, 3), theta in phases(3), p in prop::collection::vec(0.0..2.5f64, 3), min_snr in 0.0..3.0f64) {
        let link = l.build();
        let ris = RisConfiguration::unit(theta[..l.k].to_vec()).unwrap();
        let power = PowerAllocation::new(p[..l.m].to_vec(), 8.0).unwrap();
        let qos = QosRequirement::uniform(l.m, min_snr);
        let verdict = signal::check_feasibility(&link, &ris, &power, &qos).unwrap();
        if verdict.is_feasible() {
            prop_assert!(power.total() <= 8.0 * (1.0 + 1e-12));
            for m in 0..l.m {
                prop_assert!(signal::snr(&link, &ris, &power, m).unwrap() >= min_snr);
            }
        }
    }

    #[test]
    fn water_filling_meets_kkt(gains in prop::collection::vec(1e-4..1e3f64, 1..16), noise in 1e-3..10.0f64, budget in 1e-2..1e3f64) {
        let w = baselines::water_filling(&gains, noise, budget).unwrap();
        let p = &w.allocation.powers;
        prop_assert!((p.iter().sum::<f64>() - budget).abs() <= 1e-9 * budget);
        for (g, pm) in gains.iter().zip(p) {
            prop_assert!(*pm >= 0.0);
            let floor = noise / g;
            if *pm > 0.0 {
                prop_assert!((w.water_level - floor - pm).abs() <= 1e-9 * w.water_level);
            } else {
                prop_assert!(floor >= w.water_level * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn brute_force_is_permutation_stable(l in link(2, 3), shift in 1usize..3) {
        let link = l.build();
        let order: Vec<usize> = (0..l.k).map(|k| (k + shift) % l.k).collect();
        let relabeled = LinkRealization::new(
            l.m,
            l.k,
            (0..l.m).flat_map(|m| order.iter().map(move |&k| (m, k))).map(|(m, k)| l.g[m * l.k + k]).collect(),
            (0..l.m).flat_map(|m| order.iter().map(move |&k| (m, k))).map(|(m, k)| l.h[m * l.k + k]).collect(),
            l.f.clone(),
            1.0,
        )
        .unwrap();
        let run = |lk: &LinkRealization| {
            baselines::brute_force_best(
                lk,
                &PhaseGrid::new(6, l.k).unwrap(),
                &PowerCandidates::WaterFilled { budget: 5.0 },
                &QosRequirement::none(l.m),
                1.0,
                baselines::DEFAULT_GRID_CAP,
            )
            .unwrap()
            .unwrap()
        };
        let (a, b) = (run(&link), run(&relabeled));
        prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value);
        let permuted: Vec<f64> = order.iter().map(|&k| a.ris.phases[k]).collect();
        prop_assert_eq!(permuted, b.ris.phases);
    }

    #[test]
    fn optimizer_dominates_grid_at_final_resolution(c in prop::collection::vec(0.0..1.0f64, 3), w in prop::collection::vec(0.5..2.0f64, 3), seed in 0u64..1000) {
        let (c2, w2) = (c.clone(), w.clone());
        let objective = move |x: &[f64]| -x.iter().zip(&c2).zip(&w2).map(|((xi, ci), wi)| wi * (xi - ci).powi(2)).sum::<f64>();
        let problem = BlackBoxProblem::new(vec![0.0; 3], vec![1.0; 3], objective.clone()).unwrap();
        // Only the canonical rule ends on a failed poll; the coarse-fine rule may stop
        // right after a successful one.
        let settings = MadsSettings { epsilon: 1e-2, seed, rule: UpdateRule::Canonical, ..MadsSettings::default() };
        let report = optimize(&problem, &[0.0; 3], &settings).unwrap();
        let best = report.best.unwrap();
        // Size of the last poll, the one that failed and ended the run.
        let spacing = report.history[report.history.len() - 2].poll_size;
        let axis = |x: f64| -> Vec<f64> {
            let below = (x / spacing).floor() as i64;
            let above = ((1.0 - x) / spacing).floor() as i64;
            (-below..=above).map(|j| x + j as f64 * spacing).collect()
        };
        let axes: Vec<Vec<f64>> = best.point.iter().map(|&x| axis(x)).collect();
        let mut grid_best = f64::NEG_INFINITY;
        for &a in &axes[0] {
            for &b in &axes[1] {
                for &d in &axes[2] {
                    grid_best = grid_best.max(objective(&[a, b, d]));
                }
            }
        }
        prop_assert!(best.value >= grid_best, "optimizer {} vs grid {grid_best} at spacing {spacing}", best.value);
    }
}
