use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Randomization};
use crate::error::Result;
use crate::signal::LinkRealization;

/// Generator for run `run_index` under `seed`: one ChaCha stream per run.
pub fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Satellite antenna phase and `num_elements` cascade phases, all uniform
/// on `[0, 2pi)`.
pub fn draw_phases(seed: u64, run_index: u64, num_elements: usize) -> (f64, Vec<f64>) {
    let mut rng = run_rng(seed, run_index);
    let phi = rng.gen_range(0.0..TAU);
    let elements = (0..num_elements).map(|_| rng.gen_range(0.0..TAU)).collect();
    (phi, elements)
}

/// Channel realization for one Monte Carlo run.
///
/// Magnitudes always come from the link budget. Under phase-only
/// randomization the satellite antenna phase is drawn first, then one phase
/// per element in element order, so configurations that differ only in the
/// number of subcarriers or elements share their common draws. Element
/// phases are shared by all subcarriers.
pub fn draw_realization(
    config: &ExperimentConfig,
    seed: u64,
    run_index: u64,
) -> Result<LinkRealization> {
    let mut geom = config.geometry();
    let gains = config.gains()?;
    let panel = config.panel();
    match config.randomization {
        Randomization::None => {
            LinkRealization::from_channel_model(&geom, &gains, &panel, config.noise_variance)
        }
        Randomization::PhaseOnly => {
            let (phi, element_phases) = draw_phases(seed, run_index, panel.num_elements);
            geom.phi = phi;
            let mut link =
                LinkRealization::from_channel_model(&geom, &gains, &panel, config.noise_variance)?;
            link.rotate_elements(&element_phases)?;
            Ok(link)
        }
    }
}
