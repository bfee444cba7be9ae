//! Trial point generation around anchors: `anchor + size * direction`.

use rustc_hash::FxHashSet as HashSet;

use rand::Rng;
use rand_distr::StandardNormal;

use super::problem::Domain;
use crate::error::{Error, Result};

pub(crate) fn point_bits(v: f64) -> u64 {
    // +0.0 and -0.0 are the same point.
    (v + 0.0).to_bits()
}

fn point_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| point_bits(*v)).collect()
}

fn check_shapes(domain: &Domain, anchor: &[f64], directions: &[Vec<f64>]) -> Result<()> {
    let n = domain.dimension();
    if anchor.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "anchor has {} coordinates, domain has {n}",
            anchor.len()
        )));
    }
    if let Some(d) = directions.iter().find(|d| d.len() != n) {
        return Err(Error::ShapeMismatch(format!(
            "direction has {} coordinates, domain has {n}",
            d.len()
        )));
    }
    Ok(())
}

fn stencil(
    domain: &Domain,
    anchors: &[&[f64]],
    size: f64,
    directions: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "stencil size must be finite and > 0, got {size}"
        )));
    }
    let mut seen = HashSet::default();
    let mut out = Vec::new();
    for anchor in anchors {
        check_shapes(domain, anchor, directions)?;
        for d in directions {
            if let Some(p) = domain.displace(anchor, size, d) {
                if seen.insert(point_key(&p)) {
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

/// Mesh trial points `j + mesh_width * d` for every anchor `j` and direction
/// `d`, deduplicated in generation order.
pub fn generate_mesh_points(
    domain: &Domain,
    anchors: &[Vec<f64>],
    mesh_width: f64,
    directions: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    if anchors.is_empty() {
        return Err(Error::InvalidState("mesh needs at least one incumbent".into()));
    }
    let refs: Vec<&[f64]> = anchors.iter().map(Vec::as_slice).collect();
    stencil(domain, &refs, mesh_width, directions)
}

/// Poll trial points `x + poll_size * d` around a single incumbent.
pub fn generate_poll_points(
    domain: &Domain,
    incumbent: &[f64],
    poll_size: f64,
    directions: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    stencil(domain, &[incumbent], poll_size, directions)
}

/// `{+e_i, -e_i}` scaled per dimension by the domain's step scale.
pub fn coordinate_directions(domain: &Domain) -> Vec<Vec<f64>> {
    let n = domain.dimension();
    let mut dirs = Vec::with_capacity(2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[i] = sign * domain.scale(i);
            dirs.push(d);
        }
    }
    dirs
}

/// `e_i - e_j` for every ordered pair inside each group, scaled.
pub fn exchange_directions(domain: &Domain, groups: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let n = domain.dimension();
    let mut dirs = Vec::new();
    for group in groups {
        for &i in group {
            for &j in group {
                if i == j {
                    continue;
                }
                let mut d = vec![0.0; n];
                d[i] = domain.scale(i);
                d[j] = -domain.scale(j);
                dirs.push(d);
            }
        }
    }
    dirs
}

/// A uniformly random unit direction, scaled per dimension. Within each
/// exchange group of two or more coordinates the scaled components sum to
/// zero, so the direction moves along the group total instead of across it.
pub fn random_direction(domain: &Domain, groups: &[Vec<usize>], rng: &mut impl Rng) -> Vec<f64> {
    let n = domain.dimension();
    loop {
        let mut w: Vec<f64> = (0..n)
            .map(|i| rng.sample::<f64, _>(StandardNormal) * domain.scale(i))
            .collect();
        for group in groups.iter().filter(|g| g.len() > 1) {
            let mean = group.iter().map(|&i| w[i]).sum::<f64>() / group.len() as f64;
            for &i in group {
                w[i] -= mean;
            }
        }
        let norm = w
            .iter()
            .enumerate()
            .map(|(i, x)| (x / domain.scale(i)).powi(2))
            .sum::<f64>()
            .sqrt();
        if norm > 1e-12 {
            return w.iter().map(|x| x / norm).collect();
        }
    }
}
