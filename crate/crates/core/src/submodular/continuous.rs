use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{MarketInstance, PlatformDesign, Timing};
use crate::par::{map_indices, Execution};

use super::matroid::{build_feasible_region, Element};
use super::oracle::expected_top_k;

/// Tunables of [`continuous_greedy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousGreedyOptions {
    pub steps: usize,
    /// Samples per gradient estimate.
    pub samples: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for ContinuousGreedyOptions {
    fn default() -> Self {
        ContinuousGreedyOptions { steps: 100, samples: 128, seed: 0, execution: Execution::Parallel }
    }
}

/// A point of the like-probability polytope, one coordinate per initiating arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalPoint {
    /// `(viewer, profile)` of each coordinate.
    pub arcs: Vec<(usize, usize)>,
    /// Probability that the viewer ends up liking the profile, z ≤ φ¹.
    pub z: Vec<f64>,
    /// Display fraction z/φ¹ (zero where φ¹ is zero).
    pub display: Vec<f64>,
}

/// Continuous greedy over {0 ≤ z ≤ φ¹, Σ_j z_ij/φ¹_ij ≤ K_i} for a
/// one-directional sequential design.
///
/// The search runs in display space y = z/φ¹. Each step estimates, for every
/// arc, the expected gain in final-period value from its like, weights it by
/// φ¹ and moves each initiating user 1/steps towards their K best arcs.
/// Selections are counted as integers, so the budget and box constraints
/// hold exactly at the end.
pub fn continuous_greedy(
    instance: &MarketInstance,
    design: &PlatformDesign,
    options: &ContinuousGreedyOptions,
) -> Result<FractionalPoint> {
    if !design.is_one_directional() || design.timing != Timing::SequentialOnly {
        return Err(Error::IncompatibleAlgorithmDesign { algorithm: "continuous_greedy".into(), design: design.to_string() });
    }
    let region = build_feasible_region(instance, design);
    let arcs: Vec<(usize, usize)> = region
        .ground
        .iter()
        .map(|e| match *e {
            Element::Arc { viewer, profile } => (viewer, profile),
            Element::Pair { .. } => unreachable!("sequential regions hold arcs only"),
        })
        .collect();
    let phi1: Vec<f64> = arcs.iter().map(|&(u, v)| instance.phi(1, u, v)).collect();
    let t2 = instance.horizon().min(2);
    let steps = options.steps.max(1);
    let mut counts = vec![0usize; arcs.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    for _ in 0..steps {
        let z: Vec<f64> = counts.iter().zip(&phi1).map(|(&c, &p)| p * c as f64 / steps as f64).collect();
        let draws: Vec<Vec<f64>> =
            (0..options.samples.max(1)).map(|_| arcs.iter().map(|_| rng.gen::<f64>()).collect()).collect();
        let weights = map_indices(arcs.len(), options.execution, |e| {
            let (viewer, profile) = arcs[e];
            let value_with = |draw: &[f64], include: bool| {
                let mut items: Vec<(f64, f64)> =
                    instance.initial_backlog(profile).iter().map(|v| (instance.phi(t2, profile, v), 1.0)).collect();
                for (k, &(v, u)) in arcs.iter().enumerate() {
                    if u == profile && k != e && draw[k] < z[k] {
                        items.push((instance.phi(t2, u, v), 1.0));
                    }
                }
                if include {
                    items.push((instance.phi(t2, profile, viewer), 1.0));
                }
                expected_top_k(&items, instance.capacity(profile))
            };
            let gain: f64 = draws.iter().map(|d| value_with(d, true) - value_with(d, false)).sum::<f64>()
                / draws.len() as f64;
            gain * phi1[e]
        });
        for viewer in instance.users() {
            let mut mine: Vec<usize> =
                (0..arcs.len()).filter(|&e| arcs[e].0 == viewer && weights[e] > 0.0 && counts[e] < steps).collect();
            mine.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
            for e in mine.into_iter().take(instance.capacity(viewer)) {
                counts[e] += 1;
            }
        }
    }
    let display: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
    let z = display.iter().zip(&phi1).map(|(y, p)| y * p).collect();
    Ok(FractionalPoint { arcs, z, display })
}
