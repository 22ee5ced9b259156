use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::market::{DisplayPlan, MarketInstance};

use super::matroid::Element;

/// A set function over element indices.
pub trait SetFunction: Sync {
    fn value(&self, set: &[usize]) -> f64;

    /// f(S + e) − f(S).
    fn gain(&self, set: &[usize], e: usize) -> f64 {
        let mut bigger = set.to_vec();
        bigger.push(e);
        self.value(&bigger) - self.value(set)
    }
}

impl<F: Fn(&[usize]) -> f64 + Sync> SetFunction for F {
    fn value(&self, set: &[usize]) -> f64 {
        self(set)
    }
}

/// How the final-period expectation is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum M2Mode {
    /// Exact, using the per-user Poisson-binomial recursion.
    Exact,
    /// Sample average over `samples` like patterns drawn once from `seed`
    /// and shared by every evaluated set.
    MonteCarlo { samples: usize, seed: u64 },
}

/// E[sum of the `k` largest values present] when item `n` with value `a`
/// is present independently with probability `p`.
///
/// Items are ranked by value (ties by position); an item counts exactly
/// when it is present and fewer than `k` higher-ranked items are.
pub fn expected_top_k(items: &[(f64, f64)], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].0.total_cmp(&items[a].0));
    let mut below = vec![0.0; k];
    below[0] = 1.0;
    let mut total = 0.0;
    for idx in order {
        let (a, p) = items[idx];
        let room: f64 = below.iter().sum();
        total += a * p * room;
        for c in (0..k).rev() {
            let stay = below[c] * (1.0 - p);
            let arrive = if c > 0 { below[c - 1] * p } else { 0.0 };
            below[c] = stay + arrive;
        }
    }
    total
}

/// Expected matches of a first-period display set: same-period mutual
/// matches plus the best final-period backlog matches.
///
/// Members of the initial backlog are assumed to stay available for the
/// final period.
pub struct MatchValueOracle<'a> {
    instance: &'a MarketInstance,
    ground: &'a [Element],
    mode: M2Mode,
    draws: Vec<Vec<f64>>,
}

impl<'a> MatchValueOracle<'a> {
    pub fn new(instance: &'a MarketInstance, ground: &'a [Element], mode: M2Mode) -> Self {
        let draws = match mode {
            M2Mode::Exact => Vec::new(),
            M2Mode::MonteCarlo { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..samples).map(|_| ground.iter().map(|_| rng.gen::<f64>()).collect()).collect()
            }
        };
        MatchValueOracle { instance, ground, mode, draws }
    }

    fn second_period(&self) -> usize {
        self.instance.horizon().min(2)
    }

    /// Ground indices of arcs pointing at `u` in `set`.
    fn incoming(&self, set: &[usize], u: usize) -> Vec<usize> {
        set.iter()
            .copied()
            .filter(|&k| matches!(self.ground[k], Element::Arc { profile, .. } if profile == u))
            .collect()
    }

    /// Expected final-period value of user `u` when the arcs `arcs` point at them.
    fn user_value(&self, u: usize, arcs: &[usize]) -> f64 {
        let inst = self.instance;
        let t2 = self.second_period();
        let viewer = |k: usize| match self.ground[k] {
            Element::Arc { viewer, .. } => viewer,
            Element::Pair { .. } => unreachable!("only arcs feed a backlog"),
        };
        match self.mode {
            M2Mode::Exact => {
                let mut items: Vec<(f64, f64)> =
                    inst.initial_backlog(u).iter().map(|v| (inst.phi(t2, u, v), 1.0)).collect();
                items.extend(arcs.iter().map(|&k| {
                    let v = viewer(k);
                    (inst.phi(t2, u, v), inst.phi(1, v, u))
                }));
                expected_top_k(&items, inst.capacity(u))
            }
            M2Mode::MonteCarlo { .. } => {
                let base: Vec<f64> = inst.initial_backlog(u).iter().map(|v| inst.phi(t2, u, v)).collect();
                let mut total = 0.0;
                for draw in &self.draws {
                    let mut present = base.clone();
                    for &k in arcs {
                        let v = viewer(k);
                        if draw[k] < inst.phi(1, v, u) {
                            present.push(inst.phi(t2, u, v));
                        }
                    }
                    present.sort_by(|a, b| b.total_cmp(a));
                    total += present.iter().take(inst.capacity(u)).sum::<f64>();
                }
                total / self.draws.len().max(1) as f64
            }
        }
    }

    /// The display plan a set stands for.
    pub fn plan_of(&self, set: &[usize]) -> DisplayPlan {
        let mut plan = DisplayPlan::new();
        for &k in set {
            match self.ground[k] {
                Element::Arc { viewer, profile } => {
                    plan.x.insert((viewer, profile));
                }
                Element::Pair { i, j } => {
                    plan.w.insert((i, j));
                }
            }
        }
        plan
    }
}

impl SetFunction for MatchValueOracle<'_> {
    fn value(&self, set: &[usize]) -> f64 {
        let mutual: f64 = set
            .iter()
            .filter_map(|&k| match self.ground[k] {
                Element::Pair { i, j } => Some(self.instance.beta(1, i, j)),
                Element::Arc { .. } => None,
            })
            .sum();
        let later: f64 = self.instance.users().map(|u| self.user_value(u, &self.incoming(set, u))).sum();
        mutual + later
    }

    fn gain(&self, set: &[usize], e: usize) -> f64 {
        if set.contains(&e) {
            return 0.0;
        }
        match self.ground[e] {
            Element::Pair { i, j } => self.instance.beta(1, i, j),
            Element::Arc { profile, .. } => {
                let mut arcs = self.incoming(set, profile);
                let before = self.user_value(profile, &arcs);
                arcs.push(e);
                self.user_value(profile, &arcs) - before
            }
        }
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of the multilinear extension of `f` at `z`: each
/// element joins the random set independently with probability `z[e]`.
pub fn multilinear_estimate<R: Rng + ?Sized>(f: &dyn SetFunction, z: &[f64], samples: usize, rng: &mut R) -> Estimate {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut set = Vec::with_capacity(z.len());
    for _ in 0..samples {
        set.clear();
        for (e, &p) in z.iter().enumerate() {
            if rng.gen::<f64>() < p {
                set.push(e);
            }
        }
        let v = f.value(&set);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples.max(1) as f64;
    let mean = sum / n;
    let var = if samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Estimate { mean, std_error: (var / n).sqrt() }
}
