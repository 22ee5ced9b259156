//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use matchplan::market::{DisplayPlan, InstanceBuilder, MarketInstance, MarketState, PlatformDesign};
use matchplan::{Episode, Policy, Result};
use rand::{Rng, RngCore};

/// Random two-period market with at most three users per side.
///
/// Like probabilities are drawn per directed pair (a quarter of them pinned
/// to 0 or 1), and about one instance in three has period-2 probabilities
/// that differ from period 1.
pub fn random_small_instance<R: Rng>(rng: &mut R, horizon: usize, max_side: usize, max_k: usize) -> MarketInstance {
    let n_i = rng.gen_range(1..=max_side);
    let n_j = rng.gen_range(1..=max_side);
    let is: Vec<String> = (1..=n_i).map(|k| format!("i{k}")).collect();
    let js: Vec<String> = (1..=n_j).map(|k| format!("j{k}")).collect();
    let mut b = InstanceBuilder::new(&is, &js, horizon, 1);
    for u in is.iter().chain(&js) {
        b = b.capacity(u, rng.gen_range(1..=max_k));
    }
    let inhomogeneous = horizon == 2 && rng.gen_bool(1.0 / 3.0);
    let draw = |rng: &mut R| -> f64 {
        match rng.gen_range(0..8) {
            0 => 0.0,
            1 => 1.0,
            _ => (rng.gen::<f64>() * 100.0).round() / 100.0,
        }
    };
    for i in &is {
        for j in &js {
            if rng.gen_bool(0.2) {
                continue;
            }
            let (p, q) = (draw(rng), draw(rng));
            if inhomogeneous {
                let (p2, q2) = (draw(rng), draw(rng));
                b = b.like_at(1, i, j, p).like_at(1, j, i, q).like_at(2, i, j, p2).like_at(2, j, i, q2);
            } else {
                b = b.pair(i, j, p, q);
            }
        }
    }
    b.build().expect("generated instance validates")
}

/// Shows each `(i_k, j_k)` pair to each other in period 1 and nothing after.
pub struct Diagonal {
    pub design: PlatformDesign,
    pub n: usize,
}

impl Policy for Diagonal {
    fn name(&self) -> String {
        "diagonal".into()
    }
    fn design(&self) -> PlatformDesign {
        self.design
    }
    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(DiagonalEpisode(self.n))
    }
}

struct DiagonalEpisode(usize);

impl Episode for DiagonalEpisode {
    fn plan(&mut self, state: &MarketState, _rng: &mut dyn RngCore) -> Result<DisplayPlan> {
        let mut plan = DisplayPlan::new();
        if state.period == 1 {
            plan.w.extend((0..self.0).map(|k| (k, self.0 + k)));
        }
        Ok(plan)
    }
    fn fork(&self) -> Box<dyn Episode + '_> {
        Box::new(DiagonalEpisode(self.0))
    }
}

/// The sequential-only schedule for the 2n × 2 market: in period 1 the
/// first half of side I sees j1, the second half sees j2, j1 sees the last
/// I user and j2 the first; in period 2 the halves swap and each J user sees
/// the lowest-indexed member of their backlog. Displays of users who are no
/// longer potentials are skipped.
pub struct CrossSchedule {
    pub design: PlatformDesign,
    pub n: usize,
}

impl Policy for CrossSchedule {
    fn name(&self) -> String {
        "cross-schedule".into()
    }
    fn design(&self) -> PlatformDesign {
        self.design
    }
    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(CrossEpisode(self.n))
    }
}

struct CrossEpisode(usize);

impl Episode for CrossEpisode {
    fn plan(&mut self, state: &MarketState, _rng: &mut dyn RngCore) -> Result<DisplayPlan> {
        let n = self.0;
        let (j1, j2) = (2 * n, 2 * n + 1);
        let mut plan = DisplayPlan::new();
        let (first, second) = if state.period == 1 { (j1, j2) } else { (j2, j1) };
        for i in 0..2 * n {
            let j = if i < n { first } else { second };
            if state.potentials[i].contains(j) {
                plan.x.insert((i, j));
            }
        }
        if state.period == 1 {
            plan.x.insert((j1, 2 * n - 1));
            plan.x.insert((j2, 0));
        } else {
            for j in [j1, j2] {
                if let Some(i) = state.backlog[j].iter().next() {
                    plan.x.insert((j, i));
                }
            }
        }
        Ok(plan)
    }
    fn fork(&self) -> Box<dyn Episode + '_> {
        Box::new(CrossEpisode(self.0))
    }
}
