//! Benchmark policies: per-user greedy and per-period perfect matching.

use crate::error::{Error, Result};
use crate::market::{plan_violations, DisplayPlan, MarketInstance, MarketState, PlatformDesign, Side};
use crate::policy::{Episode, Memoryless, MemorylessEpisode, Policy};
use crate::second_stage::solve_bmatching;

/// Viewer kept when both users of a fresh pair want each other but the
/// period forbids mutual displays.
fn sequential_viewer(design: &PlatformDesign, instance: &MarketInstance, i: usize, j: usize, t: usize) -> usize {
    match design.initiating_side() {
        Some(Side::I) => i,
        Some(Side::J) => j,
        None if instance.phi(t, j, i) < instance.phi(t, i, j) => j,
        None => i,
    }
}

fn checked(policy: &str, plan: DisplayPlan, state: &MarketState, design: &PlatformDesign, instance: &MarketInstance) -> Result<DisplayPlan> {
    let violations = plan_violations(&plan, state, design, instance);
    if violations.is_empty() {
        Ok(plan)
    } else {
        Err(Error::InfeasiblePlan { policy: policy.into(), period: state.period, violations })
    }
}

/// Each user independently takes the profiles with the best immediate match
/// chance.
///
/// A backlog member scores φ (they already like the viewer); a fresh profile
/// scores φ in both directions multiplied. Users on the responding side of a
/// one-directional design only consider their backlog. When two users pick
/// each other, the pick becomes a mutual display if the period allows one;
/// otherwise only the side I pick survives.
#[derive(Debug, Clone)]
pub struct LocalGreedy {
    instance: MarketInstance,
    design: PlatformDesign,
}

pub fn local_greedy_policy(instance: &MarketInstance, design: PlatformDesign) -> LocalGreedy {
    LocalGreedy { instance: instance.clone(), design }
}

impl LocalGreedy {
    fn picks(&self, state: &MarketState) -> Vec<Vec<usize>> {
        let inst = &self.instance;
        let t = state.period;
        inst.users()
            .map(|u| {
                let fresh_ok = self.design.may_initiate(inst.side(u));
                let mut scored: Vec<(usize, f64)> = state.potentials[u]
                    .iter()
                    .filter_map(|v| {
                        let score = if state.backlog[u].contains(v) {
                            inst.phi(t, u, v)
                        } else if fresh_ok {
                            inst.beta(t, u, v)
                        } else {
                            return None;
                        };
                        (score > 0.0).then_some((v, score))
                    })
                    .collect();
                scored.sort_by(|a, b| b.1.total_cmp(&a.1));
                scored.truncate(inst.capacity(u));
                scored.into_iter().map(|(v, _)| v).collect()
            })
            .collect()
    }
}

impl Memoryless for LocalGreedy {
    fn plan_state(&self, state: &MarketState) -> Result<DisplayPlan> {
        let inst = &self.instance;
        let picks = self.picks(state);
        let mutual_ok = self.design.allows_mutual(state.period, inst.horizon());
        let mut plan = DisplayPlan::new();
        for u in inst.users() {
            for &v in &picks[u] {
                if state.backlog[u].contains(v) || !picks[v].contains(&u) {
                    plan.x.insert((u, v));
                } else if mutual_ok {
                    plan.w.insert(if inst.side(u) == Side::I { (u, v) } else { (v, u) });
                } else if inst.side(u) == Side::I {
                    plan.x.insert((u, v));
                }
            }
        }
        checked("local-greedy", plan, state, &self.design, inst)
    }
}

impl Policy for LocalGreedy {
    fn name(&self) -> String {
        "local-greedy".into()
    }

    fn design(&self) -> PlatformDesign {
        self.design
    }

    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(MemorylessEpisode(self))
    }
}

/// Per-period b-matching: backlog displays weighted by φ and fresh pairs
/// weighted by β share each user's capacity.
///
/// A chosen fresh pair is shown mutually when the period allows it. If not,
/// one user sees the other: the initiating side under one-directional
/// designs, otherwise the user less likely to like, so that the likelier
/// liker decides later from the backlog (side I on ties).
#[derive(Debug, Clone)]
pub struct PerfectMatching {
    instance: MarketInstance,
    design: PlatformDesign,
}

pub fn perfect_matching_policy(instance: &MarketInstance, design: PlatformDesign) -> PerfectMatching {
    PerfectMatching { instance: instance.clone(), design }
}

impl Memoryless for PerfectMatching {
    fn plan_state(&self, state: &MarketState) -> Result<DisplayPlan> {
        let inst = &self.instance;
        let (matched, _) = solve_bmatching(state, true, inst, false)?;
        let mut plan = DisplayPlan { x: matched.x, w: Default::default() };
        if self.design.allows_mutual(state.period, inst.horizon()) {
            plan.w = matched.w;
        } else {
            for (i, j) in matched.w {
                let viewer = sequential_viewer(&self.design, inst, i, j, state.period);
                plan.x.insert((viewer, if viewer == i { j } else { i }));
            }
        }
        checked("perfect-matching", plan, state, &self.design, inst)
    }
}

impl Policy for PerfectMatching {
    fn name(&self) -> String {
        "perfect-matching".into()
    }

    fn design(&self) -> PlatformDesign {
        self.design
    }

    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(MemorylessEpisode(self))
    }
}
