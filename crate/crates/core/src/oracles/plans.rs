use crate::market::{DisplayPlan, MarketInstance, MarketState, PlatformDesign, Side};

use super::ExpectedMatches;

#[derive(Clone, Copy)]
enum Item {
    Pair { i: usize, j: usize, from_i: bool, from_j: bool, mutual: bool },
    Backlog { u: usize, v: usize },
}

/// Every feasible plan for `state` under `design`, visited depth-first.
///
/// Fresh pairs are decided first (none, i sees j, j sees i, mutual), then
/// each backlog arc (show or not), with capacity checked along the way.
pub(crate) struct PlanEnumerator<'a> {
    instance: &'a MarketInstance,
    items: Vec<Item>,
}

impl<'a> PlanEnumerator<'a> {
    pub fn new(state: &MarketState, design: &PlatformDesign, instance: &'a MarketInstance) -> Self {
        let mutual = design.allows_mutual(state.period, instance.horizon());
        let from_i = design.may_initiate(Side::I);
        let from_j = design.may_initiate(Side::J);
        let mut items = Vec::new();
        for i in instance.users_of(Side::I) {
            for j in state.potentials[i].iter() {
                if state.is_fresh_pair(i, j) {
                    items.push(Item::Pair { i, j, from_i, from_j, mutual });
                }
            }
        }
        for u in instance.users() {
            for v in state.backlog[u].iter() {
                items.push(Item::Backlog { u, v });
            }
        }
        PlanEnumerator { instance, items }
    }

    /// Product of per-item option counts, ignoring capacity.
    pub fn bound(&self) -> u64 {
        self.items.iter().fold(1u64, |acc, item| {
            let options = match *item {
                Item::Pair { from_i, from_j, mutual, .. } => 1 + from_i as u64 + from_j as u64 + mutual as u64,
                Item::Backlog { .. } => 2,
            };
            acc.saturating_mul(options)
        })
    }

    pub fn for_each<E>(&self, mut visit: impl FnMut(&DisplayPlan) -> Result<(), E>) -> Result<(), E> {
        let mut plan = DisplayPlan::new();
        let mut load = vec![0usize; self.instance.n_users()];
        self.descend(0, &mut plan, &mut load, &mut visit)
    }

    fn descend<E>(
        &self,
        k: usize,
        plan: &mut DisplayPlan,
        load: &mut [usize],
        visit: &mut impl FnMut(&DisplayPlan) -> Result<(), E>,
    ) -> Result<(), E> {
        let Some(&item) = self.items.get(k) else { return visit(plan) };
        self.descend(k + 1, plan, load, visit)?;
        let cap = |u: usize| self.instance.capacity(u);
        match item {
            Item::Pair { i, j, from_i, from_j, mutual } => {
                for (viewer, profile, ok) in [(i, j, from_i), (j, i, from_j)] {
                    if ok && load[viewer] < cap(viewer) {
                        load[viewer] += 1;
                        plan.x.insert((viewer, profile));
                        self.descend(k + 1, plan, load, visit)?;
                        plan.x.remove(&(viewer, profile));
                        load[viewer] -= 1;
                    }
                }
                if mutual && load[i] < cap(i) && load[j] < cap(j) {
                    load[i] += 1;
                    load[j] += 1;
                    plan.w.insert((i, j));
                    self.descend(k + 1, plan, load, visit)?;
                    plan.w.remove(&(i, j));
                    load[i] -= 1;
                    load[j] -= 1;
                }
            }
            Item::Backlog { u, v } => {
                if load[u] < cap(u) {
                    load[u] += 1;
                    plan.x.insert((u, v));
                    self.descend(k + 1, plan, load, visit)?;
                    plan.x.remove(&(u, v));
                    load[u] -= 1;
                }
            }
        }
        Ok(())
    }
}

/// Expected matches completed by the plan's own displays this period.
pub(crate) fn immediate_value(plan: &DisplayPlan, state: &MarketState, instance: &MarketInstance) -> ExpectedMatches {
    let t = state.period;
    let sequential =
        plan.x.iter().filter(|&&(u, v)| state.backlog[u].contains(v)).map(|&(u, v)| instance.phi(t, u, v)).sum();
    let non_sequential = plan.w.iter().map(|&(i, j)| instance.beta(t, i, j)).sum();
    ExpectedMatches::new(sequential, non_sequential)
}

/// Displays of fresh profiles, whose like decisions change the next state.
pub(crate) fn fresh_displays(plan: &DisplayPlan, state: &MarketState) -> Vec<(usize, usize)> {
    plan.x.iter().copied().filter(|&(u, v)| !state.backlog[u].contains(v)).collect()
}

/// Calls `visit(probability, outcomes)` for every like pattern of the fresh
/// displays with positive probability. Backlog and mutual displays are
/// recorded as dislikes: their decisions do not affect the next state.
pub(crate) fn for_each_outcome<E>(
    plan: &DisplayPlan,
    state: &MarketState,
    instance: &MarketInstance,
    mut visit: impl FnMut(f64, &crate::market::LikeOutcomes) -> Result<(), E>,
) -> Result<(), E> {
    let fresh = fresh_displays(plan, state);
    let mut outcomes: crate::market::LikeOutcomes = plan.displays().map(|d| (d, false)).collect();
    let probs: Vec<f64> = fresh.iter().map(|&(u, v)| instance.phi(state.period, u, v)).collect();
    for mask in 0u64..(1u64 << fresh.len()) {
        let mut prob = 1.0;
        for (b, (&d, &p)) in fresh.iter().zip(&probs).enumerate() {
            let liked = mask >> b & 1 == 1;
            prob *= if liked { p } else { 1.0 - p };
            outcomes.insert(d, liked);
        }
        if prob > 0.0 {
            visit(prob, &outcomes)?;
        }
    }
    Ok(())
}
