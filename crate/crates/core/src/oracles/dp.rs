use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::market::{transition, Direction, DisplayPlan, MarketInstance, MarketState, PlatformDesign, Timing, UserSet};
use crate::second_stage::{f_total, f_user, solve_bmatching};

use super::plans::{for_each_outcome, fresh_displays, immediate_value, PlanEnumerator};

/// Work limit for [`dp_optimal_with`].
#[derive(Debug, Clone, Copy)]
pub struct DpOptions {
    /// Maximum number of (plan, outcome) evaluations.
    pub state_cap: u64,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { state_cap: 10_000_000 }
    }
}

/// Optimal expected matches over all adaptive policies.
pub fn dp_optimal(instance: &MarketInstance, design: &PlatformDesign) -> Result<f64> {
    dp_optimal_with(instance, design, &DpOptions::default())
}

pub fn dp_optimal_with(instance: &MarketInstance, design: &PlatformDesign, options: &DpOptions) -> Result<f64> {
    let mut dp = Dp {
        instance,
        design: *design,
        memo: HashMap::new(),
        user_memo: HashMap::new(),
        work: 0,
        cap: options.state_cap,
        estimate: 0,
    };
    let state = instance.initial_state();
    dp.estimate = dp.estimate_work(&state);
    dp.value(&state)
}

struct Dp<'a> {
    instance: &'a MarketInstance,
    design: PlatformDesign,
    memo: HashMap<MarketState, f64>,
    user_memo: HashMap<(usize, UserSet, UserSet), f64>,
    work: u64,
    cap: u64,
    estimate: u64,
}

impl Dp<'_> {
    fn estimate_work(&self, state: &MarketState) -> u64 {
        let horizon = self.instance.horizon();
        if state.period >= horizon {
            return 1;
        }
        let plans = PlanEnumerator::new(state, &self.design, self.instance).bound();
        if self.separable_next(state.period) {
            return plans;
        }
        let fresh_pairs: u32 = self.instance.potential_pairs().len().min(63) as u32;
        let per_period = plans.saturating_mul(1u64 << fresh_pairs);
        (1..horizon - state.period + 1).fold(1u64, |acc, _| acc.saturating_mul(per_period))
    }

    fn charge(&mut self) -> Result<()> {
        self.work += 1;
        if self.work > self.cap {
            return Err(Error::StateSpaceTooLarge { estimate: self.estimate.max(self.work), cap: self.cap });
        }
        Ok(())
    }

    /// The next period is the last and has no mutual displays, so the
    /// continuation value is a sum of per-user expectations.
    fn separable_next(&self, period: usize) -> bool {
        let horizon = self.instance.horizon();
        period + 1 == horizon && !self.design.allows_mutual(horizon, horizon)
    }

    fn last_period(&self, state: &MarketState) -> Result<f64> {
        let horizon = self.instance.horizon();
        if self.design.allows_mutual(horizon, horizon) {
            Ok(solve_bmatching(state, true, self.instance, false)?.1)
        } else {
            Ok(f_total(&state.backlog, self.instance, horizon))
        }
    }

    fn value(&mut self, state: &MarketState) -> Result<f64> {
        if state.period == self.instance.horizon() {
            return self.last_period(state);
        }
        if let Some(&v) = self.memo.get(state) {
            return Ok(v);
        }
        let enumerator = PlanEnumerator::new(state, &self.design, self.instance);
        let mut plans = Vec::new();
        enumerator.for_each(|p| {
            plans.push(p.clone());
            Ok::<(), Error>(())
        })?;
        let separable = self.separable_next(state.period);
        let mut best = 0.0f64;
        for plan in &plans {
            self.charge()?;
            let now = immediate_value(plan, state, self.instance).total;
            let later = if separable { self.separable_continuation(plan, state) } else { self.continuation(plan, state)? };
            best = best.max(now + later);
        }
        self.memo.insert(state.clone(), best);
        Ok(best)
    }

    fn continuation(&mut self, plan: &DisplayPlan, state: &MarketState) -> Result<f64> {
        let mut branches = Vec::new();
        for_each_outcome(plan, state, self.instance, |prob, outcomes| {
            let (next, _) = transition(state, self.instance, plan, outcomes)?;
            branches.push((prob, next));
            Ok::<(), Error>(())
        })?;
        let mut total = 0.0;
        for (prob, next) in branches {
            self.charge()?;
            total += prob * self.value(&next)?;
        }
        Ok(total)
    }

    fn separable_continuation(&mut self, plan: &DisplayPlan, state: &MarketState) -> f64 {
        let n = self.instance.n_users();
        let mut incoming = vec![UserSet::new(); n];
        for (v, u) in fresh_displays(plan, state) {
            if state.potentials[u].contains(v) {
                incoming[u].insert(v);
            }
        }
        let mut total = 0.0;
        for u in self.instance.users() {
            let mut base = state.backlog[u].clone();
            base.difference_with(&plan.shown_to(u));
            total += self.user_expectation(u, base, std::mem::take(&mut incoming[u]));
        }
        total
    }

    /// E[f_u(base ∪ likers)] where each `v` in `incoming` likes `u` independently.
    fn user_expectation(&mut self, u: usize, base: UserSet, incoming: UserSet) -> f64 {
        let key = (u, base, incoming);
        if let Some(&v) = self.user_memo.get(&key) {
            return v;
        }
        let (_, base, incoming) = &key;
        let inst = self.instance;
        let t = inst.horizon();
        let likers: Vec<usize> = incoming.iter().collect();
        let mut total = 0.0;
        for mask in 0u64..(1u64 << likers.len()) {
            let mut prob = 1.0;
            let mut backlog = base.clone();
            for (b, &v) in likers.iter().enumerate() {
                let p = inst.phi(t - 1, v, u);
                if mask >> b & 1 == 1 {
                    prob *= p;
                    backlog.insert(v);
                } else {
                    prob *= 1.0 - p;
                }
            }
            if prob > 0.0 {
                total += prob * f_user(&backlog, |v| inst.phi(t, u, v), inst.capacity(u)).0;
            }
        }
        self.user_memo.insert(key, total);
        total
    }
}

/// Ratio of the optimum when mutual displays stop before the last period to
/// the optimum when they are allowed throughout, both two-directional.
/// Returns 1 when neither design can produce a match.
pub fn nonseq_second_period_ratio_probe(instance: &MarketInstance) -> Result<f64> {
    let first = dp_optimal(instance, &PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialFirstPeriod))?;
    let all = dp_optimal(instance, &PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialAllPeriods))?;
    Ok(if all > 0.0 { first / all } else { 1.0 })
}
