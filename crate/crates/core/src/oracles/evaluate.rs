use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::market::{plan_violations, transition, MarketInstance, MarketState, PlatformDesign};
use crate::policy::{Episode, Policy};

use super::plans::{for_each_outcome, fresh_displays, immediate_value, PlanEnumerator};
use super::second_period::exact_m2;
use super::ExpectedMatches;

/// Largest number of fresh displays in one period that
/// [`exact_policy_value`] branches on.
pub const BRANCH_EDGE_LIMIT: usize = 24;

/// Expected matches of a policy, by following every like pattern that can
/// change the market state.
///
/// The policy receives a fixed random stream (ChaCha8, seed 0) that is
/// shared across branches, so the result is exact only for policies that do
/// not randomize.
pub fn exact_policy_value(policy: &dyn Policy, instance: &MarketInstance) -> Result<ExpectedMatches> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut episode = policy.start();
    descend(episode.as_mut(), &instance.initial_state(), &policy.name(), &policy.design(), instance, &mut rng)
}

fn descend(
    episode: &mut dyn Episode,
    state: &MarketState,
    name: &str,
    design: &PlatformDesign,
    instance: &MarketInstance,
    rng: &mut ChaCha8Rng,
) -> Result<ExpectedMatches> {
    let plan = episode.plan(state, rng)?;
    let violations = plan_violations(&plan, state, design, instance);
    if !violations.is_empty() {
        return Err(Error::InfeasiblePlan { policy: name.into(), period: state.period, violations });
    }
    let mut value = immediate_value(&plan, state, instance);
    if state.period == instance.horizon() {
        return Ok(value);
    }
    let fresh = fresh_displays(&plan, state).len();
    if fresh > BRANCH_EDGE_LIMIT {
        return Err(Error::TooManyEdges { count: fresh, limit: BRANCH_EDGE_LIMIT });
    }
    let mut branches = Vec::new();
    for_each_outcome(&plan, state, instance, |prob, outcomes| {
        branches.push((prob, transition(state, instance, &plan, outcomes)?.0));
        Ok::<(), Error>(())
    })?;
    for (prob, next) in branches {
        let mut child = episode.fork();
        value += descend(child.as_mut(), &next, name, design, instance, rng)? * prob;
    }
    Ok(value)
}

/// Best first-period plan for a two-period market whose last period has no
/// mutual displays, by direct enumeration: max over plans of M¹ + M².
///
/// This shares no code with [`super::dp_optimal`] beyond plan enumeration
/// and serves as its cross-check.
pub fn problem2_enumeration(instance: &MarketInstance, design: &PlatformDesign, plan_cap: u64) -> Result<f64> {
    if instance.horizon() != 2 || design.allows_mutual(2, 2) {
        return Err(Error::UnsupportedHorizon {
            policy: "problem2-enumeration".into(),
            expected: "T = 2 without mutual displays in period 2".into(),
            actual: instance.horizon(),
        });
    }
    let state = instance.initial_state();
    let enumerator = PlanEnumerator::new(&state, design, instance);
    if enumerator.bound() > plan_cap {
        return Err(Error::StateSpaceTooLarge { estimate: enumerator.bound(), cap: plan_cap });
    }
    let mut best = 0.0f64;
    enumerator.for_each(|plan| {
        let value = immediate_value(plan, &state, instance).total + exact_m2(plan, instance)?;
        best = best.max(value);
        Ok::<(), Error>(())
    })?;
    Ok(best)
}
