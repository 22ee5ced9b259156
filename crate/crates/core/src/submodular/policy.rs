use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{DisplayPlan, MarketInstance, MarketState, PlatformDesign, Timing};
use crate::policy::{Episode, Policy};
use crate::second_stage::{fill_from_backlog, final_period_plan};

use super::continuous::{continuous_greedy, ContinuousGreedyOptions, FractionalPoint};
use super::matroid::build_feasible_region;
use super::oracle::{M2Mode, MatchValueOracle};
use super::rounding::dependent_rounding;
use super::search::{greedy_matroid_intersection, local_search};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmodularAlgorithm {
    ContinuousGreedyRounded,
    Greedy,
    LocalSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmodularOptions {
    pub mode: M2Mode,
    pub epsilon: f64,
    pub continuous: ContinuousGreedyOptions,
}

impl Default for SubmodularOptions {
    fn default() -> Self {
        SubmodularOptions { mode: M2Mode::Exact, epsilon: 0.1, continuous: ContinuousGreedyOptions::default() }
    }
}

#[derive(Debug, Clone)]
enum FirstPeriod {
    Fixed(DisplayPlan),
    Randomized(FractionalPoint),
}

/// Two-period policy whose first-period displays come from submodular
/// maximization of expected matches over the design's matroid region; the
/// last period is solved exactly.
#[derive(Debug, Clone)]
pub struct SubmodularPolicy {
    instance: MarketInstance,
    design: PlatformDesign,
    algorithm: SubmodularAlgorithm,
    first: FirstPeriod,
}

pub fn submodular_policy(
    instance: &MarketInstance,
    design: PlatformDesign,
    algorithm: SubmodularAlgorithm,
    options: &SubmodularOptions,
) -> Result<SubmodularPolicy> {
    if instance.horizon() != 2 {
        return Err(Error::UnsupportedHorizon {
            policy: format!("{algorithm:?}"),
            expected: "T = 2".into(),
            actual: instance.horizon(),
        });
    }
    let first = match algorithm {
        SubmodularAlgorithm::ContinuousGreedyRounded => {
            if !design.is_one_directional() || design.timing != Timing::SequentialOnly {
                return Err(Error::IncompatibleAlgorithmDesign {
                    algorithm: "continuous_greedy_rounded".into(),
                    design: design.to_string(),
                });
            }
            FirstPeriod::Randomized(continuous_greedy(instance, &design, &options.continuous)?)
        }
        SubmodularAlgorithm::Greedy | SubmodularAlgorithm::LocalSearch => {
            let region = build_feasible_region(instance, &design);
            let oracle = MatchValueOracle::new(instance, &region.ground, options.mode);
            let set = if algorithm == SubmodularAlgorithm::Greedy {
                greedy_matroid_intersection(&oracle, &region)
            } else {
                local_search(&oracle, &region, options.epsilon)?
            };
            let mut plan = oracle.plan_of(&set);
            fill_from_backlog(&mut plan, &instance.initial_state(), instance);
            FirstPeriod::Fixed(plan)
        }
    };
    Ok(SubmodularPolicy { instance: instance.clone(), design, algorithm, first })
}

impl SubmodularPolicy {
    pub fn algorithm(&self) -> SubmodularAlgorithm {
        self.algorithm
    }

    /// First-period plan of the deterministic algorithms.
    pub fn first_period_plan(&self) -> Option<&DisplayPlan> {
        match &self.first {
            FirstPeriod::Fixed(plan) => Some(plan),
            FirstPeriod::Randomized(_) => None,
        }
    }

    fn draw_first(&self, point: &FractionalPoint, rng: &mut dyn RngCore) -> DisplayPlan {
        let mut plan = DisplayPlan::new();
        for viewer in self.instance.users() {
            let mine: Vec<usize> = (0..point.arcs.len()).filter(|&k| point.arcs[k].0 == viewer).collect();
            if mine.is_empty() {
                continue;
            }
            let values: Vec<f64> = mine.iter().map(|&k| point.display[k]).collect();
            for (keep, &k) in dependent_rounding(&values, rng).into_iter().zip(&mine) {
                if keep {
                    plan.x.insert(point.arcs[k]);
                }
            }
        }
        fill_from_backlog(&mut plan, &self.instance.initial_state(), &self.instance);
        plan
    }
}

#[derive(Clone)]
struct SubmodularEpisode<'a> {
    policy: &'a SubmodularPolicy,
}

impl Episode for SubmodularEpisode<'_> {
    fn plan(&mut self, state: &MarketState, rng: &mut dyn RngCore) -> Result<DisplayPlan> {
        let p = self.policy;
        if state.period > 1 {
            return final_period_plan(state, &p.design, &p.instance);
        }
        Ok(match &p.first {
            FirstPeriod::Fixed(plan) => plan.clone(),
            FirstPeriod::Randomized(point) => p.draw_first(point, rng),
        })
    }

    fn fork(&self) -> Box<dyn Episode + '_> {
        Box::new(self.clone())
    }
}

impl Policy for SubmodularPolicy {
    fn name(&self) -> String {
        match self.algorithm {
            SubmodularAlgorithm::ContinuousGreedyRounded => "continuous-greedy",
            SubmodularAlgorithm::Greedy => "global-greedy",
            SubmodularAlgorithm::LocalSearch => "local-search",
        }
        .into()
    }

    fn design(&self) -> PlatformDesign {
        self.design
    }

    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(SubmodularEpisode { policy: self })
    }
}
