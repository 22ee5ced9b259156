use crate::error::Result;
use crate::market::{DisplayPlan, MarketInstance, MarketState, PlatformDesign};
use crate::policy::{Episode, Memoryless, MemorylessEpisode, Policy};
use crate::second_stage::{fill_from_backlog, final_period_plan};

use super::relaxation::{solve_dh_relaxation, DhRelaxationSolution, RelaxationForm};

/// Two-period DH with an exact MIP in the first period.
///
/// Period 1 shows the relaxation's `x` and `w`. Any capacity they leave
/// unused goes to members of the initial backlog, if there is one. Period 2
/// is solved exactly on the realized backlogs.
#[derive(Debug, Clone)]
pub struct DhIntegral {
    instance: MarketInstance,
    design: PlatformDesign,
    relaxation: DhRelaxationSolution,
    first: DisplayPlan,
}

impl DhIntegral {
    pub fn new(instance: &MarketInstance, design: PlatformDesign) -> Result<Self> {
        super::require_two_periods("dh-integral", instance)?;
        let relaxation = solve_dh_relaxation(instance, &design, RelaxationForm::TwoPeriod)?;
        let mut first = DisplayPlan { x: relaxation.x.clone(), w: relaxation.w.clone() };
        fill_from_backlog(&mut first, &instance.initial_state(), instance);
        Ok(DhIntegral { instance: instance.clone(), design, relaxation, first })
    }

    pub fn relaxation(&self) -> &DhRelaxationSolution {
        &self.relaxation
    }

    pub fn first_period_plan(&self) -> &DisplayPlan {
        &self.first
    }
}

pub fn dh_integral_policy(instance: &MarketInstance, design: PlatformDesign) -> Result<DhIntegral> {
    DhIntegral::new(instance, design)
}

impl Memoryless for DhIntegral {
    fn plan_state(&self, state: &MarketState) -> Result<DisplayPlan> {
        if state.period == 1 {
            Ok(self.first.clone())
        } else {
            final_period_plan(state, &self.design, &self.instance)
        }
    }
}

impl Policy for DhIntegral {
    fn name(&self) -> String {
        "dh".into()
    }

    fn design(&self) -> PlatformDesign {
        self.design
    }

    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(MemorylessEpisode(self))
    }
}
