//! Market primitives: instances, designs, evolving state, display plans and
//! the per-period update rules.

mod design;
mod instance;
mod state;
mod userset;

pub use design::{Direction, ParseDesignError, PlatformDesign, Side, Timing};
pub use instance::{
    validate_instance, InstanceBuilder, InstanceFile, InstanceIoError, MarketInstance, ProbabilityEntry,
    ValidationError,
};
pub use state::{
    backlog_probability, canonical_pair, plan_is_feasible, plan_violations, sample_likes, transition, DisplayPlan,
    LikeOutcomes, MarketState, MatchKind, MatchRecord, PlanViolation, TransitionError,
};
pub use userset::UserSet;
