//! The interface shared by every display policy.

use rand::RngCore;

use crate::error::Result;
use crate::market::{DisplayPlan, MarketState, PlatformDesign};

/// A display policy bound to one instance and design.
///
/// Expensive model solves happen when the policy is constructed. A policy is
/// shared read-only across replications; anything a replication must
/// remember between periods lives in its [`Episode`].
pub trait Policy: Send + Sync {
    fn name(&self) -> String;

    fn design(&self) -> PlatformDesign;

    /// Begins a fresh replication.
    fn start(&self) -> Box<dyn Episode + '_>;
}

/// Per-replication policy memory.
pub trait Episode: Send {
    /// Chooses the displays for `state.period`.
    fn plan(&mut self, state: &MarketState, rng: &mut dyn RngCore) -> Result<DisplayPlan>;

    /// An independent copy with the same memory, used when enumerating
    /// outcome branches exactly.
    fn fork(&self) -> Box<dyn Episode + '_>;
}

/// Policies whose plan depends only on the current state.
pub(crate) trait Memoryless: Sync {
    fn plan_state(&self, state: &MarketState) -> Result<DisplayPlan>;
}

pub(crate) struct MemorylessEpisode<'a, P: ?Sized>(pub &'a P);

impl<P: Memoryless + ?Sized> Episode for MemorylessEpisode<'_, P> {
    fn plan(&mut self, state: &MarketState, _rng: &mut dyn RngCore) -> Result<DisplayPlan> {
        self.0.plan_state(state)
    }

    fn fork(&self) -> Box<dyn Episode + '_> {
        Box::new(MemorylessEpisode(self.0))
    }
}
