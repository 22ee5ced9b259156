//! Dating-heuristic policies.
//!
//! All variants start from a mixed-integer relaxation ([`relaxation`]) in
//! which first-period displays are binary and the backlog displays they
//! enable are fractional. [`DhIntegral`] shows the optimal first-period
//! displays and then reoptimizes; [`DhFractional`] solves a one-step
//! lookahead LP every period and rounds it; [`DhMultiPeriod`] and
//! [`DhMultiPeriodRounded`] spread a horizon-wide plan over T periods.

mod fractional;
mod integral;
mod multi_period;
pub mod relaxation;

pub use fractional::{dh_fractional_policy, DhFractional};
pub use integral::{dh_integral_policy, DhIntegral};
pub use multi_period::{dh_multi_period_onedir_rounded, dh_multi_period_policy, DhMultiPeriod, DhMultiPeriodRounded};
pub use relaxation::{
    build_dh_relaxation, build_dh_relaxation_from, solve_dh_relaxation, DhModel, DH_MIP_OPTIONS, DhRelaxationSolution, RelaxationForm,
};

use crate::error::{Error, Result};
use crate::market::MarketInstance;

fn require_two_periods(policy: &str, instance: &MarketInstance) -> Result<()> {
    if instance.horizon() == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedHorizon { policy: policy.into(), expected: "T = 2".into(), actual: instance.horizon() })
    }
}
