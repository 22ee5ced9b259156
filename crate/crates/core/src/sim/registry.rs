use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{local_greedy_policy, perfect_matching_policy};
use crate::dh::{dh_fractional_policy, dh_integral_policy, dh_multi_period_onedir_rounded, dh_multi_period_policy};
use crate::error::{Error, Result};
use crate::market::{MarketInstance, PlatformDesign, Timing};
use crate::policy::Policy;
use crate::submodular::{submodular_policy, SubmodularAlgorithm, SubmodularOptions};

/// Every policy the harness can build by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Dh,
    DhFractional,
    DhMulti,
    DhMultiRounded,
    LocalGreedy,
    PerfectMatching,
    GlobalGreedy,
    LocalSearch,
    ContinuousGreedy,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 9] = [
        PolicyKind::Dh,
        PolicyKind::DhFractional,
        PolicyKind::DhMulti,
        PolicyKind::DhMultiRounded,
        PolicyKind::LocalGreedy,
        PolicyKind::PerfectMatching,
        PolicyKind::GlobalGreedy,
        PolicyKind::LocalSearch,
        PolicyKind::ContinuousGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Dh => "dh",
            PolicyKind::DhFractional => "dh-fractional",
            PolicyKind::DhMulti => "dh-multi",
            PolicyKind::DhMultiRounded => "dh-multi-rounded",
            PolicyKind::LocalGreedy => "local-greedy",
            PolicyKind::PerfectMatching => "perfect-matching",
            PolicyKind::GlobalGreedy => "global-greedy",
            PolicyKind::LocalSearch => "local-search",
            PolicyKind::ContinuousGreedy => "continuous-greedy",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}

/// Builds a policy for `instance` under `design`.
pub fn build_policy(kind: PolicyKind, instance: &MarketInstance, design: PlatformDesign) -> Result<Box<dyn Policy>> {
    let submodular = |algorithm| -> Result<Box<dyn Policy>> {
        Ok(Box::new(submodular_policy(instance, design, algorithm, &SubmodularOptions::default())?))
    };
    Ok(match kind {
        PolicyKind::Dh => Box::new(dh_integral_policy(instance, design)?),
        PolicyKind::DhFractional => Box::new(dh_fractional_policy(instance, design)?),
        PolicyKind::DhMulti => Box::new(dh_multi_period_policy(instance, design)?),
        PolicyKind::DhMultiRounded => match (design.initiating_side(), design.timing) {
            (Some(side), Timing::SequentialOnly) => Box::new(dh_multi_period_onedir_rounded(instance, side)?),
            _ => {
                return Err(Error::IncompatibleAlgorithmDesign {
                    algorithm: kind.name().into(),
                    design: design.to_string(),
                })
            }
        },
        PolicyKind::LocalGreedy => Box::new(local_greedy_policy(instance, design)),
        PolicyKind::PerfectMatching => Box::new(perfect_matching_policy(instance, design)),
        PolicyKind::GlobalGreedy => submodular(SubmodularAlgorithm::Greedy)?,
        PolicyKind::LocalSearch => submodular(SubmodularAlgorithm::LocalSearch)?,
        PolicyKind::ContinuousGreedy => submodular(SubmodularAlgorithm::ContinuousGreedyRounded)?,
    })
}
