use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketInstance, PlatformDesign, Side};
use crate::policy::Policy;

use super::simulate::{run_simulation, PolicyResult, SimulationConfig};

/// Which instance parameter a sweep varies, for the users of one side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum SweepAxis {
    /// Multiply that side's like probabilities by each α (clamped to 1).
    ProbScale { side: Side, values: Vec<f64> },
    /// Give that side each capacity K.
    Capacity { side: Side, values: Vec<usize> },
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::ProbScale { values, .. } => values.len(),
            SweepAxis::Capacity { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        match self {
            SweepAxis::ProbScale { values, .. } => match values.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
                Some(a) => Err(Error::BadGeneratorParams(format!("scale α = {a} must be positive"))),
                None => Ok(()),
            },
            SweepAxis::Capacity { values, .. } => match values.iter().find(|&&k| k < 1) {
                Some(k) => Err(Error::BadGeneratorParams(format!("capacity K = {k} must be at least 1"))),
                None => Ok(()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// The axis value, printed as given.
    pub value: String,
    pub result: PolicyResult,
}

/// Runs one simulation per axis value. `make_policy` builds the policy on
/// each modified instance, since policies are bound to their instance.
pub fn sweep<F>(
    instance: &MarketInstance,
    design: PlatformDesign,
    axis: &SweepAxis,
    config: &SimulationConfig,
    mut make_policy: F,
) -> Result<Vec<SweepRow>>
where
    F: FnMut(&MarketInstance, PlatformDesign) -> Result<Box<dyn Policy>>,
{
    axis.validate()?;
    let variants: Vec<(String, MarketInstance)> = match axis {
        SweepAxis::ProbScale { side, values } => {
            values.iter().map(|&a| (a.to_string(), instance.with_scaled_likes(*side, a))).collect()
        }
        SweepAxis::Capacity { side, values } => {
            values.iter().map(|&k| (k.to_string(), instance.with_side_capacity(*side, k))).collect()
        }
    };
    variants
        .into_iter()
        .map(|(value, inst)| {
            let policy = make_policy(&inst, design)?;
            let result = run_simulation(&inst, policy.as_ref(), config)?;
            Ok(SweepRow { value, result })
        })
        .collect()
}
