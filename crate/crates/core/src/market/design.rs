use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The two sides of the market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    I,
    J,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::I => Side::J,
            Side::J => Side::I,
        }
    }
}

/// Which side may start an interaction by being shown a fresh profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    OneDirectionalFromI,
    OneDirectionalFromJ,
    TwoDirectional,
}

/// When mutual (same-period) displays are permitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    SequentialOnly,
    /// Mutual displays in every period except the final one. For the
    /// two-period horizon this is exactly the first period.
    NonSequentialFirstPeriod,
    NonSequentialAllPeriods,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlatformDesign {
    pub direction: Direction,
    pub timing: Timing,
}

impl PlatformDesign {
    pub const fn new(direction: Direction, timing: Timing) -> Self {
        PlatformDesign { direction, timing }
    }

    /// The 2×2 grid of direction families crossed with the two basic timings.
    pub const GRID: [PlatformDesign; 4] = [
        PlatformDesign::new(Direction::OneDirectionalFromI, Timing::SequentialOnly),
        PlatformDesign::new(Direction::OneDirectionalFromI, Timing::NonSequentialFirstPeriod),
        PlatformDesign::new(Direction::TwoDirectional, Timing::SequentialOnly),
        PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialFirstPeriod),
    ];

    /// Whether users on `side` may be shown profiles that are not in their backlog.
    pub fn may_initiate(&self, side: Side) -> bool {
        match self.direction {
            Direction::TwoDirectional => true,
            Direction::OneDirectionalFromI => side == Side::I,
            Direction::OneDirectionalFromJ => side == Side::J,
        }
    }

    pub fn initiating_side(&self) -> Option<Side> {
        match self.direction {
            Direction::TwoDirectional => None,
            Direction::OneDirectionalFromI => Some(Side::I),
            Direction::OneDirectionalFromJ => Some(Side::J),
        }
    }

    pub fn is_one_directional(&self) -> bool {
        self.direction != Direction::TwoDirectional
    }

    /// Whether mutual displays are allowed in `period` (1-based) of a run
    /// with the given horizon.
    pub fn allows_mutual(&self, period: usize, horizon: usize) -> bool {
        match self.timing {
            Timing::SequentialOnly => false,
            Timing::NonSequentialFirstPeriod => period < horizon,
            Timing::NonSequentialAllPeriods => true,
        }
    }

    pub fn with_timing(self, timing: Timing) -> Self {
        PlatformDesign { timing, ..self }
    }
}

impl fmt::Display for PlatformDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.direction {
            Direction::OneDirectionalFromI => "one-i",
            Direction::OneDirectionalFromJ => "one-j",
            Direction::TwoDirectional => "two",
        };
        let t = match self.timing {
            Timing::SequentialOnly => "none",
            Timing::NonSequentialFirstPeriod => "first",
            Timing::NonSequentialAllPeriods => "both",
        };
        write!(f, "{d}:{t}")
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("cannot parse design `{0}`; expected <one-i|one-j|two>:<none|first|both>")]
pub struct ParseDesignError(pub String);

impl FromStr for PlatformDesign {
    type Err = ParseDesignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDesignError(s.to_string());
        let (d, t) = s.split_once(':').ok_or_else(err)?;
        let direction = match d {
            "one-i" => Direction::OneDirectionalFromI,
            "one-j" => Direction::OneDirectionalFromJ,
            "two" => Direction::TwoDirectional,
            _ => return Err(err()),
        };
        let timing = match t {
            "none" | "seq" => Timing::SequentialOnly,
            "first" => Timing::NonSequentialFirstPeriod,
            "both" | "all" => Timing::NonSequentialAllPeriods,
            _ => return Err(err()),
        };
        Ok(PlatformDesign { direction, timing })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for d in [Direction::OneDirectionalFromI, Direction::OneDirectionalFromJ, Direction::TwoDirectional] {
            for t in [Timing::SequentialOnly, Timing::NonSequentialFirstPeriod, Timing::NonSequentialAllPeriods] {
                let design = PlatformDesign::new(d, t);
                assert_eq!(design.to_string().parse::<PlatformDesign>().unwrap(), design);
            }
        }
        assert!("sideways:none".parse::<PlatformDesign>().is_err());
    }

    #[test]
    fn mutual_display_windows() {
        let first = PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialFirstPeriod);
        assert!(first.allows_mutual(1, 2));
        assert!(!first.allows_mutual(2, 2));
        let both = first.with_timing(Timing::NonSequentialAllPeriods);
        assert!(both.allows_mutual(2, 2));
        let none = first.with_timing(Timing::SequentialOnly);
        assert!(!none.allows_mutual(1, 2));
    }
}
