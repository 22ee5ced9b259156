//! Exact references for small markets.
//!
//! Everything here is exponential in the market size and guarded by an
//! explicit cap; exceeding it is an error rather than a truncated answer.

mod dp;
mod evaluate;
mod plans;
mod second_period;
mod semi_adaptive;

use std::ops::{Add, AddAssign, Mul};

use serde::Serialize;

pub use dp::{dp_optimal, dp_optimal_with, nonseq_second_period_ratio_probe, DpOptions};
pub use evaluate::{exact_policy_value, problem2_enumeration, BRANCH_EDGE_LIMIT};
pub use second_period::{
    correlation_gap_check, distribution_problem, exact_m1, exact_m2, relaxation_f, CorrelationGapReport,
    DISTRIBUTION_DEGREE_LIMIT, M2_EDGE_LIMIT,
};
pub use semi_adaptive::{best_semi_adaptive_value, SEMI_ADAPTIVE_EDGE_LIMIT};

/// Expected match counts split by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ExpectedMatches {
    pub total: f64,
    pub sequential: f64,
    pub non_sequential: f64,
}

impl ExpectedMatches {
    pub fn new(sequential: f64, non_sequential: f64) -> Self {
        ExpectedMatches { total: sequential + non_sequential, sequential, non_sequential }
    }
}

impl Add for ExpectedMatches {
    type Output = ExpectedMatches;

    fn add(self, rhs: Self) -> Self {
        ExpectedMatches::new(self.sequential + rhs.sequential, self.non_sequential + rhs.non_sequential)
    }
}

impl AddAssign for ExpectedMatches {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Mul<f64> for ExpectedMatches {
    type Output = ExpectedMatches;

    fn mul(self, k: f64) -> Self {
        ExpectedMatches::new(self.sequential * k, self.non_sequential * k)
    }
}
