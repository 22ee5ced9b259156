//! First-period display choice as submodular maximization over an
//! intersection of matroids.
//!
//! The feasible first-period displays of every design form the independent
//! sets of one to three matroids ([`build_feasible_region`]). Expected
//! matches as a function of the displayed set ([`MatchValueOracle`]) is
//! monotone and, for sequential final periods, submodular, so greedy,
//! local search and continuous greedy with dependent rounding all carry
//! constant-factor guarantees.

mod continuous;
mod matroid;
mod oracle;
mod policy;
mod rounding;
mod search;

pub use continuous::{continuous_greedy, ContinuousGreedyOptions, FractionalPoint};
pub use matroid::{build_feasible_region, Element, FeasibleRegion, LaminarMatroid, Matroid, PartitionMatroid};
pub use oracle::{expected_top_k, multilinear_estimate, Estimate, M2Mode, MatchValueOracle, SetFunction};
pub use policy::{submodular_policy, SubmodularAlgorithm, SubmodularOptions, SubmodularPolicy};
pub use rounding::{dependent_rounding, dependent_rounding_parts};
pub use search::{greedy_matroid_intersection, greedy_with, local_search, local_search_with, LOCAL_SEARCH_MOVE_CAP};
