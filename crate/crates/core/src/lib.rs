//! Display policies, Monte Carlo simulation and exhaustive oracles for
//! curated two-sided dating markets.
//!
//! A platform shows each user a limited number of profiles per period. A
//! match needs both users to like each other, either in the same period
//! (a mutual display) or across periods through the backlog of users who
//! already liked someone. The crate provides the market dynamics
//! ([`market`]), the optimization models behind the policies ([`dh`],
//! [`submodular`], [`baselines`], [`second_stage`]), exact reference
//! computations for small markets ([`oracles`]) and a seeded simulation
//! harness ([`sim`]).

pub mod baselines;
pub mod dh;
pub mod error;
pub mod market;
pub mod oracles;
mod par;
pub mod policy;
pub mod second_stage;
pub mod sim;
pub mod submodular;

pub use error::{Error, Result};
pub use par::Execution;
pub use policy::{Episode, Policy};
