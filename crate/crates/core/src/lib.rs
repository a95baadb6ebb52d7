//! Equilibrium thresholds for majority voting between two antagonistic agent types.
//!
//! A majority (fraction α) and a minority disagree on which alternative is right in each
//! world state; every agent sees a private binary signal. The crate computes the largest
//! coalition fraction ξ*(α) that an approximate equilibrium can withstand while still
//! electing the informed majority decision, builds the matching strategy profiles, checks
//! them exactly at finite n, and re-derives ξ*(α) numerically.
//!
//! Modules, bottom up:
//! - [`model`]: signals, priors, utilities, strategies, environments, dominance.
//! - [`voteshare`]: expected shares, exact Poisson-binomial tallies, fidelity, Monte Carlo.
//! - [`threshold`]: closed forms for θ, α_NL, ξ_NL and the piecewise ξ*(α).
//! - [`construct`]: equilibrium profiles for each segment.
//! - [`deviation`]: coalition deviations and the finite-n equilibrium check.
//! - [`oracle`]: numeric bounds on ξ*(α) and curve verification.
//! - [`cli`]: configuration and the command drivers behind the `antvote` binary.

pub mod cli;
pub mod construct;
pub mod deviation;
pub mod error;
pub mod model;
pub mod oracle;
pub mod threshold;
pub mod voteshare;

pub use error::{Error, Result};
pub use model::{
    AgentGroup, AgentType, Environment, GroupedProfile, Orientation, Prior, SignalModel, State, Strategy,
    UtilityTable,
};
pub use threshold::Segment;
