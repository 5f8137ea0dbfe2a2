//! Discrete-time proportional imitation dynamics on networks.
//!
//! Players sit on the vertices of an undirected weighted [`Network`], play a
//! symmetric matrix [`Game`] against each neighbour and drift toward
//! neighbours that out-earn them. On top of the update engine the crate
//! provides consensus diagnostics ([`analysis`]), payoff-driven topology
//! co-evolution ([`topology`]) and a trend/cascade variant ([`trend`]).

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod network;
pub mod rng;
pub mod topology;
pub mod trend;

pub use dynamics::{ImitationGraph, SimConfig, StrategyProfile, Trajectory};
pub use error::{Error, Result};
pub use game::{ExponentSign, Game, TrendParams};
pub use network::Network;

/// Absolute tolerance for every payoff comparison.
///
/// Differences at or below this value never create an imitation edge and
/// never justify a topology change.
pub const PAYOFF_TOL: f64 = 1e-12;
