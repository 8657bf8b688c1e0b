//! Library for the replenishment problem with fixed turnover times (RFTT).
//!
//! An instance is a weighted graph with a depot and a per-client *turnover
//! time* `τ_j`: client `j` must be visited at least once in every window of
//! `τ_j` consecutive days. A solution is a periodic sequence of daily depot
//! tours. Two objectives are supported: `min-avg` (average tour length) and
//! `min-max` (maximum tour length).
//!
//! The crate provides
//! * the instance/schedule data model with exact rational arithmetic
//!   ([`instance`], [`schedule`]),
//! * seeded instance generators including the pinwheel and 3-partition
//!   reduction families ([`generate`]),
//! * approximation algorithms for trees, lines and general metrics
//!   ([`tree`], [`line`], [`general`]) on top of a small metric routing
//!   toolbox ([`routing`]),
//! * exact ground truth at small scale via configuration-graph search
//!   ([`oracle`]).

pub mod error;
pub mod general;
pub mod generate;
pub mod instance;
pub mod line;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod routing;
pub mod schedule;
pub mod tree;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use instance::{DistanceMatrix, Instance, PruneEvent, Topology, VertexId};
pub use rational::Rational;
pub use report::{Objective, SolveReport};
pub use schedule::{CompactSchedule, FeasibilityReport, Schedule};
