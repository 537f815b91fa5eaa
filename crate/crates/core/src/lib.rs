//! Sampled-data distributed observers with mixed time- and event-triggered
//! communication, and cooperative output regulation built on them.
//!
//! - [`netgraph`]: leader/follower digraph, Laplacian, `H`, spanning tree.
//! - [`spectra`]: leader spectrum partition, sampled quantities, `expm`.
//! - [`design`]: feasibility of a sampling period and the observer gain interval.
//! - [`observer`]: triggers, the observer bank, `F(mu)` and `G(mu)`.
//! - [`interevent`]: contraction constants and inter-event lower bounds.
//! - [`regulation`]: regulator equations and follower control laws.
//! - [`simkit`]: scenarios, exact simulation and export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod interevent;
pub mod linalg;
pub mod netgraph;
pub mod observer;
pub mod regulation;
pub mod simkit;
pub mod spectra;

pub use design::{DesignProblem, FeasibilityReport, GainInterval, QuadraticCoefficients};
pub use error::{Error, Result};
pub use netgraph::Digraph;
pub use observer::{ObserverBank, TriggerFunction};
pub use simkit::{Scenario, Trace};
pub use spectra::{LeaderModel, SpectrumClass};
