//! Local quantum probing of graph topology.
//!
//! A single excitation walks on an unknown graph under the Hamiltonian
//! `H = γA` (`A` the adjacency matrix). Occupation probabilities recorded
//! at a handful of monitored nodes over a short time window form a feature
//! vector; a ridge-regression readout maps those features to global graph
//! observables such as spectral moments, hub density, network size and the
//! strength of a non-Hermitian leakage term.
//!
//! Module layout:
//! - [`graph`]: random graph ensembles, validity filtering, ground-truth
//!   observables
//! - [`dynamics`]: Hermitian and non-Hermitian short-time propagation
//! - [`probe`]: initial-state preparation and feature extraction
//! - [`readout`]: ridge regression, prediction and error metrics
//! - [`experiments`]: dataset construction, task running and the bundled
//!   benchmark table

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod jsonfmt;
pub mod probe;
pub mod readout;
pub mod seed;

pub use error::{Error, Result};
