//! Adaptive estimation over networks: non-cooperative LMS, consensus and
//! diffusion (ATC/CTA) strategies, their mean and mean-square error
//! recursions, closed-form steady-state MSD, and a Monte Carlo harness.

pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod msd;
pub mod network;
pub mod signal;
pub mod spectra;
pub mod strategy;
pub mod twonode;

pub use error::{Error, Result};
pub use network::{CombinationMatrix, CombinationRule, NetworkTopology};
pub use signal::{DataSnapshot, GroundTruth, NodeProfile};
pub use strategy::{NetworkState, StrategyKind};
