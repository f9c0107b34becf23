//! Multiple-link mobility diversity for a single-antenna mobile robot that
//! relays for the weakest cluster heads of a clustered sensor network.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: Bessel J0, Marcum Q1, the degree-1/2 Laguerre function,
//!   Rician statistics and adaptive quadrature.
//! - [`channel`]: spatially correlated fading fields, lognormal shadowing,
//!   link gains and power control.
//! - [`planner`]: the fading predictor, the two path-planning objectives
//!   and the exploration/selection phases of the MDA.
//! - [`network`]: topology and the per-coherence-block round.
//! - [`harness`]: Monte-Carlo sweeps over the number of stopping points and
//!   relayed links, with trend checks.
//! - [`config`] and [`cli`]: the key-value experiment file and batch front end.

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod network;
pub mod numerics;
pub mod planner;

pub use error::{Error, Result};
