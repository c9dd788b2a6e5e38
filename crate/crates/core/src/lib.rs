//! Design and evaluation of energy-efficient opportunistic packet schedulers
//! for loss-tolerant traffic over block-fading channels.
//!
//! A scheduler is described by per-state fading thresholds. Its behaviour is
//! a finite-state Markov chain whose state counts buffered plus successively
//! dropped packets. The crate solves that chain, computes the large-system
//! energy per bit of the scheduled traffic, searches for energy-optimal
//! thresholds under average-drop and burst-loss constraints by simulated
//! annealing, and checks the analytics with a packet-level simulator.
//!
//! Modules, bottom-up:
//! - [`channel`]: path loss, exponential fading, and their product.
//! - [`fsmc`]: policies, thresholds, steady state, drop metrics.
//! - [`energy`]: virtual-user channel and energy per bit; finite-K SIC oracle.
//! - [`annealer`]: constrained simulated annealing and buffer search.
//! - [`simulator`]: packet-level Monte Carlo validation.
//! - [`experiment`]: config-driven batch runs writing CSV.

pub mod annealer;
pub mod channel;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod fsmc;
pub mod quadrature;
pub mod simulator;

pub use error::{Error, Result};
