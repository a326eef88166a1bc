//! Simulation of joint versus local discrimination of classically
//! correlated, unentangled two-photon polarization states.
//!
//! Charlie receives two photons prepared either in identical or in
//! orthogonal pure states, with the states themselves unknown, and must
//! guess which correlation was prepared from a single measurement. The crate
//! builds the preparation ensembles, evaluates joint (Bell-basis) and local
//! measurement strategies, models the post-selected linear-optics CNOT used
//! to realize the Bell measurement, and runs seeded Monte Carlo experiments
//! with payoff and mutual-information statistics.

pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod optics;
pub mod quantum;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
