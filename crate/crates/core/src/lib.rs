//! Greedy cascade coloring of regular trees.
//!
//! The crate has four layers:
//!
//! * [`dynamics`]: the deterministic type space, size-biased neighbor law,
//!   cascade and remainder growth rates, and the drift of the type
//!   distribution.
//! * [`ode`]: fixed-step integration of the drift, location of the stopping
//!   time `R`, and serializable subcriticality certificates.
//! * [`process`]: the randomized coloring process itself on finite,
//!   locally tree-like graphs: activation, forced cascades, error (red)
//!   marking, buffer rounds, completion of the remainder and the final
//!   repair that introduces one extra color.
//! * [`stats`]: estimators that compare simulation output with the
//!   deterministic predictions.

pub mod dynamics;
pub mod error;
pub mod ode;
pub mod process;
pub mod stats;

pub use error::{Error, Result};
