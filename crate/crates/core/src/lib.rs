//! Bounds on the decoherence of a quantum channel from observed CHSH statistics.
//!
//! Two bounds are provided. The quantum bound is exact for two-qubit
//! systems and follows from the max-entropy of Bell-diagonal states
//! ([`bound`]). The no-signalling bound assumes only that no party can
//! signal to the others and is computed by a linear program ([`nosignalling`]).
//! Both are applied to an optomechanical model of gravitational
//! decoherence in [`optomech`], and [`bellsim`] simulates the finite-round
//! experiment that estimates the CHSH value in the first place.

pub mod bellsim;
pub mod bound;
pub mod entropy;
pub mod error;
pub mod lp;
pub mod nosignalling;
pub mod optimize;
pub mod optomech;
pub mod quantum;
pub mod sampling;
pub mod tol;

pub use error::{Error, Result};
