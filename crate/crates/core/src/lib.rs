//! Simulation and rate-region computation for coordination in quantum networks.
//!
//! Three settings are covered: a two-node network simulating a c-q state
//! `ω_XB` from a classical source, a no-communication network preparing a
//! separable `ω_ABC` from shared randomness only, and a broadcast network
//! simulating a c-q-q state `ω_XB₁B₂`.
//!
//! * [`qstate`]: density operators, entropies, trace distance, PPT.
//! * [`cq`]: target states, auxiliary-variable extensions and their information functionals.
//! * [`softcover`]: random codebooks and the soft-covering (resolvability) experiment.
//! * [`protocols`]: exact induced states of the three coordination codes.
//! * [`region`]: numerical rate regions, PPT screening and a brute-force oracle.

pub mod cq;
mod error;
pub mod limits;
pub mod linalg;
pub mod protocols;
pub mod qstate;
pub mod region;
pub mod softcover;
mod tensorsum;

pub use error::{Error, Result};
pub use limits::{Caps, Tolerances};
pub use qstate::{DensityOperator, Register, RegisterCut};
