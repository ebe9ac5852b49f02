//! Rotation-invariant spin-orbit photonic qubits.
//!
//! A polarization qubit is mapped by a q-plate onto the total-angular-momentum
//! zero subspace `{|L, m=-1⟩, |R, m=+1⟩}`, which is blind to rotations of the
//! receiver frame about the beam axis. The crate models that encoding over a
//! truncated Laguerre-Gauss basis, the spatial perturbations a free-space link
//! imposes on it, and the resulting protocol figures of merit.

pub mod channel;
pub mod error;
pub mod format;
pub mod modes;
pub mod numerics;
pub mod protocols;
pub mod scenarios;

pub use error::{Error, Result};
