//! Simulator for a sender-controlled measurement-device-independent quantum
//! secret sharing protocol.
//!
//! A sender (Alice) shares a secret with n receivers through an untrusted
//! measurement node (David) that performs GHZ-state analysis on one photon
//! from each party. The crate models the protocol end to end:
//!
//! * [`quantum`]: dense state vectors, tensor products, projections, seeded
//!   measurements.
//! * [`ghz`]: the GHZ basis, product-state decompositions, the linear-optics
//!   analyzer with click patterns, and the sender-collapse predictor.
//! * [`protocol`]: sequence preparation, per-round analysis, the security
//!   check, message encoding, and both decoding methods.
//! * [`adversary`]: intercept-resend and teleportation-based attacks plus
//!   detection-rate measurement.
//! * [`coding`]: depolarizing/dephasing channel noise and the repetition
//!   code used to protect the message against it.
//! * [`seed`]: the master-seed to named-stream randomness contract.

pub mod adversary;
pub mod coding;
pub mod ghz;
pub mod protocol;
pub mod quantum;
pub mod seed;

pub use quantum::{Eigenstate, PauliBasis, Sign, StateVector};
