//! Spontaneous-emission dynamics of two distinguishable two-level atoms
//! whose separation is a quantum wave packet.
//!
//! The crate models how vacuum-mediated collective decay entangles and
//! disentangles the internal state of an atom pair when the interatomic
//! distance is not a number but a three-dimensional Gaussian packet.
//! Averaging the complex pair coupling over the packet reshapes the
//! coherence dynamics and can create, shift, or destroy the finite times
//! at which entanglement vanishes exactly.
//!
//! Module map:
//! - [`coupling`]: the distance- and orientation-dependent pair coupling
//!   (dissipative `mu`, coherent `nu`) and its nodes.
//! - [`quadrature`]: Gauss-Hermite rules and compensated summation used by
//!   the packet averages.
//! - [`ensemble`]: Gaussian packet averages of the coupling (quadrature and
//!   Monte Carlo), producing the moment set that drives the dynamics.
//! - [`dynamics`]: two-atom density-matrix evolution under the packet
//!   average, in exact (node-resolved) and cumulant forms, with the
//!   concurrence.
//! - [`disentanglement`]: closed-form and numeric finite disentanglement
//!   times, regime classification.
//! - [`distinguishability`]: dispersion of the packet and the minimum
//!   achievable blur of the interatomic distance for real atom species.
//!
//! Runnable walkthroughs live in `examples/`; the `atompair` binary exposes
//! the same operations as subcommands (`trajectory`, `find-td`, `sweep`,
//! `check-distinguishability`, `nodes`).

pub mod cli;
pub mod coupling;
pub mod disentanglement;
pub mod distinguishability;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod quadrature;

pub use error::{Error, Result};
