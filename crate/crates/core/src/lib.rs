//! Achievable strong-secrecy rate regions for the two-way wiretap channel.
//!
//! The crate is split along the computation pipeline:
//!
//! * [`gaussian`] evaluates the single-letter mutual informations of the
//!   Gaussian two-way wiretap channel with prefix jamming noise, and the
//!   covariance of the source induced by the jamming noise.
//! * [`polytope`] holds the small-dimension geometry: halfspace systems,
//!   Fourier–Motzkin projection, 2-D vertex enumeration and convex hulls.
//! * [`regions`] assembles the cooperative-jamming, key-exchange and
//!   key-generation regions and sweeps them over power splits.
//! * [`keyrate`] computes secret-key rate versus public-communication rate
//!   for scalar degraded Gaussian sources.
//! * [`sim`] is an exact simulator of random wiretap codes over small
//!   discrete memoryless two-way wiretap channels.
//!
//! All rates are in bits per channel use.

pub mod error;
pub mod gaussian;
pub mod keyrate;
pub mod linalg;
pub mod polytope;
pub mod regions;
pub mod sim;

pub use error::{Error, Result};
