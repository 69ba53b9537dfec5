//! One-shot achievability machinery for classical communication over
//! quantum channels.
//!
//! The library is organized around the noncommutative minimal
//! `A ∧ B = (A + B − |A − B|)/2`, whose trace is the minimum error of
//! discriminating the positive semi-definite operators `A` and `B`
//! (Holevo–Helstrom). Every coding bound in [`bounds`] is a trace of a
//! noncommutative minimal between a joint state and a scaled product of
//! its marginals, and every bound is certified against an exact
//! simulation of the corresponding pretty-good-measurement decoder in
//! [`simulate`].
//!
//! Modules:
//!
//! - [`operator`] — dense Hermitian linear algebra: spectral calculus,
//!   the noncommutative minimal/maximal/quotient, tensor and partial
//!   trace over declared subsystem shapes.
//! - [`model`] — validated density operators, classical-quantum
//!   channels and states, Kraus channels, and their JSON file format.
//! - [`discrimination`] — Helstrom optimal error, pretty-good
//!   measurements, quantum Neyman–Pearson tests, hypothesis-testing and
//!   information-spectrum divergences, operator-inequality checkers.
//! - [`divergences`] — Petz–Rényi, relative entropy and variance,
//!   collision divergence, max-relative entropy, the inverse normal CDF.
//! - [`bounds`] — closed-form one-shot error/rate/exponent bounds for
//!   point-to-point, entanglement-assisted, source-coding, multiple
//!   access, broadcast, and state-information protocols.
//! - [`simulate`] — exact and Monte-Carlo random-coding simulations
//!   that certify every bound on small instances.
//! - [`checks`] — randomized property batteries behind the `check` CLI
//!   subcommands.
//!
//! All logarithms are natural; rates and divergences are in nats.

pub mod bounds;
pub mod checks;
pub mod discrimination;
pub mod divergences;
mod error;
pub mod model;
pub mod operator;
pub mod random;
pub mod simulate;

pub use error::{Error, Result};
