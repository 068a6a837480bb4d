//! Spatially coupled serially and parallel concatenated convolutional codes on
//! the binary erasure channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`trellis`]: rate-1/2 recursive systematic encoders.
//! - [`codec`]: erasure messages, exact BCJR set propagation, and iterative
//!   decoding of blocks and coupled chains (full and sliding window).
//! - [`transfer`]: exact extrinsic erasure transfer functions of a BCJR
//!   decoder, plus a Monte Carlo estimator used to validate them.
//! - [`density`]: density evolution for uncoupled and coupled ensembles, BP
//!   and MAP thresholds, and permeability optimisation.
//! - [`construction`]: interleavers, nested puncturing patterns, block and
//!   chain encoders.
//! - [`sim`]: the erasure channel, Monte Carlo BER sweeps, and the ML erasure
//!   decoder used as a reference.

pub mod codec;
pub mod construction;
pub mod density;
pub mod gf2;
pub mod sim;
pub mod transfer;
pub mod trellis;

mod error;

pub use error::Error;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
