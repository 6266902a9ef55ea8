//! Exact finite-blocklength tools for mismatched stochastic likelihood decoding
//! over discrete memoryless channels with product decoding metrics.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. Everything here is a
//! pure function of validated inputs:
//!
//! * [`channel`]: channels, decoding metrics, input distributions and the
//!   constructions applied to them (k-letter products, tilting, erasures-only).
//! * [`density`] and [`spectrum`]: mismatched information densities and the exact
//!   law of their normalized block sums.
//! * [`rates`]: k-letter GMI and LM rates, their optimization, matched capacity
//!   and the relative-entropy gap bound.
//! * [`decoder`]: codebooks, exact and Monte Carlo error probabilities of the
//!   stochastic and maximum-metric decoders.
//! * [`bounds`]: Feinstein, RCU and Verdú-Han type bounds and the sandwich harness.
//!
//! All logarithms are natural; rates are in nats.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod budget;
pub mod channel;
pub mod decoder;
pub mod density;
mod error;
pub mod math;
pub mod rates;
pub mod spectrum;

pub use budget::Budget;
pub use channel::{ChannelSpec, InputDist, Matrix, MetricSpec, ProblemPair};
pub use error::{Error, Result};
