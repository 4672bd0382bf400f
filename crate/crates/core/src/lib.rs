//! Coin-flip model for random integer partitions.
//!
//! A sequence of `m` fair coin flips determines a partition: every tail at
//! flip `t` contributes a part equal to one more than the number of heads
//! seen before it. This crate implements that bijection, the exact moments
//! of the resulting size `N`, exact values of the partition function `p(n)`,
//! a seeded Monte Carlo sampler, and a chain of lower-bound checks on `p(n)`
//! whose verdicts never depend on floating-point rounding.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! drivers and the command-line front end live in the `partlab` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bounds;
pub mod count;
mod error;
pub mod interval;
pub mod model;
pub mod moments;
pub mod rational;
pub mod sampler;

pub use error::{Error, Result};
