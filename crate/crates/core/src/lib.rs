//! Growth-optimal (Kelly) portfolio allocation from probabilistic models of
//! future prices.
//!
//! The pipeline: describe each asset by a price distribution
//! ([`distributions`]), reduce the portfolio to first and second return
//! moments, build and invert the moment matrix ([`kelly`]), then verify the
//! linearized answer against the exact criterion ([`exact`]) and against
//! Monte Carlo growth simulation ([`sim`]).
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the command
//! line live in the companion `kelly-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod distributions;
pub mod error;
pub mod exact;
pub mod kelly;
pub mod linalg;
pub mod quad;
pub mod root;
pub mod sim;

pub use distributions::{
    AssetModel, Dependence, DiscreteOutcomeModel, Family, MomentSet, PortfolioModel,
};
pub use error::{Error, Result};
pub use kelly::{AllocationResult, Flags, KellySystem};
