//! Exact binary expansions of constants and the prefix-vector machinery used
//! to study base-2 normality at finite scale.
//!
//! The crate is split the way the data flows:
//!
//! - [`digits`] produces digit streams (`√m`, rationals, Champernowne and
//!   Copeland–Erdős concatenations) and reads/writes `.nbits` files.
//! - [`vecrep`] turns a prefix of a stream into a vector, its integer
//!   representative `x*`, the expanded non-standard vector and the complement.
//! - [`analytics`] computes checkpointed series and block-frequency
//!   histograms over prefixes.
//! - [`harness`] checks the vector identities exhaustively for small `n` and
//!   on seeded random vectors beyond that.

pub mod analytics;
pub mod digits;
mod error;
pub mod harness;
pub mod vecrep;

pub use error::{Error, Result};

/// Version written into JSON sidecars and reports.
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Top-level `"schema"` value of every JSON document this crate emits.
pub const JSON_SCHEMA_VERSION: u32 = 1;
