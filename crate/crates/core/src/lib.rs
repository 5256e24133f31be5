//! Concatenated low-weight codes for covert communication over binary
//! symmetric channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf2m`] and [`rs`] provide the systematic Reed–Solomon outer code.
//! * [`design`] evaluates the closed-form design quantities and solves the
//!   chunk-length min–max program.
//! * [`innercode`] holds the random low-weight inner codebooks and the
//!   chunk-wise typicality decoder.
//! * [`channel`] simulates BSCs and computes exact weight laws.
//! * [`codec`] glues outer and inner codes into an end-to-end scheme.
//! * [`adversary`] implements the warden's detectors.
//! * [`harness`] runs seeded experiments and writes records.

pub mod adversary;
pub mod bits;
pub mod channel;
pub mod codec;
pub mod design;
pub mod error;
pub mod gf2m;
pub mod harness;
pub mod innercode;
pub mod numeric;
pub mod rs;
pub mod seed;

pub use error::{Error, Result};
