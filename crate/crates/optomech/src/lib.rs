//! Electrostatically softened nanobeam resonators coupled to a driven
//! optical cavity.
//!
//! Internal frequencies are angular (rad/s). Values that cross the
//! I/O boundary in Hz are converted with an explicit factor of 2π.

pub mod beam;
pub mod cavity;
pub mod dynamics;
pub mod electrostatics;
pub mod error;
pub mod losses;
pub mod quad;
pub mod scenario;
pub mod special;
pub mod spectrum;
pub mod units;
pub mod verify;

pub use error::{Error, Result};
