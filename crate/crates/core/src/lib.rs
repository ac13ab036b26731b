//! Fading-GRAND: hard-input guessing random additive noise decoding for short
//! linear block codes over flat Rayleigh fading with SC/MRC diversity.
//!
//! The crate covers GF(2) linear algebra ([`gf2`]), the evaluated code
//! families ([`codes`]), the fading channel ([`channel`]), GRANDAB and
//! Fading-GRAND ([`grand`]), a Berlekamp-Massey BCH baseline ([`bm`]),
//! threshold calibration ([`calib`]) and the Monte Carlo harness ([`sim`]).

pub mod bm;
pub mod calib;
pub mod channel;
pub mod codes;
pub mod error;
pub mod gf2;
pub mod grand;
pub mod sim;

pub use error::{Error, Result};
