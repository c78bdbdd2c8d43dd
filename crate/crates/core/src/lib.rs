//! Link-level OTFS simulation under the Doppler squint effect.
//!
//! The crate models doubly-dispersive wideband channels whose Doppler shift
//! depends on the absolute frequency of each subcarrier. It provides the
//! delay-Doppler/time-frequency transforms, channel generation, exact and
//! closed-form input-output coefficients for ideal and rectangular pulses,
//! a time-domain waveform simulator used as a reference, impulse-pilot
//! channel estimation by orthogonal matching pursuit, LMMSE detection and the
//! Monte-Carlo experiment drivers behind the `otfs-dse` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod grid;
pub mod io_analysis;
pub mod link;
pub mod modulation;
pub mod params;
pub mod quadrature;
pub mod transform;
pub mod waveform;

pub use error::{Error, Result};
pub use grid::{DdGrid, Grid, TfGrid};
pub use params::OtfsParams;
