//! Grid parameters shared by every stage of the simulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Upper bound on `subcarriers * slots` accepted by [`OtfsParams`].
pub const MAX_GRID_SIZE: usize = 1_000_000;

/// Dimensions and physical spacing of an OTFS frame.
///
/// The frame has `slots` rows (time slots in the TF domain, Doppler bins in
/// the DD domain) and `subcarriers` columns (subcarriers in the TF domain,
/// delay bins in the DD domain). The slot duration is `1 / subcarrier_spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtfsParams {
    subcarriers: usize,
    slots: usize,
    subcarrier_spacing: f64,
    carrier_frequency: f64,
    max_delay_index: usize,
    max_doppler_index: f64,
}

impl OtfsParams {
    /// Builds and validates a parameter set.
    ///
    /// `max_delay_index` must lie in `(1, subcarriers - 1]` and
    /// `max_doppler_index` in `(1, slots / 2)`.
    pub fn new(
        subcarriers: usize,
        slots: usize,
        subcarrier_spacing: f64,
        carrier_frequency: f64,
        max_delay_index: usize,
        max_doppler_index: f64,
    ) -> Result<Self> {
        let p = Self {
            subcarriers,
            slots,
            subcarrier_spacing,
            carrier_frequency,
            max_delay_index,
            max_doppler_index,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.subcarriers < 2 || self.slots < 2 {
            return Err(Error::Params(format!(
                "grid must be at least 2x2, got {}x{}",
                self.slots, self.subcarriers
            )));
        }
        if self.subcarriers.saturating_mul(self.slots) >= MAX_GRID_SIZE {
            return Err(Error::Params(format!(
                "grid size {} exceeds the supported maximum {MAX_GRID_SIZE}",
                self.subcarriers * self.slots
            )));
        }
        if !(self.subcarrier_spacing.is_finite() && self.subcarrier_spacing > 0.0) {
            return Err(Error::Params("subcarrier spacing must be positive".into()));
        }
        if !(self.carrier_frequency.is_finite() && self.carrier_frequency > 0.0) {
            return Err(Error::Params("carrier frequency must be positive".into()));
        }
        if self.max_delay_index <= 1 || self.max_delay_index > self.subcarriers - 1 {
            return Err(Error::Params(format!(
                "max delay index {} must lie in (1, {}]",
                self.max_delay_index,
                self.subcarriers - 1
            )));
        }
        let half = self.slots as f64 / 2.0;
        if !(self.max_doppler_index > 1.0 && self.max_doppler_index < half) {
            return Err(Error::Params(format!(
                "max Doppler index {} must lie in (1, {half})",
                self.max_doppler_index
            )));
        }
        Ok(())
    }

    /// Number of subcarriers (delay bins).
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// Number of time slots (Doppler bins).
    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Total number of grid points.
    pub fn grid_size(&self) -> usize {
        self.subcarriers * self.slots
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.subcarrier_spacing
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    /// Slot duration in seconds.
    pub fn slot_duration(&self) -> f64 {
        1.0 / self.subcarrier_spacing
    }

    /// Delay resolution `T / M` in seconds.
    pub fn delay_resolution(&self) -> f64 {
        self.slot_duration() / self.subcarriers as f64
    }

    /// Doppler resolution `Δf / N` in hertz.
    pub fn doppler_resolution(&self) -> f64 {
        self.subcarrier_spacing / self.slots as f64
    }

    pub fn max_delay_index(&self) -> usize {
        self.max_delay_index
    }

    pub fn max_doppler_index(&self) -> f64 {
        self.max_doppler_index
    }

    /// Largest delay `τ_max = l_max T / M` in seconds.
    pub fn max_delay(&self) -> f64 {
        self.max_delay_index as f64 * self.delay_resolution()
    }

    /// Largest Doppler shift `ν_max = k_max Δf / N` in hertz.
    pub fn max_doppler(&self) -> f64 {
        self.max_doppler_index * self.doppler_resolution()
    }

    /// Returns a copy with a different carrier frequency.
    pub fn with_carrier_frequency(&self, carrier_frequency: f64) -> Result<Self> {
        let mut p = *self;
        p.carrier_frequency = carrier_frequency;
        p.validate()?;
        Ok(p)
    }
}

/// Converts km/h to m/s.
pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = OtfsParams::new(512, 128, 15e3, 4e9, 20, 15.8).unwrap();
        assert!((p.slot_duration() - 1.0 / 15e3).abs() < 1e-18);
        assert!((p.delay_resolution() * 512.0 - p.slot_duration()).abs() < 1e-18);
        assert!((p.doppler_resolution() - 15e3 / 128.0).abs() < 1e-12);
        assert!((p.max_delay() - 20.0 / (512.0 * 15e3)).abs() < 1e-18);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(OtfsParams::new(512, 128, 15e3, 4e9, 1, 15.8).is_err());
        assert!(OtfsParams::new(512, 128, 15e3, 4e9, 512, 15.8).is_err());
        assert!(OtfsParams::new(512, 128, 15e3, 4e9, 20, 64.0).is_err());
        assert!(OtfsParams::new(512, 128, 15e3, 4e9, 20, 1.0).is_err());
        assert!(OtfsParams::new(1024, 1024, 15e3, 4e9, 20, 15.8).is_err());
        assert!(OtfsParams::new(512, 128, -1.0, 4e9, 20, 15.8).is_err());
    }
}
