//! Shared front-end description: carrier, pulse timing, and the two arrays.

use crate::array::ArrayGeometry;
use crate::error::{RadarError, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier, pulse timing, and the collocated surface/receive arrays.
///
/// Immutable after construction; every synthesis and detection operation
/// borrows it.
#[derive(Debug, Clone)]
pub struct RadarSystem {
    pub carrier_hz: f64,
    pub wavelength: f64,
    /// Pulse repetition interval in seconds.
    pub pri: f64,
    pub ris: ArrayGeometry,
    pub rx: ArrayGeometry,
}

impl RadarSystem {
    pub fn new(carrier_hz: f64, pri: f64, ris: ArrayGeometry, rx: ArrayGeometry) -> Result<Self> {
        if carrier_hz <= 0.0 {
            return Err(RadarError::InvalidConfiguration(
                "carrier frequency must be positive".into(),
            ));
        }
        if pri <= 0.0 {
            return Err(RadarError::InvalidConfiguration(
                "pulse repetition interval must be positive".into(),
            ));
        }
        let wavelength = SPEED_OF_LIGHT / carrier_hz;
        Ok(Self { carrier_hz, wavelength, pri, ris, rx })
    }

    /// Half-open magnitude bound of the unambiguous Doppler interval,
    /// `1 / (2 * pri)` in Hz.
    pub fn max_doppler_hz(&self) -> f64 {
        1.0 / (2.0 * self.pri)
    }
}
