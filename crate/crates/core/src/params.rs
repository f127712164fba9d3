//! Global radar constants.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Rounded propagation speed used by radar link budgets (3e8 m/s).
pub const NOMINAL_PROPAGATION_SPEED: f64 = 3.0e8;

/// Radar-wide constants shared by every mode.
///
/// `nyquist_tx`/`nyquist_rx` describe the filled reference array whose
/// virtual aperture defines the grids; `bandwidth` is the per-transmitter
/// one-sided band including guard, so `coefficients = round(bandwidth * pri)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarParams<T> {
    pub nyquist_tx: usize,
    pub nyquist_rx: usize,
    /// Pulse repetition interval in seconds.
    pub pri: T,
    pub pulses: usize,
    /// Per-transmitter bandwidth in Hz.
    pub bandwidth: T,
    /// Carrier frequency in Hz.
    pub carrier: T,
    /// Fourier coefficients per channel.
    pub coefficients: usize,
    /// Wavelength in metres.
    pub wavelength: T,
    /// Propagation speed in m/s.
    pub propagation_speed: T,
    /// Reference (Tx, Rx) counts whose virtual aperture bounds Mode 4.
    pub wide_reference: (usize, usize),
}

impl<T: Real> RadarParams<T> {
    /// Builds parameters at the vacuum speed of light. `coefficients` and
    /// `wavelength` are derived.
    pub fn new(
        nyquist_tx: usize,
        nyquist_rx: usize,
        pri: T,
        pulses: usize,
        bandwidth: T,
        carrier: T,
    ) -> Result<Self> {
        Self::with_speed(
            nyquist_tx,
            nyquist_rx,
            pri,
            pulses,
            bandwidth,
            carrier,
            T::lit(SPEED_OF_LIGHT),
        )
    }

    pub fn with_speed(
        nyquist_tx: usize,
        nyquist_rx: usize,
        pri: T,
        pulses: usize,
        bandwidth: T,
        carrier: T,
        propagation_speed: T,
    ) -> Result<Self> {
        let coefficients = (bandwidth * pri)
            .round()
            .to_usize()
            .ok_or_else(|| Error::Config("bandwidth * pri is not a finite count".into()))?;
        let params = Self {
            nyquist_tx,
            nyquist_rx,
            pri,
            pulses,
            bandwidth,
            carrier,
            coefficients,
            wavelength: propagation_speed / carrier,
            propagation_speed,
            wide_reference: (20, 20),
        };
        params.validate()?;
        Ok(params)
    }

    /// 8x10 X-band prototype: 100 us PRI, 10 pulses, 15 MHz per transmitter
    /// including guard, 10 GHz carrier, 3 cm wavelength.
    pub fn prototype() -> Self {
        Self::with_speed(
            8,
            10,
            T::lit(100e-6),
            10,
            T::lit(15e6),
            T::lit(10e9),
            T::lit(NOMINAL_PROPAGATION_SPEED),
        )
        .expect("prototype parameters are valid")
    }

    /// Prototype geometry with the per-transmitter band cut tenfold
    /// (N = 150), cheap enough for Monte-Carlo runs on a laptop.
    pub fn desk() -> Self {
        Self::with_speed(
            8,
            10,
            T::lit(100e-6),
            10,
            T::lit(1.5e6),
            T::lit(10e9),
            T::lit(NOMINAL_PROPAGATION_SPEED),
        )
        .expect("desk parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.nyquist_tx == 0 || self.nyquist_rx == 0 || self.pulses == 0 {
            return Err(Error::Config(
                "transmitter, receiver and pulse counts must be at least 1".into(),
            ));
        }
        let finite = [
            self.pri,
            self.bandwidth,
            self.carrier,
            self.wavelength,
            self.propagation_speed,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > T::zero());
        if !finite {
            return Err(Error::Config(
                "pri, bandwidth, carrier, wavelength and speed must be positive".into(),
            ));
        }
        if self.bandwidth * self.pri < T::one() || self.coefficients == 0 {
            return Err(Error::Config("bandwidth * pri must be at least 1".into()));
        }
        let mismatch = Float::abs(self.wavelength * self.carrier - self.propagation_speed);
        if mismatch > self.propagation_speed * T::lit(1e-12).max(T::epsilon() * T::lit(4.0)) {
            return Err(Error::Config(
                "wavelength * carrier must equal the propagation speed".into(),
            ));
        }
        if self.wide_reference.0 == 0 || self.wide_reference.1 == 0 {
            return Err(Error::Config("wide reference array must be non-empty".into()));
        }
        Ok(())
    }

    /// Range bins on the delay grid, `T * N`.
    pub fn range_bins(&self) -> usize {
        self.nyquist_tx * self.coefficients
    }

    /// Virtual-array azimuth bins of the filled reference array, `T * R`.
    pub fn azimuth_bins(&self) -> usize {
        self.nyquist_tx * self.nyquist_rx
    }

    pub fn range_cell(&self) -> T {
        self.propagation_speed * self.pri / (T::lit(2.0) * T::from_count(self.range_bins()))
    }

    pub fn unambiguous_range(&self) -> T {
        self.propagation_speed * self.pri / T::lit(2.0)
    }

    /// Largest unambiguous radial speed, `lambda / (4 pri)`.
    pub fn max_velocity(&self) -> T {
        self.wavelength / (T::lit(4.0) * self.pri)
    }

    pub fn velocity_from_doppler(&self, doppler: T) -> T {
        doppler * self.wavelength / T::lit(2.0)
    }

    pub fn doppler_from_velocity(&self, velocity: T) -> T {
        T::lit(2.0) * velocity / self.wavelength
    }

    pub fn range_from_delay(&self, delay: T) -> T {
        self.propagation_speed * delay / T::lit(2.0)
    }

    pub fn delay_from_range(&self, range: T) -> T {
        T::lit(2.0) * range / self.propagation_speed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototype_grid_constants() {
        let p = RadarParams::<f64>::prototype();
        assert_eq!(p.coefficients, 1500);
        assert_eq!(p.range_bins(), 12_000);
        assert!((p.range_cell() - 1.25).abs() < 1e-12);
        assert!((p.unambiguous_range() - 15_000.0).abs() < 1e-9);
        assert!((p.max_velocity() - 75.0).abs() < 1e-12);
        assert!((p.wavelength - 0.03).abs() < 1e-15);
    }

    #[test]
    fn vacuum_speed_keeps_wavelength_consistent() {
        let p = RadarParams::<f64>::new(2, 3, 1e-6, 4, 16e6, 10e9).unwrap();
        assert_eq!(p.coefficients, 16);
        assert!((p.wavelength * p.carrier / SPEED_OF_LIGHT - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_counts() {
        assert!(RadarParams::<f64>::new(0, 3, 1e-6, 4, 16e6, 10e9).is_err());
        assert!(RadarParams::<f64>::new(2, 3, 1e-6, 0, 16e6, 10e9).is_err());
        // bandwidth * pri < 1
        assert!(RadarParams::<f64>::new(2, 3, 1e-7, 4, 1e6, 10e9).is_err());
    }

    #[test]
    fn rejects_inconsistent_wavelength() {
        let mut p = RadarParams::<f64>::prototype();
        p.wavelength = 0.031;
        assert!(p.validate().is_err());
    }

    #[test]
    fn f32_prototype_is_usable() {
        let p = RadarParams::<f32>::prototype();
        assert_eq!(p.coefficients, 1500);
        assert!((p.range_cell() - 1.25).abs() < 1e-5);
    }
}
