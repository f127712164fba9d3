//! Link and hardware budgets: subsampling SNR loss, ADC dynamic range and
//! resource accounting against a Nyquist reference array.

use serde::Serialize;

use crate::num::Real;

/// SNR loss in dB from out-of-band noise folded in by subsampling with
/// factor `q_factor` behind filters of the given stop-band attenuation.
pub fn snr_loss_db<T: Real>(q_factor: T, stopband_atten_db: T) -> T {
    let ten = T::lit(10.0);
    ten * (T::one() + T::lit(2.0) * q_factor * ten.powf(-stopband_atten_db / ten)).log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcSpec<T> {
    /// Saturation level `P_sat` in dBm; the converter swings `±P_sat`.
    pub saturation_dbm: T,
    pub bits: u32,
    pub effective_bits: T,
    pub sample_rate: T,
    /// Bandwidth the noise floor is quoted in, Hz.
    pub reference_bandwidth: T,
}

impl<T: Real> AdcSpec<T> {
    /// 16-bit, 11.85 effective bits, ±10 dBm, 7.5 MHz, quoted in 1 MHz.
    pub fn prototype() -> Self {
        Self {
            saturation_dbm: T::lit(10.0),
            bits: 16,
            effective_bits: T::lit(11.85),
            sample_rate: T::lit(7.5e6),
            reference_bandwidth: T::lit(1e6),
        }
    }

    /// `10 log10((f_s / 2) / BW)`.
    pub fn processing_gain_db(&self) -> T {
        T::lit(10.0) * (self.sample_rate / (T::lit(2.0) * self.reference_bandwidth)).log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRange<T> {
    pub range_db: T,
    pub lower_dbm: T,
}

/// Dynamic range with effective bits:
/// `DR = 6.02 E_NoB - 1.76 + 10 log10((f_s/2)/BW)`, with the lower limit
/// taken from the negative rail, `DR_low = -P_sat - DR`.
pub fn dynamic_range<T: Real>(adc: &AdcSpec<T>) -> DynamicRange<T> {
    let range_db = T::lit(6.02) * adc.effective_bits - T::lit(1.76) + adc.processing_gain_db();
    DynamicRange {
        range_db,
        lower_dbm: -adc.saturation_dbm - range_db,
    }
}

/// Ideal converter of `bits` bits:
/// `DR_low = P_sat - 6.02 b - 10 log10((f_s/2)/BW)`, `DR = P_sat - DR_low`.
pub fn dynamic_range_ideal<T: Real>(adc: &AdcSpec<T>) -> DynamicRange<T> {
    let lower_dbm = adc.saturation_dbm - T::lit(6.02) * T::from_count(adc.bits as usize) - adc.processing_gain_db();
    DynamicRange {
        range_db: adc.saturation_dbm - lower_dbm,
        lower_dbm,
    }
}

/// Hardware and spectrum usage of one array configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceProfile {
    pub tx: usize,
    pub rx: usize,
    /// Per-transmitter band including guard, Hz.
    pub slot_bandwidth: f64,
    /// Per-transmitter band excluding guard, Hz.
    pub signal_bandwidth: f64,
    /// Per-channel ADC rate, Hz.
    pub sample_rate: f64,
}

impl ResourceProfile {
    /// Nyquist array: full slot sampled at twice its width.
    pub fn nyquist(tx: usize, rx: usize, slot_bandwidth: f64, signal_bandwidth: f64) -> Self {
        Self {
            tx,
            rx,
            slot_bandwidth,
            signal_bandwidth,
            sample_rate: 2.0 * slot_bandwidth,
        }
    }

    /// Cognitive array: only `occupied` Hz per transmitter, guard-free.
    pub fn cognitive(tx: usize, rx: usize, occupied: f64, sample_rate: f64) -> Self {
        Self {
            tx,
            rx,
            slot_bandwidth: occupied,
            signal_bandwidth: occupied,
            sample_rate,
        }
    }

    pub fn elements(&self) -> usize {
        self.tx + self.rx
    }

    pub fn channels(&self) -> usize {
        self.tx * self.rx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionRow {
    pub resource: &'static str,
    pub reference: f64,
    pub reduced: f64,
    /// `1 - reduced / reference`.
    pub reduction: f64,
}

pub fn resource_reduction(reference: &ResourceProfile, reduced: &ResourceProfile) -> Vec<ReductionRow> {
    let row = |resource, a: f64, b: f64| ReductionRow {
        resource,
        reference: a,
        reduced: b,
        reduction: 1.0 - b / a,
    };
    vec![
        row("bandwidth_per_tx_with_guard_hz", reference.slot_bandwidth, reduced.slot_bandwidth),
        row("bandwidth_per_tx_without_guard_hz", reference.signal_bandwidth, reduced.signal_bandwidth),
        row("sample_rate_per_channel_hz", reference.sample_rate, reduced.sample_rate),
        row("antenna_elements", reference.elements() as f64, reduced.elements() as f64),
        row("tx_rx_channels", reference.channels() as f64, reduced.channels() as f64),
        row(
            "total_tx_bandwidth_with_guard_hz",
            reference.tx as f64 * reference.slot_bandwidth,
            reduced.tx as f64 * reduced.slot_bandwidth,
        ),
        row(
            "total_tx_bandwidth_without_guard_hz",
            reference.tx as f64 * reference.signal_bandwidth,
            reduced.tx as f64 * reduced.signal_bandwidth,
        ),
    ]
}

/// Prototype accounting: (8x10 Nyquist, 4x5 cognitive) and (20x20 Nyquist,
/// 8x10 cognitive), each transmitter using eight 375 kHz subbands of a
/// 15 MHz slot (12 MHz without guard) sampled at 7.5 MHz.
pub fn prototype_reductions() -> [(&'static str, Vec<ReductionRow>); 2] {
    let occupied = 8.0 * 375e3;
    let narrow = resource_reduction(
        &ResourceProfile::nyquist(8, 10, 15e6, 12e6),
        &ResourceProfile::cognitive(4, 5, occupied, 7.5e6),
    );
    let wide = resource_reduction(
        &ResourceProfile::nyquist(20, 20, 15e6, 12e6),
        &ResourceProfile::cognitive(8, 10, occupied, 7.5e6),
    );
    [("mode3_vs_8x10", narrow), ("mode4_vs_20x20", wide)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_loss_values() {
        assert!((snr_loss_db(4.0, 30.0) - 10.0 * 1.008f64.log10()).abs() < 1e-12);
        assert!((snr_loss_db(4.0, 0.0) - 10.0 * 9f64.log10()).abs() < 1e-12);
        assert!(snr_loss_db(4.0, f64::INFINITY).abs() < 1e-15);
    }

    #[test]
    fn snr_loss_monotone() {
        let mut last = f64::INFINITY;
        for a in 0..60 {
            let v = snr_loss_db(4.0, a as f64);
            assert!(v < last);
            last = v;
        }
        assert!(snr_loss_db(8.0, 30.0) > snr_loss_db(4.0, 30.0));
    }

    #[test]
    fn processing_gain_vanishes_at_half_rate() {
        let mut adc = AdcSpec::<f64>::prototype();
        adc.reference_bandwidth = adc.sample_rate / 2.0;
        assert_eq!(adc.processing_gain_db(), 0.0);
    }

    #[test]
    fn ideal_bits_floor() {
        let dr = dynamic_range_ideal(&AdcSpec::<f64>::prototype());
        let gain = 10.0 * 3.75f64.log10();
        assert!((dr.lower_dbm - (10.0 - 6.02 * 16.0 - gain)).abs() < 1e-12);
        assert!((dr.lower_dbm + 92.06).abs() < 5e-3);
    }

    #[test]
    fn reductions_are_ratios() {
        let rows = resource_reduction(
            &ResourceProfile::nyquist(2, 2, 10.0, 8.0),
            &ResourceProfile::cognitive(1, 1, 2.0, 5.0),
        );
        assert_eq!(rows.len(), 7);
        assert!((rows[0].reduction - 0.8).abs() < 1e-15);
        assert!((rows[2].reduction - 0.75).abs() < 1e-15);
        assert!((rows[4].reduction - 0.75).abs() < 1e-15);
    }
}
