use num_complex::Complex;

use crate::array::{compute_beta, ArrayConfig};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::num::{cis_turns, Real};
use crate::params::RadarParams;
use crate::scene::Grid;
use crate::spectrum::TxPlan;

/// Range and azimuth dictionaries of every transmitter, kept in factored
/// form. `A^m` (`K x TN`) has entries
/// `exp(-j2π kappa_k n / TN) exp(-j2π (f_m / B_h)(n / T))`; `B^m`
/// (`Q x Ra`) has entries `exp(+j2π beta_mq (-1 + 2 r / Ra))`, the sign
/// that matches the echo model. Matrices are only materialized on request.
#[derive(Debug, Clone)]
pub struct Dictionaries<T> {
    pub grid: Grid<T>,
    pub kappa: Vec<usize>,
    /// Carrier offsets `f_m` in Hz.
    pub offsets: Vec<T>,
    /// `beta_mq`, row-major `(m, q)`.
    pub beta: Vec<T>,
    pub num_tx: usize,
    pub num_rx: usize,
}

pub fn build_dictionaries<T: Real>(
    params: &RadarParams<T>,
    array: &ArrayConfig<T>,
    plan: &TxPlan<T>,
    kappa: &[usize],
) -> Result<Dictionaries<T>> {
    if kappa.is_empty() {
        return Err(Error::Config("empty coefficient set".into()));
    }
    if plan.len() != array.num_tx() {
        return Err(Error::Config(format!(
            "{} carriers for {} transmitters",
            plan.len(),
            array.num_tx()
        )));
    }
    let mut beta = Vec::with_capacity(array.num_tx() * array.num_rx());
    for (m, &xi) in array.tx.iter().enumerate() {
        for &zeta in &array.rx {
            beta.push(compute_beta(xi, zeta, plan.offsets[m], params));
        }
    }
    Ok(Dictionaries {
        grid: Grid::new(params, array),
        kappa: kappa.to_vec(),
        offsets: plan.offsets.clone(),
        beta,
        num_tx: array.num_tx(),
        num_rx: array.num_rx(),
    })
}

impl<T: Real> Dictionaries<T> {
    pub fn num_coefficients(&self) -> usize {
        self.kappa.len()
    }

    /// Carrier term of `A^m` in turns per range bin: `f_m pri / (T N)`.
    pub(crate) fn carrier_turns_per_bin(&self, m: usize) -> T {
        self.offsets[m] * self.grid.params.pri / T::from_count(self.grid.range_bins)
    }

    #[inline]
    pub fn range_entry(&self, m: usize, k: usize, n: usize) -> Complex<T> {
        let tn = self.grid.range_bins;
        let idx = ((self.kappa[k] as u128 * n as u128) % tn as u128) as usize;
        let turns = T::from_count(idx) / T::from_count(tn) + self.carrier_turns_per_bin(m) * T::from_count(n);
        cis_turns(-turns)
    }

    #[inline]
    pub fn azimuth_entry(&self, m: usize, q: usize, r: usize) -> Complex<T> {
        let az = -T::one() + T::from_count(r) * self.grid.azimuth_cell();
        cis_turns(self.beta[m * self.num_rx + q] * az)
    }

    pub fn range_matrix(&self, m: usize) -> CMatrix<T> {
        CMatrix::from_fn(self.kappa.len(), self.grid.range_bins, |k, n| self.range_entry(m, k, n))
    }

    pub fn azimuth_matrix(&self, m: usize) -> CMatrix<T> {
        CMatrix::from_fn(self.num_rx, self.grid.azimuth_bins, |q, r| self.azimuth_entry(m, q, r))
    }

    /// Unit-amplitude echo of a point at arbitrary (delay, sine azimuth,
    /// Doppler), laid out `(m, q, p, k)` like a coefficient tensor.
    pub fn response(&self, delay: T, sine_azimuth: T, doppler: T) -> Vec<Complex<T>> {
        let pri = self.grid.params.pri;
        let (kk, pp) = (self.kappa.len(), self.grid.doppler_bins);
        let frac = delay / pri;
        let dop: Vec<Complex<T>> = (0..pp)
            .map(|p| cis_turns(doppler * T::from_count(p) * pri))
            .collect();
        let mut out = Vec::with_capacity(self.num_tx * self.num_rx * pp * kk);
        for m in 0..self.num_tx {
            let carrier = cis_turns(-(self.offsets[m] * delay));
            let range: Vec<Complex<T>> = self
                .kappa
                .iter()
                .map(|&k| carrier * cis_turns(-(T::from_count(k) * frac)))
                .collect();
            for q in 0..self.num_rx {
                let spatial = cis_turns(self.beta[m * self.num_rx + q] * sine_azimuth);
                for d in &dop {
                    let sd = spatial * d;
                    out.extend(range.iter().map(|r| sd * r));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{build_array, ArrayMode};
    use crate::spectrum::CognitiveSpectrum;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn shapes() {
        let p = RadarParams::<f64>::desk();
        for mode in ArrayMode::ALL {
            let a = build_array(&p, mode, 1).unwrap();
            let spec = CognitiveSpectrum::reference(&p).unwrap();
            let d = build_dictionaries(&p, &a, &TxPlan::fdm(&p, &a), spec.kappa()).unwrap();
            for m in 0..a.num_tx() {
                let am = d.range_matrix(m);
                assert_eq!((am.rows(), am.cols()), (spec.kappa().len(), 1200));
                let bm = d.azimuth_matrix(m);
                assert_eq!((bm.rows(), bm.cols()), (a.num_rx(), a.azimuth_bins()));
            }
        }
    }

    #[test]
    fn single_slot_collapses_to_dft() {
        let p = RadarParams::<f64>::new(1, 2, 1e-6, 2, 16e6, 10e9).unwrap();
        let a = build_array(&p, ArrayMode::Mode1, 0).unwrap();
        let kappa: Vec<usize> = (0..16).collect();
        let d = build_dictionaries(&p, &a, &TxPlan::fdm(&p, &a), &kappa).unwrap();
        let am = d.range_matrix(0);
        for k in 0..16 {
            for n in 0..16 {
                let dft = Complex::from_polar(1.0, -2.0 * PI * (k * n) as f64 / 16.0);
                assert!((am.get(k, n) - dft).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn spot_entries_match_formulas() {
        let p = RadarParams::<f64>::desk();
        let a = build_array(&p, ArrayMode::Mode3, 4).unwrap();
        let plan = TxPlan::fdm(&p, &a);
        let spec = CognitiveSpectrum::reference(&p).unwrap();
        let d = build_dictionaries(&p, &a, &plan, spec.kappa()).unwrap();
        let (t, n_coef) = (p.nyquist_tx as f64, p.coefficients as f64);
        let tn = t * n_coef;
        let tr = a.azimuth_bins() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let m = rng.random_range(0..a.num_tx());
            let k = rng.random_range(0..spec.kappa().len());
            let n = rng.random_range(0..1200);
            let fm = plan.offsets[m];
            let want = Complex::from_polar(
                1.0,
                -2.0 * PI / tn * (spec.kappa()[k] * n) as f64 - 2.0 * PI * fm / p.bandwidth * n as f64 / t,
            );
            assert!((d.range_entry(m, k, n) - want).norm() < 1e-12);
            let q = rng.random_range(0..a.num_rx());
            let r = rng.random_range(0..a.azimuth_bins());
            let beta = (a.rx[q] + a.tx[m]) * (fm * p.wavelength / p.propagation_speed + 1.0);
            let want = Complex::from_polar(1.0, 2.0 * PI * beta * (-1.0 + 2.0 * r as f64 / tr));
            assert!((d.azimuth_entry(m, q, r) - want).norm() < 1e-12);
        }
    }
}
