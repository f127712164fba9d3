//! Off-grid refinement of coarse detections by a local coherent scan.

use num_complex::Complex;
use num_traits::{Float, Zero};

use super::dictionary::Dictionaries;
use super::focus::focus_at;
use super::{Detection, RecoveryResult};
use crate::error::{Error, Result};
use crate::num::{cis_turns, Real};
use crate::synthesis::CoefficientTensor;

/// Scans `(2 factor + 1)^3` points spaced `1 / factor` bins around each
/// detection and keeps the one with the largest matched-filter output,
/// after subtracting the current fit of every other detection from the
/// data. Detections are visited in order and each update is used for the
/// ones after it. Cells are left unchanged.
pub fn refine<T: Real>(
    result: &RecoveryResult<T>,
    tensor: &CoefficientTensor<T>,
    dict: &Dictionaries<T>,
    factor: usize,
) -> Result<RecoveryResult<T>> {
    if factor == 0 {
        return Err(Error::Input("refinement factor must be positive".into()));
    }
    let (mm, qq, pp, kk) = tensor.dims();
    if mm != dict.num_tx || qq != dict.num_rx || pp != dict.grid.doppler_bins || tensor.kappa != dict.kappa {
        return Err(Error::Input("tensor does not match the dictionaries".into()));
    }
    let grid = &dict.grid;
    let pri = grid.params.pri;
    let gamma = tensor.gamma;
    let mut dets: Vec<Detection<T>> = result.detections.clone();
    let mut fit = vec![Complex::zero(); tensor.data.len()];
    let add = |fit: &mut [Complex<T>], d: &Detection<T>, sign: T| {
        let a = d.amplitude * gamma * sign;
        for (f, r) in fit.iter_mut().zip(dict.response(d.delay, d.sine_azimuth, d.doppler)) {
            *f = *f + a * r;
        }
    };
    for d in &dets {
        add(&mut fit, d, T::one());
    }
    let steps: Vec<T> = (-(factor as i64)..=factor as i64)
        .map(|i| T::lit(i as f64) / T::from_count(factor))
        .collect();
    // Zero offset first so ties keep the coarse estimate.
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by_key(|&i| (i as i64 - factor as i64).abs());

    let norm = T::from_count(mm * qq * kk * pp);
    for l in 0..dets.len() {
        add(&mut fit, &dets[l].clone(), -T::one());
        let mut local = tensor.clone();
        for (y, f) in local.data.iter_mut().zip(&fit) {
            *y = *y - f;
        }
        let (s0, r0, u0) = grid.to_fractional(dets[l].delay, dets[l].sine_azimuth, dets[l].doppler);
        let mut best: Option<(T, Complex<T>, (T, T, T))> = None;
        for &iu in &order {
            let u = u0 + steps[iu];
            let (_, _, nu) = grid.to_physical_frac(T::zero(), T::zero(), u);
            let z = focus_at(&local, nu, pri);
            for &is in &order {
                let s = s0 + steps[is];
                let (tau, _, _) = grid.to_physical_frac(s, T::zero(), T::zero());
                // w[m, q] = sum_k z[m, q, k] conj(range response)
                let mut w = vec![Complex::zero(); mm * qq];
                for m in 0..mm {
                    let carrier = cis_turns(dict.offsets[m] * tau);
                    let phases: Vec<Complex<T>> = dict
                        .kappa
                        .iter()
                        .map(|&k| carrier * cis_turns(T::from_count(k) * tau / pri))
                        .collect();
                    for q in 0..qq {
                        let row = &z[(m * qq + q) * kk..(m * qq + q + 1) * kk];
                        w[m * qq + q] = row.iter().zip(&phases).fold(Complex::<T>::zero(), |acc, (a, b)| acc + a * b);
                    }
                }
                for &ir in &order {
                    let r = r0 + steps[ir];
                    let (_, az, _) = grid.to_physical_frac(T::zero(), r, T::zero());
                    if Float::abs(az) > T::one() {
                        continue;
                    }
                    let val = w
                        .iter()
                        .zip(&dict.beta)
                        .fold(Complex::<T>::zero(), |acc, (x, &b)| acc + x * cis_turns::<T>(-(b * az)));
                    let power = val.norm_sqr();
                    if best.is_none_or(|(p, _, _)| power > p) {
                        best = Some((power, val, (tau, az, nu)));
                    }
                }
            }
        }
        if let Some((_, val, (tau, az, nu))) = best {
            let d = &mut dets[l];
            d.delay = wrap(tau, pri);
            d.sine_azimuth = az;
            let span = T::one() / pri;
            d.doppler = wrap(nu + span / T::lit(2.0), span) - span / T::lit(2.0);
            d.amplitude = val / (norm * gamma);
        }
        add(&mut fit, &dets[l].clone(), T::one());
    }
    Ok(RecoveryResult {
        detections: dets,
        residuals: result.residuals.clone(),
    })
}

fn wrap<T: Real>(x: T, period: T) -> T {
    x - (x / period).floor() * period
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{build_array, ArrayMode};
    use crate::params::RadarParams;
    use crate::recovery::{build_dictionaries, doppler_focus, recover, RecoveryOptions};
    use crate::scene::{Target, TargetScene};
    use crate::spectrum::{CognitiveSpectrum, TxPlan};
    use crate::synthesis::synthesize;

    #[test]
    fn off_grid_target_moves_toward_truth() {
        let p = RadarParams::<f64>::new(2, 4, 1e-6, 8, 16e6, 10e9).unwrap();
        let a = build_array(&p, ArrayMode::Mode2, 3).unwrap();
        let plan = TxPlan::fdm(&p, &a);
        let spec = CognitiveSpectrum::full(p.bandwidth, p.pri).unwrap();
        let d = build_dictionaries(&p, &a, &plan, spec.kappa()).unwrap();
        let g = d.grid;
        let (delay, az, dop) = g.to_physical_frac(7.3, 5.25, 2.5);
        let truth = Target {
            amplitude: Complex::new(0.8, 0.6),
            delay,
            sine_azimuth: az,
            doppler: dop,
        };
        let y = synthesize(&TargetScene::new(vec![truth]), &a, &plan, &spec, &p).unwrap();
        let coarse = recover(&doppler_focus(&y), &d, &RecoveryOptions::targets(1)).unwrap();
        let fine = refine(&coarse, &y, &d, 4).unwrap();
        let (c, f) = (&coarse.detections[0], &fine.detections[0]);
        assert_eq!(c.cell, f.cell);
        assert!((f.delay - delay).abs() <= g.delay_cell() / 8.0 + 1e-15);
        assert!((f.doppler - dop).abs() <= g.doppler_cell() / 8.0 + 1e-9);
        assert!((f.sine_azimuth - az).abs() <= g.azimuth_cell() / 8.0 + 1e-12);
        assert!((f.amplitude - truth.amplitude).norm() < (c.amplitude - truth.amplitude).norm());
    }

    #[test]
    fn on_grid_target_stays_put() {
        let p = RadarParams::<f64>::new(2, 3, 1e-6, 4, 16e6, 10e9).unwrap();
        let a = build_array(&p, ArrayMode::Mode1, 0).unwrap();
        let plan = TxPlan::fdm(&p, &a);
        let spec = CognitiveSpectrum::full(p.bandwidth, p.pri).unwrap();
        let d = build_dictionaries(&p, &a, &plan, spec.kappa()).unwrap();
        let idx = crate::GridIndex::new(11, 4, 1);
        let t = d.grid.target_at(idx, Complex::new(1.0, 0.0)).unwrap();
        let y = synthesize(&TargetScene::new(vec![t]), &a, &plan, &spec, &p).unwrap();
        let coarse = recover(&doppler_focus(&y), &d, &RecoveryOptions::targets(1)).unwrap();
        let fine = refine(&coarse, &y, &d, 3).unwrap();
        let f = &fine.detections[0];
        assert!((f.delay - t.delay).abs() < 1e-15);
        assert!((f.sine_azimuth - t.sine_azimuth).abs() < 1e-12);
        assert!((f.doppler - t.doppler).abs() < 1e-6);
        assert!((f.amplitude - t.amplitude).norm() < 1e-9);
    }
}
