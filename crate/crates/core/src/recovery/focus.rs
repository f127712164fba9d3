use num_complex::Complex;
use num_traits::Zero;
use rustfft::FftPlanner;

use crate::num::{cis_turns, Real};
use crate::synthesis::CoefficientTensor;

/// Doppler-focused coefficients `Phi[m, q, u, k]`, `k` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FocusedTensor<T> {
    pub num_tx: usize,
    pub num_rx: usize,
    pub bins: usize,
    pub kappa: Vec<usize>,
    pub gamma: T,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> FocusedTensor<T> {
    #[inline]
    pub fn offset(&self, m: usize, q: usize, u: usize, k: usize) -> usize {
        ((m * self.num_rx + q) * self.bins + u) * self.kappa.len() + k
    }

    #[inline]
    pub fn get(&self, m: usize, q: usize, u: usize, k: usize) -> Complex<T> {
        self.data[self.offset(m, q, u, k)]
    }

    /// All `(m, q, k)` entries of bin `u`, laid out `(m, q, k)`.
    pub fn bin(&self, u: usize) -> Vec<Complex<T>> {
        let kk = self.kappa.len();
        let mut out = Vec::with_capacity(self.num_tx * self.num_rx * kk);
        for mq in 0..self.num_tx * self.num_rx {
            let start = (mq * self.bins + u) * kk;
            out.extend_from_slice(&self.data[start..start + kk]);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// `Phi_u[k] = sum_p y_p[k] exp(-j2π nu_u p pri)` at `nu_u = -1/(2 pri) +
/// u/(P pri)`. The `-1/(2 pri)` offset is a `(-1)^p` sign on the input,
/// the rest is a forward FFT over pulses.
pub fn doppler_focus<T: Real>(tensor: &CoefficientTensor<T>) -> FocusedTensor<T> {
    let (mm, qq, pp, kk) = tensor.dims();
    let mut out = FocusedTensor {
        num_tx: mm,
        num_rx: qq,
        bins: pp,
        kappa: tensor.kappa.clone(),
        gamma: tensor.gamma,
        data: vec![Complex::zero(); tensor.data.len()],
    };
    if tensor.data.is_empty() {
        return out;
    }
    let fft = FftPlanner::new().plan_fft_forward(pp);
    let mut buf = vec![Complex::zero(); pp];
    for mq in 0..mm * qq {
        let base = mq * pp * kk;
        for k in 0..kk {
            for (p, b) in buf.iter_mut().enumerate() {
                let v = tensor.data[base + p * kk + k];
                *b = if p % 2 == 0 { v } else { -v };
            }
            fft.process(&mut buf);
            for (u, b) in buf.iter().enumerate() {
                out.data[base + u * kk + k] = *b;
            }
        }
    }
    out
}

/// Focuses at one arbitrary frequency `nu` (Hz); returns `(m, q, k)`.
pub fn focus_at<T: Real>(tensor: &CoefficientTensor<T>, nu: T, pri: T) -> Vec<Complex<T>> {
    let (mm, qq, pp, kk) = tensor.dims();
    let w: Vec<Complex<T>> = (0..pp).map(|p| cis_turns(-(nu * T::from_count(p) * pri))).collect();
    let mut out = vec![Complex::zero(); mm * qq * kk];
    for mq in 0..mm * qq {
        for (p, wp) in w.iter().enumerate() {
            let row = &tensor.data[(mq * pp + p) * kk..(mq * pp + p + 1) * kk];
            for (o, y) in out[mq * kk..(mq + 1) * kk].iter_mut().zip(row) {
                *o = *o + y * wp;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(mm: usize, qq: usize, pp: usize, kk: usize, seed: u64) -> CoefficientTensor<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = CoefficientTensor::zeros(mm, qq, pp, (0..kk).collect(), 1.0);
        for v in &mut t.data {
            *v = Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        t
    }

    #[test]
    fn single_pulse_is_identity() {
        let t = random_tensor(2, 3, 1, 5, 1);
        assert_eq!(doppler_focus(&t).data, t.data);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let pri = 1e-4;
        let pp = 16;
        let t = random_tensor(2, 2, pp, 3, 2);
        let f = doppler_focus(&t);
        for u in 0..pp {
            let nu = -0.5 / pri + u as f64 / (pp as f64 * pri);
            let direct = focus_at(&t, nu, pri);
            for m in 0..2 {
                for q in 0..2 {
                    for k in 0..3 {
                        let mut s = Complex::new(0.0, 0.0);
                        for p in 0..pp {
                            s += t.get(m, q, p, k)
                                * Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * nu * p as f64 * pri);
                        }
                        assert!((f.get(m, q, u, k) - s).norm() <= 1e-9 * s.norm().max(1.0));
                        assert!((direct[(m * 2 + q) * 3 + k] - s).norm() <= 1e-9 * s.norm().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn parseval_along_pulses() {
        let t = random_tensor(2, 3, 8, 4, 3);
        let f = doppler_focus(&t);
        let a: f64 = t.data.iter().map(|v| v.norm_sqr()).sum();
        let b: f64 = f.data.iter().map(|v| v.norm_sqr()).sum();
        assert!((b / (8.0 * a) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn on_grid_doppler_gains_p() {
        let pri = 1e-4;
        let pp = 10;
        let u0 = 7;
        let fd = -0.5 / pri + u0 as f64 / (pp as f64 * pri);
        let mut t = CoefficientTensor::zeros(1, 1, pp, vec![0], 1.0);
        for p in 0..pp {
            t.data[p] = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * fd * p as f64 * pri);
        }
        let f = doppler_focus(&t);
        for u in 0..pp {
            let want = if u == u0 { pp as f64 } else { 0.0 };
            assert!((f.get(0, 0, u, 0).norm() - want).abs() < 1e-9);
        }
    }
}
