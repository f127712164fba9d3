//! Fourier-coefficient echoes of a point-target scene, plus receiver noise.
//!
//! Entry `(m, q, p, k)` of a tensor is
//!
//! ```text
//! gamma * sum_l alpha_l exp(j2π beta_mq sin_l) exp(-j2π kappa_k tau_l / pri)
//!                       exp(-j2π f_m tau_l) exp(j2π fD_l p pri)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::array::{compute_beta, ArrayConfig};
use crate::error::{Error, Result};
use crate::num::{cis_turns, Real};
use crate::params::RadarParams;
use crate::scene::TargetScene;
use crate::spectrum::{CognitiveSpectrum, TxPlan};

const MAGIC: &[u8; 4] = b"XMCT";
const FORMAT_VERSION: u32 = 1;

/// Coefficients indexed `(m, q, p, k)`, row-major, `k` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor<T> {
    pub num_tx: usize,
    pub num_rx: usize,
    pub pulses: usize,
    pub kappa: Vec<usize>,
    /// In-band amplitude scale the tensor was synthesized with.
    pub gamma: T,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> CoefficientTensor<T> {
    pub fn zeros(num_tx: usize, num_rx: usize, pulses: usize, kappa: Vec<usize>, gamma: T) -> Self {
        let len = num_tx * num_rx * pulses * kappa.len();
        Self {
            num_tx,
            num_rx,
            pulses,
            kappa,
            gamma,
            data: vec![Complex::zero(); len],
        }
    }

    pub fn num_coefficients(&self) -> usize {
        self.kappa.len()
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.num_tx, self.num_rx, self.pulses, self.kappa.len())
    }

    #[inline]
    pub fn offset(&self, m: usize, q: usize, p: usize, k: usize) -> usize {
        ((m * self.num_rx + q) * self.pulses + p) * self.kappa.len() + k
    }

    #[inline]
    pub fn get(&self, m: usize, q: usize, p: usize, k: usize) -> Complex<T> {
        self.data[self.offset(m, q, p, k)]
    }

    /// Mean `|y|^2` over all entries.
    pub fn mean_power(&self) -> T {
        if self.data.is_empty() {
            return T::zero();
        }
        self.data.iter().map(|v| v.norm_sqr()).sum::<T>() / T::from_count(self.data.len())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = *v * c);
        out
    }

    fn check_shape(&self) -> Result<()> {
        if self.data.len() != self.num_tx * self.num_rx * self.pulses * self.kappa.len() {
            return Err(Error::Input("tensor payload does not match its dimensions".into()));
        }
        Ok(())
    }

    /// Little-endian binary layout: magic, version, scalar width in bytes,
    /// `M Q P K` as u64, gamma as f64, κ as u64, then `(re, im)` pairs at
    /// the scalar width.
    pub fn to_bytes(&self) -> Vec<u8> {
        let width = std::mem::size_of::<T>() as u8;
        let mut out = Vec::with_capacity(64 + 8 * self.kappa.len() + 2 * width as usize * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(width);
        for d in [self.num_tx, self.num_rx, self.pulses, self.kappa.len()] {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.gamma.to_f64_lossy().to_le_bytes());
        for &k in &self.kappa {
            out.extend_from_slice(&(k as u64).to_le_bytes());
        }
        for v in &self.data {
            for x in [v.re, v.im] {
                if width == 4 {
                    out.extend_from_slice(&x.to_f32().unwrap_or(f32::NAN).to_le_bytes());
                } else {
                    out.extend_from_slice(&x.to_f64_lossy().to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Parse("not a coefficient tensor file".into()));
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported tensor format version {version}")));
        }
        let width = cur.take(1)?[0];
        if width != 4 && width != 8 {
            return Err(Error::Parse(format!("unsupported scalar width {width}")));
        }
        let mut dims = [0usize; 4];
        for d in &mut dims {
            *d = cur.u64()? as usize;
        }
        let gamma = T::lit(f64::from_le_bytes(cur.take(8)?.try_into().unwrap()));
        let kappa = (0..dims[3]).map(|_| cur.u64().map(|k| k as usize)).collect::<Result<Vec<_>>>()?;
        let len = dims[0]
            .checked_mul(dims[1])
            .and_then(|x| x.checked_mul(dims[2]))
            .and_then(|x| x.checked_mul(dims[3]))
            .ok_or_else(|| Error::Parse("tensor dimensions overflow".into()))?;
        if bytes.len() - cur.pos != len * 2 * width as usize {
            return Err(Error::Parse("tensor payload length mismatch".into()));
        }
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let mut part = [T::zero(); 2];
            for x in &mut part {
                *x = if width == 4 {
                    T::lit(f32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as f64)
                } else {
                    T::lit(f64::from_le_bytes(cur.take(8)?.try_into().unwrap()))
                };
            }
            data.push(Complex::new(part[0], part[1]));
        }
        Ok(Self {
            num_tx: dims[0],
            num_rx: dims[1],
            pulses: dims[2],
            kappa,
            gamma,
            data,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// One `m q p kappa re im` line per entry; meant for small tensors.
    pub fn to_text(&self) -> String {
        let mut out = String::from("m q p kappa re im\n");
        for m in 0..self.num_tx {
            for q in 0..self.num_rx {
                for p in 0..self.pulses {
                    for (k, &kk) in self.kappa.iter().enumerate() {
                        let v = self.get(m, q, p, k);
                        out.push_str(&format!("{m} {q} {p} {kk} {} {}\n", v.re, v.im));
                    }
                }
            }
        }
        out
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Parse("truncated tensor file".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Noise-free coefficients of `scene` as seen by `array` under `plan`.
pub fn synthesize<T: Real>(
    scene: &TargetScene<T>,
    array: &ArrayConfig<T>,
    plan: &TxPlan<T>,
    spectrum: &CognitiveSpectrum<T>,
    params: &RadarParams<T>,
) -> Result<CoefficientTensor<T>> {
    if plan.len() != array.num_tx() {
        return Err(Error::Config(format!(
            "{} carriers for {} transmitters",
            plan.len(),
            array.num_tx()
        )));
    }
    scene.check(params)?;
    let (mm, qq, pp) = (array.num_tx(), array.num_rx(), params.pulses);
    let kappa = spectrum.kappa();
    let kk = kappa.len();
    let mut out = CoefficientTensor::zeros(mm, qq, pp, kappa.to_vec(), spectrum.gamma());
    if scene.is_empty() {
        return Ok(out);
    }
    let gamma = spectrum.gamma();
    let pri = params.pri;

    // Per-target factors that do not depend on the receiver.
    struct Factors<T> {
        // (m, k): range and carrier phase, already scaled by gamma * alpha.
        range: Vec<Complex<T>>,
        doppler: Vec<Complex<T>>,
    }
    let factors: Vec<Factors<T>> = scene
        .targets
        .iter()
        .map(|t| {
            let frac = t.delay / pri;
            let mut range = Vec::with_capacity(mm * kk);
            for &f_m in &plan.offsets {
                let carrier = cis_turns(-(f_m * t.delay));
                for &k in kappa {
                    range.push(t.amplitude * gamma * carrier * cis_turns(-(T::from_count(k) * frac)));
                }
            }
            let doppler = (0..pp)
                .map(|p| cis_turns(t.doppler * T::from_count(p) * pri))
                .collect();
            Factors { range, doppler }
        })
        .collect();

    out.data
        .par_chunks_mut(pp * kk)
        .enumerate()
        .for_each(|(mq, block)| {
            let (m, q) = (mq / qq, mq % qq);
            let beta = compute_beta(array.tx[m], array.rx[q], plan.offsets[m], params);
            for (t, f) in scene.targets.iter().zip(&factors) {
                let spatial = cis_turns(beta * t.sine_azimuth);
                let row = &f.range[m * kk..(m + 1) * kk];
                for (p, chunk) in block.chunks_mut(kk).enumerate() {
                    let sd = spatial * f.doppler[p];
                    for (y, r) in chunk.iter_mut().zip(row) {
                        *y = *y + sd * r;
                    }
                }
            }
        });
    Ok(out)
}

/// Receiver noise settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T> {
    /// Per-coefficient SNR in dB; `+inf` disables noise.
    pub snr_db: T,
    pub seed: u64,
    /// Extra noise power folded in from out-of-band noise, in dB.
    pub folding_loss_db: T,
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(snr_db: T, seed: u64) -> Self {
        Self {
            snr_db,
            seed,
            folding_loss_db: T::zero(),
        }
    }

    pub fn noiseless() -> Self {
        Self::new(T::infinity(), 0)
    }
}

/// Adds circular complex Gaussian noise.
///
/// The reference signal power is the mean coefficient power of the clean
/// tensor with the cognitive scale divided out (`mean |y|^2 / gamma^2`).
/// Noise therefore stays put when the same total transmit power is
/// concentrated into fewer subbands, and the in-band gain shows up as SNR.
pub fn add_noise<T: Real>(tensor: &CoefficientTensor<T>, noise: &NoiseSpec<T>) -> Result<CoefficientTensor<T>> {
    if noise.snr_db.is_infinite() && noise.snr_db > T::zero() {
        return Ok(tensor.clone());
    }
    if !noise.snr_db.is_finite() {
        return Err(Error::Input(format!("invalid SNR {} dB", noise.snr_db)));
    }
    tensor.check_shape()?;
    if tensor.data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Input("tensor has non-finite entries".into()));
    }
    let reference = tensor.mean_power() / (tensor.gamma * tensor.gamma);
    if !(reference > T::zero()) {
        return Err(Error::UndefinedSnr);
    }
    let ten = T::lit(10.0);
    let variance = reference * ten.powf((noise.folding_loss_db - noise.snr_db) / ten);
    let sigma = (variance / T::lit(2.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut out = tensor.clone();
    for v in &mut out.data {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *v = *v + Complex::new(T::lit(re), T::lit(im)) * sigma;
    }
    Ok(out)
}
