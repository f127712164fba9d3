//! Transmit spectrum: FDM carrier plan, cognitive subbands, the sampled
//! coefficient set κ, the foldable-subsampling alias map and coherence
//! diagnostics.
//!
//! Coefficient `k` sits at frequency `k / pri` inside the per-transmitter
//! band `[0, bandwidth)`. A band `[start, stop]` owns every `k` with
//! `start <= k / pri <= stop` (closed on both ends), so a 370 kHz band at a
//! 100 us PRI holds 38 coefficients.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::error::{Error, Result};
use crate::linalg::{dot_conj, norm_sqr, CMatrix};
use crate::num::Real;
use crate::params::RadarParams;

/// Relative slack when deciding whether `k / pri` lies on a band edge.
const EDGE_SLACK: f64 = 1e-9;

/// At most this many colliding pairs are listed in an alias error.
const MAX_REPORTED_COLLISIONS: usize = 8;

/// Subband edges of the X-band prototype's cognitive waveform, in Hz, for a
/// 15 MHz per-transmitter slot.
pub const REFERENCE_BANDS_HZ: [(f64, f64); 8] = [
    (1.63e6, 2.00e6),
    (2.16e6, 2.53e6),
    (3.05e6, 3.42e6),
    (3.88e6, 4.25e6),
    (5.66e6, 6.03e6),
    (6.51e6, 6.88e6),
    (8.64e6, 9.01e6),
    (12.32e6, 12.69e6),
];

const REFERENCE_SLOT_HZ: f64 = 15e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band<T> {
    pub start: T,
    pub stop: T,
}

impl<T: Real> Band<T> {
    pub fn new(start: T, stop: T) -> Self {
        Self { start, stop }
    }

    pub fn width(&self) -> T {
        self.stop - self.start
    }
}

/// The reference subbands rescaled to a slot of `bandwidth` Hz.
pub fn reference_bands<T: Real>(bandwidth: T) -> Vec<Band<T>> {
    let scale = bandwidth / T::lit(REFERENCE_SLOT_HZ);
    REFERENCE_BANDS_HZ
        .iter()
        .map(|&(a, b)| Band::new(T::lit(a) * scale, T::lit(b) * scale))
        .collect()
}

/// Transmit subbands, in-band amplitude scale and the induced κ.
#[derive(Debug, Clone, PartialEq)]
pub struct CognitiveSpectrum<T> {
    bandwidth: T,
    bands: Vec<Band<T>>,
    gamma: T,
    kappa: Vec<usize>,
}

impl<T: Real> CognitiveSpectrum<T> {
    /// Validates `bands` and sets `gamma = sqrt(bandwidth / sum |B_i|)`, so
    /// the total transmit power of a flat spectrum is unchanged when it is
    /// squeezed into the subbands.
    pub fn build(bandwidth: T, bands: Vec<Band<T>>, pri: T) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::Spectrum("no subbands given".into()));
        }
        if !(bandwidth > T::zero()) || !(pri > T::zero()) {
            return Err(Error::Spectrum("bandwidth and pri must be positive".into()));
        }
        for b in &bands {
            if !(b.start >= T::zero()) || !(b.stop > b.start) {
                return Err(Error::Spectrum(format!(
                    "band [{}, {}] Hz is empty or negative",
                    b.start, b.stop
                )));
            }
            if b.stop > bandwidth * (T::one() + T::lit(EDGE_SLACK)) {
                return Err(Error::Spectrum(format!(
                    "band [{}, {}] Hz exceeds the {} Hz slot",
                    b.start, b.stop, bandwidth
                )));
            }
        }
        let mut order: Vec<usize> = (0..bands.len()).collect();
        order.sort_by(|&a, &b| bands[a].start.partial_cmp(&bands[b].start).unwrap());
        for w in order.windows(2) {
            let (lo, hi) = (&bands[w[0]], &bands[w[1]]);
            if hi.start < lo.stop {
                return Err(Error::Spectrum(format!(
                    "bands [{}, {}] and [{}, {}] Hz overlap",
                    lo.start, lo.stop, hi.start, hi.stop
                )));
            }
        }
        let kappa = kappa_of(bandwidth, &bands, pri)?;
        let occupied: T = bands.iter().map(Band::width).sum();
        Ok(Self {
            bandwidth,
            bands,
            gamma: (bandwidth / occupied).sqrt(),
            kappa,
        })
    }

    /// The whole slot as one band: every coefficient, `gamma = 1`.
    pub fn full(bandwidth: T, pri: T) -> Result<Self> {
        Self::build(bandwidth, vec![Band::new(T::zero(), bandwidth)], pri)
    }

    /// The reference subbands scaled to the slot in `params`.
    pub fn reference(params: &RadarParams<T>) -> Result<Self> {
        Self::build(params.bandwidth, reference_bands(params.bandwidth), params.pri)
    }

    /// Same sampled κ, but the transmitter fills the whole slot: `gamma = 1`.
    /// This is a sub-Nyquist receiver behind a conventional transmitter.
    pub fn non_cognitive(&self) -> Self {
        Self {
            gamma: T::one(),
            ..self.clone()
        }
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn bands(&self) -> &[Band<T>] {
        &self.bands
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn kappa(&self) -> &[usize] {
        &self.kappa
    }

    /// Sum of band widths in Hz.
    pub fn occupied_bandwidth(&self) -> T {
        self.bands.iter().map(Band::width).sum()
    }
}

/// Sorted coefficient indices whose frequency falls inside a band.
pub fn coefficient_set<T: Real>(spectrum: &CognitiveSpectrum<T>, pri: T) -> Result<Vec<usize>> {
    kappa_of(spectrum.bandwidth, &spectrum.bands, pri)
}

fn kappa_of<T: Real>(bandwidth: T, bands: &[Band<T>], pri: T) -> Result<Vec<usize>> {
    let n = (bandwidth * pri).round().to_usize().unwrap_or(0);
    let slack = T::lit(EDGE_SLACK);
    let mut kappa = Vec::new();
    for b in bands {
        let lo = (b.start * pri * (T::one() - slack)).ceil().max(T::zero());
        let hi = (b.stop * pri * (T::one() + slack)).floor();
        if hi < lo {
            continue;
        }
        let (lo, hi) = (lo.to_usize().unwrap_or(0), hi.to_usize().unwrap_or(0));
        kappa.extend((lo..=hi).filter(|&k| k < n));
    }
    kappa.sort_unstable();
    if let Some(w) = kappa.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Spectrum(format!(
            "coefficient {} belongs to two bands",
            w[0]
        )));
    }
    if kappa.is_empty() {
        return Err(Error::Spectrum("bands contain no coefficient".into()));
    }
    Ok(kappa)
}

/// Per-transmitter carrier offsets `f_m = slot_m * bandwidth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TxPlan<T> {
    pub offsets: Vec<T>,
    /// Unused part of each slot, in Hz. Reporting only.
    pub guard: T,
}

impl<T: Real> TxPlan<T> {
    pub fn fdm(params: &RadarParams<T>, array: &ArrayConfig<T>) -> Self {
        Self {
            offsets: array
                .slots
                .iter()
                .map(|&s| T::from_count(s) * params.bandwidth)
                .collect(),
            guard: T::zero(),
        }
    }

    pub fn with_guard(mut self, guard: T) -> Self {
        self.guard = guard;
        self
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn check(&self, bandwidth: T) -> Result<()> {
        for w in self.offsets.windows(2) {
            if !(w[1] - w[0] >= bandwidth * (T::one() - T::lit(EDGE_SLACK))) {
                return Err(Error::Config(format!(
                    "carriers {} and {} Hz are closer than the {} Hz slot",
                    w[0], w[1], bandwidth
                )));
            }
        }
        Ok(())
    }
}

/// Where each sampled coefficient lands after sampling at `f_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasMap<T> {
    /// Nyquist rate of the slot over the sampling rate, `2 N / (pri f_s)`.
    pub q_factor: T,
    pub modulus: usize,
    /// `kappa[i] mod modulus`, in κ order.
    pub folded: Vec<usize>,
}

impl<T: Real> AliasMap<T> {
    /// Maximal runs of consecutive folded indices, as inclusive pairs.
    pub fn folded_intervals(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &f in &self.folded {
            match out.last_mut() {
                Some((_, end)) if *end + 1 == f => *end = f,
                _ => out.push((f, f)),
            }
        }
        out
    }
}

/// Folds κ modulo `N_s = round(f_s pri)` and rejects any collision.
pub fn alias_map<T: Real>(kappa: &[usize], n: usize, f_s: T, pri: T) -> Result<AliasMap<T>> {
    let ns = (f_s * pri).round();
    if !(ns >= T::one()) {
        return Err(Error::Spectrum(format!(
            "sampling rate {f_s} Hz gives fewer than one bin per pri"
        )));
    }
    let modulus = ns.to_usize().unwrap();
    let folded: Vec<usize> = kappa.iter().map(|k| k % modulus).collect();
    let mut owner = vec![usize::MAX; modulus];
    let mut pairs = Vec::new();
    for (i, &f) in folded.iter().enumerate() {
        if owner[f] == usize::MAX {
            owner[f] = i;
        } else if pairs.len() < MAX_REPORTED_COLLISIONS {
            pairs.push((kappa[owner[f]], kappa[i]));
        } else {
            break;
        }
    }
    if !pairs.is_empty() {
        return Err(Error::AliasCollision { modulus, pairs });
    }
    Ok(AliasMap {
        q_factor: T::lit(2.0) * T::from_count(n) / (f_s * pri),
        modulus,
        folded,
    })
}

/// Largest normalized inner product between two distinct columns.
pub fn mutual_coherence<T: Real>(dict: &CMatrix<T>) -> Result<T> {
    if dict.cols() < 2 {
        return Err(Error::Input("coherence needs at least two columns".into()));
    }
    let norms: Vec<T> = (0..dict.cols())
        .map(|c| norm_sqr(dict.col(c)).sqrt())
        .collect();
    if let Some(c) = norms.iter().position(|n| !(*n > T::zero())) {
        return Err(Error::DegenerateDictionary(c));
    }
    let mut best = T::zero();
    for i in 0..dict.cols() {
        for j in i + 1..dict.cols() {
            let g = dot_conj(dict.col(i), dict.col(j)).norm() / (norms[i] * norms[j]);
            best = best.max(g);
        }
    }
    Ok(best.min(T::one()))
}

/// Coherence of the partial Fourier dictionary with entries
/// `exp(-j 2π kappa_k n / len)` over the columns `n = 0, stride, 2 stride, ..`
/// below `len`. Column-wise unit-modulus ramps (such as a carrier offset)
/// do not change it. One FFT replaces the pairwise loop: the inner product
/// of columns `n1`, `n2` depends on `n1 - n2` only.
pub fn fourier_coherence<T: Real>(kappa: &[usize], len: usize, stride: usize) -> Result<T> {
    if kappa.is_empty() || stride == 0 || len < 2 * stride {
        return Err(Error::Input(
            "need a non-empty kappa and at least two columns".into(),
        ));
    }
    let mut buf = vec![Complex::<T>::new(T::zero(), T::zero()); len];
    for &k in kappa {
        buf[k % len].re = buf[k % len].re + T::one();
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let k = T::from_count(kappa.len());
    let best = (1..)
        .map(|j| j * stride)
        .take_while(|&d| d < len)
        .map(|d| buf[d].norm() / k)
        .fold(T::zero(), T::max);
    Ok(best.min(T::one()))
}
