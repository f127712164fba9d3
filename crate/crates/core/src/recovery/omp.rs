//! Simultaneous orthogonal matching pursuit on the Doppler-focused tensor.
//!
//! The atom of cell `(s, r, u)` lives in Doppler bin `u` only and equals
//! `P B^m[:, r] ⊗ A^m[:, s]` for every transmitter `m`. Atoms in different
//! bins are orthogonal, so the least-squares refit on the support splits
//! into one small system per bin and only the bin that gained an atom has
//! to be refit and re-correlated.

use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::dictionary::Dictionaries;
use super::focus::FocusedTensor;
use super::{Combining, Detection, RecoveryOptions, RecoveryResult, StopRule};
use crate::error::{Error, Result};
use crate::linalg::{dot_conj, norm_sqr, solve_hermitian};
use crate::num::{cis_turns, Real};
use crate::scene::GridIndex;

/// Correlates one Doppler bin of data, laid out `(m, q, k)`, with every
/// `(r, s)` atom. Range correlation is an inverse FFT of length `T N` with
/// the coefficients placed at their κ positions.
pub(crate) struct Correlator<'a, T: Real> {
    dict: &'a Dictionaries<T>,
    fft: Arc<dyn Fft<T>>,
    /// Per transmitter, `exp(+j2π f_m pri s / (T N))` over range bins `s`.
    ramps: Vec<Vec<Complex<T>>>,
    /// Per transmitter, `conj(B^m)` row-major `(q, r)`.
    conj_b: Vec<Vec<Complex<T>>>,
}

impl<'a, T: Real> Correlator<'a, T> {
    pub(crate) fn new(dict: &'a Dictionaries<T>) -> Self {
        let tn = dict.grid.range_bins;
        let ra = dict.grid.azimuth_bins;
        let ramps = (0..dict.num_tx)
            .map(|m| {
                let step = dict.carrier_turns_per_bin(m);
                (0..tn).map(|s| cis_turns(step * T::from_count(s))).collect()
            })
            .collect();
        let conj_b = (0..dict.num_tx)
            .map(|m| {
                let mut v = Vec::with_capacity(dict.num_rx * ra);
                for q in 0..dict.num_rx {
                    v.extend((0..ra).map(|r| dict.azimuth_entry(m, q, r).conj()));
                }
                v
            })
            .collect();
        Self {
            dict,
            fft: FftPlanner::new().plan_fft_inverse(tn),
            ramps,
            conj_b,
        }
    }

    /// `corr_m[r, s] = <B^m[:, r] ⊗ A^m[:, s], data_m>`, row-major `(r, s)`.
    fn correlate_tx(&self, data: &[Complex<T>], m: usize, range: &mut [Complex<T>], out: &mut [Complex<T>]) {
        let d = self.dict;
        let (tn, ra, qq, kk) = (d.grid.range_bins, d.grid.azimuth_bins, d.num_rx, d.kappa.len());
        for q in 0..qq {
            let row = &mut range[q * tn..(q + 1) * tn];
            row.fill(Complex::zero());
            let src = &data[(m * qq + q) * kk..(m * qq + q + 1) * kk];
            for (&k, v) in d.kappa.iter().zip(src) {
                row[k % tn] = row[k % tn] + v;
            }
            self.fft.process(row);
            for (x, w) in row.iter_mut().zip(&self.ramps[m]) {
                *x = *x * w;
            }
        }
        out.fill(Complex::zero());
        let cb = &self.conj_b[m];
        for r in 0..ra {
            let dst = &mut out[r * tn..(r + 1) * tn];
            for q in 0..qq {
                let w = cb[q * ra + r];
                for (o, x) in dst.iter_mut().zip(&range[q * tn..(q + 1) * tn]) {
                    *o = *o + w * x;
                }
            }
        }
    }

    /// Selection objective over `(r, s)`, row-major.
    pub(crate) fn objective(&self, data: &[Complex<T>], combining: Combining) -> Vec<T> {
        let d = self.dict;
        let (tn, ra) = (d.grid.range_bins, d.grid.azimuth_bins);
        let mut range = vec![Complex::zero(); d.num_rx * tn];
        let mut corr = vec![Complex::zero(); ra * tn];
        match combining {
            Combining::PerTransmitter => {
                let mut obj = vec![T::zero(); ra * tn];
                for m in 0..d.num_tx {
                    self.correlate_tx(data, m, &mut range, &mut corr);
                    for (o, c) in obj.iter_mut().zip(&corr) {
                        *o = *o + c.norm_sqr();
                    }
                }
                obj
            }
            Combining::Coherent => {
                let mut acc = vec![Complex::zero(); ra * tn];
                for m in 0..d.num_tx {
                    self.correlate_tx(data, m, &mut range, &mut corr);
                    for (a, c) in acc.iter_mut().zip(&corr) {
                        *a = *a + c;
                    }
                }
                acc.iter().map(|c| c.norm_sqr()).collect()
            }
        }
    }
}

/// Focused-domain atom of `(s, r)` in any bin, laid out `(m, q, k)`.
pub(crate) fn atom<T: Real>(dict: &Dictionaries<T>, s: usize, r: usize) -> Vec<Complex<T>> {
    let p = T::from_count(dict.grid.doppler_bins);
    let mut g = Vec::with_capacity(dict.num_tx * dict.num_rx * dict.kappa.len());
    for m in 0..dict.num_tx {
        let a: Vec<Complex<T>> = (0..dict.kappa.len()).map(|k| dict.range_entry(m, k, s) * p).collect();
        for q in 0..dict.num_rx {
            let b = dict.azimuth_entry(m, q, r);
            g.extend(a.iter().map(|x| b * x));
        }
    }
    g
}

struct Bin<T> {
    data: Vec<Complex<T>>,
    residual: Vec<Complex<T>>,
    atoms: Vec<Vec<Complex<T>>>,
    /// Detection index of each atom.
    owners: Vec<usize>,
}

impl<T: Real> Bin<T> {
    /// Least squares on this bin's atoms; returns the coefficients.
    fn refit(&mut self) -> Result<Vec<Complex<T>>> {
        let n = self.atoms.len();
        let mut gram = vec![Complex::zero(); n * n];
        let mut rhs = vec![Complex::zero(); n];
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] = dot_conj(&self.atoms[i], &self.atoms[j]);
            }
            rhs[i] = dot_conj(&self.atoms[i], &self.data);
        }
        let coef = solve_hermitian(&gram, &rhs, n)?;
        self.residual.copy_from_slice(&self.data);
        for (c, a) in coef.iter().zip(&self.atoms) {
            for (r, x) in self.residual.iter_mut().zip(a) {
                *r = *r - c * x;
            }
        }
        Ok(coef)
    }
}

pub fn recover<T: Real>(
    focused: &FocusedTensor<T>,
    dict: &Dictionaries<T>,
    options: &RecoveryOptions<T>,
) -> Result<RecoveryResult<T>> {
    if focused.is_empty() {
        return Err(Error::Input("focused tensor is empty".into()));
    }
    if focused.num_tx != dict.num_tx
        || focused.num_rx != dict.num_rx
        || focused.kappa != dict.kappa
        || focused.bins != dict.grid.doppler_bins
    {
        return Err(Error::Input(
            "focused tensor does not match the dictionaries".into(),
        ));
    }
    let grid = &dict.grid;
    let (tn, ra, nbins) = (grid.range_bins, grid.azimuth_bins, grid.doppler_bins);
    let correlator = Correlator::new(dict);
    let mut bins: Vec<Bin<T>> = (0..nbins)
        .map(|u| {
            let data = focused.bin(u);
            Bin {
                residual: data.clone(),
                data,
                atoms: Vec::new(),
                owners: Vec::new(),
            }
        })
        .collect();
    let mut energy: Vec<T> = bins.iter().map(|b| norm_sqr(&b.residual)).collect();
    let mut objective: Vec<Vec<T>> = bins
        .par_iter()
        .map(|b| correlator.objective(&b.residual, options.combining))
        .collect();

    let initial = energy.iter().copied().sum::<T>().sqrt();
    let mut residuals = vec![initial];
    let mut cells: Vec<GridIndex> = Vec::new();
    let mut amplitudes: Vec<Complex<T>> = Vec::new();
    let mut taken: HashSet<GridIndex> = HashSet::new();

    loop {
        let current = *residuals.last().unwrap();
        let more = match options.stop {
            StopRule::Targets(l) => cells.len() < l,
            StopRule::Residual {
                ratio,
                max_iterations,
            } => cells.len() < max_iterations && initial > T::zero() && current / initial >= ratio,
        };
        if !more || cells.len() == grid.len() {
            break;
        }
        // Strictly greater wins, so ties go to the lowest (u, r, s).
        let mut best: Option<(T, GridIndex)> = None;
        for (u, obj) in objective.iter().enumerate() {
            for (i, &v) in obj.iter().enumerate() {
                if best.is_none_or(|(b, _)| v > b) {
                    let idx = GridIndex::new(i % tn, i / tn, u);
                    if !taken.contains(&idx) {
                        best = Some((v, idx));
                    }
                }
            }
        }
        let Some((value, idx)) = best else { break };
        if matches!(options.stop, StopRule::Residual { .. }) && !(value > T::zero()) {
            break;
        }
        taken.insert(idx);
        let u = idx.doppler;
        let bin = &mut bins[u];
        bin.atoms.push(atom(dict, idx.range, idx.azimuth));
        bin.owners.push(cells.len());
        cells.push(idx);
        amplitudes.push(Complex::zero());
        let coef = bin.refit()?;
        for (&owner, c) in bin.owners.iter().zip(&coef) {
            amplitudes[owner] = *c;
        }
        energy[u] = norm_sqr(&bin.residual);
        objective[u] = correlator.objective(&bin.residual, options.combining);
        residuals.push(energy.iter().copied().sum::<T>().sqrt());
    }

    let gamma = focused.gamma;
    let detections = cells
        .iter()
        .zip(&amplitudes)
        .enumerate()
        .map(|(i, (&cell, &a))| {
            let (delay, sine_azimuth, doppler) = grid.to_physical(cell)?;
            Ok(Detection {
                cell,
                amplitude: a / gamma,
                delay,
                sine_azimuth,
                doppler,
                iteration: i + 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(ra > 0);
    Ok(RecoveryResult {
        detections,
        residuals,
    })
}
