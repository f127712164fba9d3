//! Target recovery: dictionaries, Doppler focusing, sparse recovery on the
//! grid and optional off-grid refinement.

mod dictionary;
mod focus;
mod omp;
mod refine;

use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::params::RadarParams;
use crate::scene::{Grid, GridIndex};
use crate::synthesis::CoefficientTensor;

pub use dictionary::{build_dictionaries, Dictionaries};
pub use focus::{doppler_focus, focus_at, FocusedTensor};
pub use omp::recover;
pub use refine::refine;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule<T> {
    /// Exactly this many detections (fewer only if the grid runs out).
    Targets(usize),
    /// Stop once `||residual|| / ||data||` drops below `ratio`.
    Residual { ratio: T, max_iterations: usize },
}

/// How correlations of different transmitters are merged when picking the
/// next cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combining {
    /// `sum_m |<atom_m, residual_m>|^2`.
    PerTransmitter,
    /// `|sum_m <atom_m, residual_m>|^2`, the matched statistic when the
    /// amplitude is shared by all transmitters.
    #[default]
    Coherent,
}

impl std::str::FromStr for Combining {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-transmitter" | "per_transmitter" => Ok(Self::PerTransmitter),
            "coherent" => Ok(Self::Coherent),
            _ => Err(Error::Parse(format!("unknown combining rule {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions<T> {
    pub stop: StopRule<T>,
    #[serde(default)]
    pub combining: Combining,
}

impl<T: Real> RecoveryOptions<T> {
    pub fn targets(count: usize) -> Self {
        Self {
            stop: StopRule::Targets(count),
            combining: Combining::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<T> {
    pub cell: GridIndex,
    pub amplitude: Complex<T>,
    pub delay: T,
    pub sine_azimuth: T,
    pub doppler: T,
    /// 1-based iteration that selected the cell.
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult<T> {
    pub detections: Vec<Detection<T>>,
    /// Residual norm before the first iteration and after each one.
    pub residuals: Vec<T>,
}

const CSV_HEADER: &str = "s,r,u,alpha_re,alpha_im,range_m,sine_azimuth,velocity_mps,iteration";

impl<T: Real> RecoveryResult<T> {
    pub fn support(&self) -> Vec<GridIndex> {
        self.detections.iter().map(|d| d.cell).collect()
    }

    pub fn to_csv(&self, params: &RadarParams<T>) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for d in &self.detections {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                d.cell.range,
                d.cell.azimuth,
                d.cell.doppler,
                d.amplitude.re,
                d.amplitude.im,
                params.range_from_delay(d.delay),
                d.sine_azimuth,
                params.velocity_from_doppler(d.doppler),
                d.iteration
            );
        }
        out
    }

    /// Parses detections written by [`RecoveryResult::to_csv`]. Residuals are
    /// not part of the file and come back empty.
    pub fn from_csv(text: &str, params: &RadarParams<T>) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => return Err(Error::Parse(format!("bad detection header {other:?}"))),
        }
        let mut detections = Vec::new();
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 9 {
                return Err(Error::Parse(format!("row {}: expected 9 fields, got {}", n + 1, f.len())));
            }
            let int = |i: usize| {
                f[i].parse::<usize>()
                    .map_err(|e| Error::Parse(format!("row {}: {}: {e}", n + 1, f[i])))
            };
            let real = |i: usize| {
                f[i].parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Parse(format!("row {}: {}: {e}", n + 1, f[i])))
            };
            detections.push(Detection {
                cell: GridIndex::new(int(0)?, int(1)?, int(2)?),
                amplitude: Complex::new(real(3)?, real(4)?),
                delay: params.delay_from_range(real(5)?),
                sine_azimuth: real(6)?,
                doppler: params.doppler_from_velocity(real(7)?),
                iteration: int(8)?,
            });
        }
        Ok(Self {
            detections,
            residuals: Vec::new(),
        })
    }
}

/// `(delay, sine_azimuth, doppler)` of each support cell.
pub fn estimate_parameters<T: Real>(support: &[GridIndex], grid: &Grid<T>) -> Result<Vec<(T, T, T)>> {
    support.iter().map(|&i| grid.to_physical(i)).collect()
}

/// Focuses `tensor` and runs [`recover`] on it.
pub fn recover_tensor<T: Real>(
    tensor: &CoefficientTensor<T>,
    dict: &Dictionaries<T>,
    options: &RecoveryOptions<T>,
) -> Result<RecoveryResult<T>> {
    recover(&doppler_focus(tensor), dict, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let p = RadarParams::<f64>::desk();
        let r = RecoveryResult {
            detections: vec![Detection {
                cell: GridIndex::new(3, 7, 9),
                amplitude: Complex::new(0.25, -1.5),
                delay: 2e-6,
                sine_azimuth: -0.3,
                doppler: 120.0,
                iteration: 1,
            }],
            residuals: vec![1.0, 0.0],
        };
        let back = RecoveryResult::from_csv(&r.to_csv(&p), &p).unwrap();
        let (a, b) = (&r.detections[0], &back.detections[0]);
        assert_eq!(a.cell, b.cell);
        assert_eq!(a.amplitude, b.amplitude);
        assert!((a.delay - b.delay).abs() < 1e-18);
        assert!((a.doppler - b.doppler).abs() < 1e-9);
        assert!(RecoveryResult::<f64>::from_csv("x,y\n", &p).is_err());
    }

    #[test]
    fn estimates_follow_grid() {
        let p = RadarParams::<f64>::desk();
        let g = Grid::reference(&p);
        let est = estimate_parameters(&[GridIndex::new(0, 0, 0)], &g).unwrap();
        assert_eq!(est[0].0, 0.0);
        assert_eq!(est[0].1, -1.0);
        assert!((est[0].2 + 0.5 / p.pri).abs() < 1e-9);
        assert!(estimate_parameters(&[GridIndex::new(usize::MAX, 0, 0)], &g).is_err());
    }
}
