use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::params::RadarParams;
use crate::recovery::RecoveryResult;
use crate::scene::TargetScene;

pub const PPI_HEADER: &str = "label,index,east_m,north_m";
pub const RAD_HEADER: &str = "label,index,x_m,y_m,velocity_mps";

/// One plotted point; `label` is `truth` or `estimate`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapRow {
    pub label: String,
    pub index: usize,
    pub east_m: f64,
    pub north_m: f64,
    pub velocity_mps: f64,
}

/// Broadside is north: `east = r sin(theta)`, `north = r cos(theta)`.
fn position<T: Real>(range: T, sine_azimuth: T) -> (f64, f64) {
    let (r, s) = (range.to_f64_lossy(), sine_azimuth.to_f64_lossy());
    (r * s, r * (1.0 - s * s).max(0.0).sqrt())
}

pub fn map_rows<T: Real>(result: &RecoveryResult<T>, truth: &TargetScene<T>, params: &RadarParams<T>) -> Vec<MapRow> {
    let row = |label: &str, index, delay, az, doppler| {
        let (east_m, north_m) = position(params.range_from_delay(delay), az);
        MapRow {
            label: label.to_string(),
            index,
            east_m,
            north_m,
            velocity_mps: params.velocity_from_doppler(doppler).to_f64_lossy(),
        }
    };
    let truth_rows = truth
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| row("truth", i, t.delay, t.sine_azimuth, t.doppler));
    let est_rows = result
        .detections
        .iter()
        .enumerate()
        .map(|(i, d)| row("estimate", i, d.delay, d.sine_azimuth, d.doppler));
    truth_rows.chain(est_rows).collect()
}

pub fn ppi_csv(rows: &[MapRow]) -> String {
    let mut out = format!("{PPI_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.label, r.index, r.east_m, r.north_m);
    }
    out
}

pub fn rad_csv(rows: &[MapRow]) -> String {
    let mut out = format!("{RAD_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.label, r.index, r.east_m, r.north_m, r.velocity_mps);
    }
    out
}

/// Parses [`rad_csv`] output.
pub fn parse_rad_csv(text: &str) -> Result<Vec<MapRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(RAD_HEADER) {
        return Err(Error::Parse("missing range-azimuth-Doppler header".into()));
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse(format!("map row {}: {line:?}", n + 1));
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(MapRow {
                label: f[0].to_string(),
                index: f[1].parse().map_err(|_| bad())?,
                east_m: num(f[2])?,
                north_m: num(f[3])?,
                velocity_mps: num(f[4])?,
            })
        })
        .collect()
}

/// Writes `ppi.csv` and `rad.csv` into `dir` and returns their paths.
pub fn emit_maps<T: Real>(
    result: &RecoveryResult<T>,
    truth: &TargetScene<T>,
    params: &RadarParams<T>,
    dir: &Path,
) -> Result<[PathBuf; 2]> {
    let rows = map_rows(result, truth, params);
    let ppi = dir.join("ppi.csv");
    let rad = dir.join("rad.csv");
    std::fs::write(&ppi, ppi_csv(&rows)).map_err(|e| Error::io(&ppi, e))?;
    std::fs::write(&rad, rad_csv(&rows)).map_err(|e| Error::io(&rad, e))?;
    Ok([ppi, rad])
}
