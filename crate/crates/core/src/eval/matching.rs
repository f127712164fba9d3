use serde::Serialize;

use crate::num::Real;
use crate::recovery::RecoveryResult;
use crate::scene::{Grid, GridIndex, Target, TargetScene};

/// Outcome of matching estimates against ground truth. Indices refer to
/// `truth.targets` and `result.detections`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DetectionReport {
    /// `(truth, estimate)` pairs.
    pub hits: Vec<(usize, usize)>,
    pub misses: Vec<usize>,
    pub false_alarms: Vec<usize>,
    /// Hits whose cells coincide exactly, as `(truth, estimate)`.
    pub strict_hits: Vec<(usize, usize)>,
}

impl DetectionReport {
    /// Hits over truth count; `1` for an empty truth.
    pub fn detection_rate(&self) -> f64 {
        let n = self.hits.len() + self.misses.len();
        if n == 0 {
            1.0
        } else {
            self.hits.len() as f64 / n as f64
        }
    }
}

/// Signed per-axis bin offsets; range and Doppler wrap, azimuth does not.
fn offsets(a: GridIndex, b: GridIndex, grid_range: usize, grid_doppler: usize) -> (usize, usize, usize) {
    let circ = |x: usize, y: usize, n: usize| {
        let d = x.abs_diff(y) % n;
        d.min(n - d)
    };
    (
        circ(a.range, b.range, grid_range),
        a.azimuth.abs_diff(b.azimuth),
        circ(a.doppler, b.doppler, grid_doppler),
    )
}

/// Greedy one-to-one matching inside the ±1 bin box on every axis.
///
/// Truth and estimates are both snapped to `grid` with
/// [`Grid::to_index`]. Candidate pairs are taken in order of squared bin
/// distance, then truth index, then estimate index.
pub fn match_detections<T: Real>(truth: &TargetScene<T>, result: &RecoveryResult<T>, grid: &Grid<T>) -> DetectionReport {
    let truth_cells: Vec<GridIndex> = truth.targets.iter().map(|t| grid.to_index(t)).collect();
    let est_cells: Vec<GridIndex> = result
        .detections
        .iter()
        .map(|d| {
            grid.to_index(&Target {
                amplitude: d.amplitude,
                delay: d.delay,
                sine_azimuth: d.sine_azimuth,
                doppler: d.doppler,
            })
        })
        .collect();
    let mut pairs = Vec::new();
    for (i, &t) in truth_cells.iter().enumerate() {
        for (j, &e) in est_cells.iter().enumerate() {
            let (ds, dr, du) = offsets(t, e, grid.range_bins, grid.doppler_bins);
            if ds <= 1 && dr <= 1 && du <= 1 {
                pairs.push((ds * ds + dr * dr + du * du, i, j));
            }
        }
    }
    pairs.sort_unstable();
    let mut truth_used = vec![false; truth_cells.len()];
    let mut est_used = vec![false; est_cells.len()];
    let mut report = DetectionReport::default();
    for (dist, i, j) in pairs {
        if truth_used[i] || est_used[j] {
            continue;
        }
        truth_used[i] = true;
        est_used[j] = true;
        report.hits.push((i, j));
        if dist == 0 {
            report.strict_hits.push((i, j));
        }
    }
    report.hits.sort_unstable();
    report.strict_hits.sort_unstable();
    report.misses = (0..truth_cells.len()).filter(|&i| !truth_used[i]).collect();
    report.false_alarms = (0..est_cells.len()).filter(|&j| !est_used[j]).collect();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RadarParams;
    use crate::recovery::Detection;
    use num_complex::Complex;
    use proptest::prelude::*;

    fn grid() -> Grid<f64> {
        Grid::reference(&RadarParams::desk())
    }

    fn scene(cells: &[GridIndex]) -> TargetScene<f64> {
        let g = grid();
        TargetScene::new(cells.iter().map(|&c| g.target_at(c, Complex::new(1.0, 0.0)).unwrap()).collect())
    }

    fn result(cells: &[GridIndex]) -> RecoveryResult<f64> {
        let g = grid();
        RecoveryResult {
            detections: cells
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let (delay, sine_azimuth, doppler) = g.to_physical(c).unwrap();
                    Detection {
                        cell: c,
                        amplitude: Complex::new(1.0, 0.0),
                        delay,
                        sine_azimuth,
                        doppler,
                        iteration: i + 1,
                    }
                })
                .collect(),
            residuals: vec![],
        }
    }

    #[test]
    fn identical_estimates_are_strict_hits() {
        let cells = [GridIndex::new(5, 6, 7), GridIndex::new(100, 40, 2)];
        let r = match_detections(&scene(&cells), &result(&cells), &grid());
        assert_eq!(r.hits.len(), 2);
        assert_eq!(r.strict_hits.len(), 2);
        assert!(r.misses.is_empty() && r.false_alarms.is_empty());
    }

    #[test]
    fn two_bins_off_is_miss_and_false_alarm() {
        let t = [GridIndex::new(5, 6, 7)];
        let e = [GridIndex::new(7, 6, 7)];
        let r = match_detections(&scene(&t), &result(&e), &grid());
        assert_eq!((r.hits.len(), r.misses, r.false_alarms), (0, vec![0], vec![0]));
        let e = [GridIndex::new(6, 7, 6)];
        let r = match_detections(&scene(&t), &result(&e), &grid());
        assert_eq!(r.hits, vec![(0, 0)]);
        assert!(r.strict_hits.is_empty());
    }

    #[test]
    fn empty_estimates_are_all_misses() {
        let t = [GridIndex::new(1, 2, 3), GridIndex::new(4, 5, 6)];
        let r = match_detections(&scene(&t), &result(&[]), &grid());
        assert_eq!(r.misses, vec![0, 1]);
        assert!(r.false_alarms.is_empty());
    }

    #[test]
    fn closest_estimate_wins() {
        let t = [GridIndex::new(10, 10, 5)];
        let e = [GridIndex::new(11, 11, 5), GridIndex::new(10, 10, 5)];
        let r = match_detections(&scene(&t), &result(&e), &grid());
        assert_eq!(r.hits, vec![(0, 1)]);
        assert_eq!(r.false_alarms, vec![0]);
    }

    #[test]
    fn doppler_wraps() {
        let t = [GridIndex::new(10, 10, 0)];
        let e = [GridIndex::new(10, 10, 9)];
        let r = match_detections(&scene(&t), &result(&e), &grid());
        assert_eq!(r.hits.len(), 1);
    }

    fn cell() -> impl Strategy<Value = GridIndex> {
        (0usize..8, 0usize..6, 0usize..4).prop_map(|(s, r, u)| GridIndex::new(s, r, u))
    }

    proptest! {
        #[test]
        fn matching_is_a_partition(t in prop::collection::vec(cell(), 0..8), e in prop::collection::vec(cell(), 0..8)) {
            let r = match_detections(&scene(&t), &result(&e), &grid());
            let mut ti: Vec<usize> = r.hits.iter().map(|h| h.0).chain(r.misses.iter().copied()).collect();
            let mut ei: Vec<usize> = r.hits.iter().map(|h| h.1).chain(r.false_alarms.iter().copied()).collect();
            ti.sort_unstable();
            ei.sort_unstable();
            prop_assert_eq!(ti, (0..t.len()).collect::<Vec<_>>());
            prop_assert_eq!(ei, (0..e.len()).collect::<Vec<_>>());
            prop_assert!(r.strict_hits.iter().all(|s| r.hits.contains(s)));
        }
    }
}
