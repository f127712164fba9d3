//! Point-target scenes and the delay / sine-azimuth / Doppler grid.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::error::{Error, Result};
use crate::num::{round_half_up, Real};
use crate::params::RadarParams;

const SCENE_HEADER: &str = "alpha_re,alpha_im,range_m,sine_azimuth,velocity_mps";

/// Attempts per requested target before random placement gives up.
const DRAWS_PER_TARGET: usize = 5_000;

/// Two targets at 0.02 sine-azimuth spacing, twice, on the 12.5 m /
/// 15 m/s grid shared by the prototype and desk parameter sets.
pub const CLOSELY_SPACED_CSV: &str = include_str!("../data/scenes/closely_spaced.csv");

/// Ten separated targets.
pub const TEN_TARGETS_CSV: &str = include_str!("../data/scenes/ten_targets.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target<T> {
    pub amplitude: Complex<T>,
    /// Round-trip delay in seconds, within one PRI.
    pub delay: T,
    pub sine_azimuth: T,
    /// Doppler frequency in Hz.
    pub doppler: T,
}

/// Cell on the recovery grid: range bin `s`, azimuth bin `r`, Doppler bin `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub range: usize,
    pub azimuth: usize,
    pub doppler: usize,
}

impl GridIndex {
    pub fn new(range: usize, azimuth: usize, doppler: usize) -> Self {
        Self {
            range,
            azimuth,
            doppler,
        }
    }
}

/// The recovery grid. Range has `T N` bins of `pri / (T N)`, azimuth `Ra`
/// bins of `2 / Ra` starting at -1, Doppler `P` bins of `1 / (P pri)`
/// starting at `-1 / (2 pri)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub params: RadarParams<T>,
    pub range_bins: usize,
    pub azimuth_bins: usize,
    pub doppler_bins: usize,
}

impl<T: Real> Grid<T> {
    /// Grid matched to an array's virtual aperture.
    pub fn new(params: &RadarParams<T>, array: &ArrayConfig<T>) -> Self {
        Self::with_azimuth_bins(params, array.azimuth_bins())
    }

    /// Grid of the filled `T x R` reference array.
    pub fn reference(params: &RadarParams<T>) -> Self {
        Self::with_azimuth_bins(params, params.azimuth_bins())
    }

    pub fn with_azimuth_bins(params: &RadarParams<T>, azimuth_bins: usize) -> Self {
        Self {
            params: *params,
            range_bins: params.range_bins(),
            azimuth_bins,
            doppler_bins: params.pulses,
        }
    }

    pub fn delay_cell(&self) -> T {
        self.params.pri / T::from_count(self.range_bins)
    }

    pub fn azimuth_cell(&self) -> T {
        T::lit(2.0) / T::from_count(self.azimuth_bins)
    }

    pub fn doppler_cell(&self) -> T {
        T::one() / (T::from_count(self.doppler_bins) * self.params.pri)
    }

    pub fn len(&self) -> usize {
        self.range_bins * self.azimuth_bins * self.doppler_bins
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, idx: GridIndex) -> bool {
        idx.range < self.range_bins && idx.azimuth < self.azimuth_bins && idx.doppler < self.doppler_bins
    }

    /// `(delay, sine_azimuth, doppler)` at the given cell.
    pub fn to_physical(&self, idx: GridIndex) -> Result<(T, T, T)> {
        if !self.contains(idx) {
            return Err(Error::Range(format!(
                "{idx:?} outside {}x{}x{} grid",
                self.range_bins, self.azimuth_bins, self.doppler_bins
            )));
        }
        Ok(self.to_physical_frac(
            T::from_count(idx.range),
            T::from_count(idx.azimuth),
            T::from_count(idx.doppler),
        ))
    }

    /// Same affine maps at fractional bin positions.
    pub fn to_physical_frac(&self, s: T, r: T, u: T) -> (T, T, T) {
        let pri = self.params.pri;
        (
            s * self.delay_cell(),
            -T::one() + r * self.azimuth_cell(),
            -T::one() / (T::lit(2.0) * pri) + u * self.doppler_cell(),
        )
    }

    /// Fractional bin coordinates of a physical point.
    pub fn to_fractional(&self, delay: T, sine_azimuth: T, doppler: T) -> (T, T, T) {
        let pri = self.params.pri;
        (
            delay / self.delay_cell(),
            (sine_azimuth + T::one()) / self.azimuth_cell(),
            (doppler + T::one() / (T::lit(2.0) * pri)) / self.doppler_cell(),
        )
    }

    /// Nearest cell, ties rounded up. Delay and Doppler wrap around their
    /// unambiguous windows (the echo model is periodic in both); azimuth is
    /// clamped to the grid.
    pub fn to_index(&self, target: &Target<T>) -> GridIndex {
        let (s, r, u) = self.to_fractional(target.delay, target.sine_azimuth, target.doppler);
        let wrap = |x: T, n: usize| -> usize {
            let n_t = T::from_count(n);
            let v = round_half_up(x);
            let v = v - (v / n_t).floor() * n_t;
            v.to_usize().unwrap_or(0).min(n - 1)
        };
        let r = round_half_up(r)
            .max(T::zero())
            .min(T::from_count(self.azimuth_bins - 1));
        GridIndex {
            range: wrap(s, self.range_bins),
            azimuth: r.to_usize().unwrap_or(0),
            doppler: wrap(u, self.doppler_bins),
        }
    }

    /// Target with the given amplitude exactly at a cell centre.
    pub fn target_at(&self, idx: GridIndex, amplitude: Complex<T>) -> Result<Target<T>> {
        let (delay, sine_azimuth, doppler) = self.to_physical(idx)?;
        Ok(Target {
            amplitude,
            delay,
            sine_azimuth,
            doppler,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TargetScene<T> {
    pub targets: Vec<Target<T>>,
    /// Cells on the generating grid, when the scene was drawn on one.
    pub grid: Option<Vec<GridIndex>>,
}

impl<T: Real> TargetScene<T> {
    pub fn new(targets: Vec<Target<T>>) -> Self {
        Self {
            targets,
            grid: None,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Every target is inside the unambiguous delay, azimuth and Doppler
    /// windows.
    pub fn check(&self, params: &RadarParams<T>) -> Result<()> {
        let half = T::one() / (T::lit(2.0) * params.pri);
        for (i, t) in self.targets.iter().enumerate() {
            let ok = t.delay >= T::zero()
                && t.delay < params.pri
                && num_traits::Float::abs(t.sine_azimuth) <= T::one()
                && t.doppler >= -half
                && t.doppler <= half
                && t.amplitude.re.is_finite()
                && t.amplitude.im.is_finite();
            if !ok {
                return Err(Error::Range(format!("target {i} is outside the unambiguous windows")));
            }
        }
        Ok(())
    }

    /// Scene table with one row per target.
    pub fn to_csv(&self, params: &RadarParams<T>) -> String {
        let mut out = String::from(SCENE_HEADER);
        out.push('\n');
        for t in &self.targets {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t.amplitude.re,
                t.amplitude.im,
                params.range_from_delay(t.delay),
                t.sine_azimuth,
                params.velocity_from_doppler(t.doppler)
            ));
        }
        out
    }

    pub fn from_csv(text: &str, params: &RadarParams<T>) -> Result<Self> {
        let mut targets = Vec::new();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some(h) if h.trim() == SCENE_HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "scene header must be `{SCENE_HEADER}`, found {other:?}"
                )))
            }
        }
        for (n, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!("scene row {}: expected 5 fields", n + 1)));
            }
            let mut v = [T::zero(); 5];
            for (slot, f) in v.iter_mut().zip(&fields) {
                let x: f64 = f
                    .parse()
                    .map_err(|_| Error::Parse(format!("scene row {}: bad number `{f}`", n + 1)))?;
                *slot = T::lit(x);
            }
            targets.push(Target {
                amplitude: Complex::new(v[0], v[1]),
                delay: params.delay_from_range(v[2]),
                sine_azimuth: v[3],
                doppler: params.doppler_from_velocity(v[4]),
            });
        }
        let scene = Self::new(targets);
        scene.check(params)?;
        Ok(scene)
    }

    /// Attaches grid cells when every target sits on a cell centre of `grid`.
    pub fn snap_check(mut self, grid: &Grid<T>) -> Self {
        let tol = T::lit(1e-6);
        let cells: Vec<GridIndex> = self.targets.iter().map(|t| grid.to_index(t)).collect();
        let on_grid = self.targets.iter().zip(&cells).all(|(t, c)| {
            let (s, r, u) = grid.to_fractional(t.delay, t.sine_azimuth, t.doppler);
            let d = |x: T, n: usize| num_traits::Float::abs(x - T::from_count(n));
            d(s, c.range) < tol && d(r, c.azimuth) < tol && d(u, c.doppler) < tol
        });
        self.grid = on_grid.then_some(cells);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplitudeModel<T> {
    /// `|alpha| = 1`, uniform phase.
    UnitModulus,
    /// `|alpha|` in dB uniform on `[min_db, max_db]`, uniform phase.
    LogUniform { min_db: T, max_db: T },
}

impl<T: Real> AmplitudeModel<T> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Complex<T> {
        let phase = T::lit(rng.random::<f64>()) * T::TAU();
        let mag = match *self {
            AmplitudeModel::UnitModulus => T::one(),
            AmplitudeModel::LogUniform { min_db, max_db } => {
                let db = min_db + (max_db - min_db) * T::lit(rng.random::<f64>());
                T::lit(10.0).powf(db / T::lit(20.0))
            }
        };
        Complex::from_polar(mag, phase)
    }
}

/// What `random_scene` should draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec<T> {
    pub targets: usize,
    /// Minimum pairwise sine-azimuth spacing.
    pub min_azimuth_sep: T,
    pub amplitude: AmplitudeModel<T>,
}

impl<T: Real> SceneSpec<T> {
    pub fn new(targets: usize, min_azimuth_sep: T) -> Self {
        Self {
            targets,
            min_azimuth_sep,
            amplitude: AmplitudeModel::UnitModulus,
        }
    }
}

/// Draws `spec.targets` distinct cells of `grid` uniformly (ChaCha8 seeded
/// with `seed`), rejecting any cell closer than `min_azimuth_sep` in sine
/// azimuth to one already placed.
pub fn random_scene<T: Real>(spec: &SceneSpec<T>, grid: &Grid<T>, seed: u64) -> Result<TargetScene<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<GridIndex> = Vec::with_capacity(spec.targets);
    let mut azimuths: Vec<T> = Vec::with_capacity(spec.targets);
    let slack = T::lit(1e-9);
    let mut budget = DRAWS_PER_TARGET * spec.targets.max(1);
    while cells.len() < spec.targets {
        if budget == 0 {
            return Err(Error::Generation(format!(
                "placed {} of {} targets at spacing {}",
                cells.len(),
                spec.targets,
                spec.min_azimuth_sep
            )));
        }
        budget -= 1;
        let idx = GridIndex::new(
            rng.random_range(0..grid.range_bins),
            rng.random_range(0..grid.azimuth_bins),
            rng.random_range(0..grid.doppler_bins),
        );
        let (_, az, _) = grid.to_physical(idx)?;
        let clash = cells.contains(&idx)
            || azimuths
                .iter()
                .any(|&a| num_traits::Float::abs(a - az) < spec.min_azimuth_sep - slack);
        if !clash {
            cells.push(idx);
            azimuths.push(az);
        }
    }
    let targets = cells
        .iter()
        .map(|&c| grid.target_at(c, spec.amplitude.draw(&mut rng)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TargetScene {
        targets,
        grid: Some(cells),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn desk_grid() -> Grid<f64> {
        Grid::reference(&RadarParams::desk())
    }

    #[test]
    fn origin_and_symmetry() {
        let g = Grid::reference(&RadarParams::<f64>::prototype());
        let (tau, az, fd) = g.to_physical(GridIndex::new(0, 40, 5)).unwrap();
        assert_eq!(tau, 0.0);
        assert!(az.abs() < 1e-15);
        assert!(fd.abs() < 1e-9);
    }

    #[test]
    fn prototype_cells() {
        let p = RadarParams::<f64>::prototype();
        let g = Grid::reference(&p);
        let (tau, _, _) = g.to_physical(GridIndex::new(1, 0, 0)).unwrap();
        assert!((tau - 100e-6 / 12_000.0).abs() < 1e-20);
        assert!((p.range_from_delay(tau) - 1.25).abs() < 1e-12);
        let (_, a0, _) = g.to_physical(GridIndex::new(0, 0, 0)).unwrap();
        let (_, a1, _) = g.to_physical(GridIndex::new(0, 1, 0)).unwrap();
        assert!((a1 - a0 - 0.025).abs() < 1e-15);
        let wide = Grid::with_azimuth_bins(&p, 400);
        assert!((wide.azimuth_cell() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let g = desk_grid();
        assert!(matches!(g.to_physical(GridIndex::new(1200, 0, 0)), Err(Error::Range(_))));
    }

    #[test]
    fn ties_round_up() {
        let g = desk_grid();
        let t = Target {
            amplitude: Complex::new(1.0, 0.0),
            delay: 3.5 * g.delay_cell(),
            sine_azimuth: 0.0,
            doppler: 0.0,
        };
        assert_eq!(g.to_index(&t).range, 4);
    }

    #[test]
    fn round_trip_is_exhaustive_at_desk_scale() {
        let p = RadarParams::<f64>::new(2, 3, 1e-6, 4, 16e6, 10e9).unwrap();
        let g = Grid::reference(&p);
        for s in 0..g.range_bins {
            for r in 0..g.azimuth_bins {
                for u in 0..g.doppler_bins {
                    let idx = GridIndex::new(s, r, u);
                    let t = g.target_at(idx, Complex::new(1.0, 0.0)).unwrap();
                    assert_eq!(g.to_index(&t), idx);
                }
            }
        }
    }

    #[test]
    fn random_scene_respects_separation() {
        let g = desk_grid();
        let scene = random_scene(&SceneSpec::new(10, 0.025), &g, 11).unwrap();
        assert_eq!(scene.len(), 10);
        let mut pairs = 0;
        for i in 0..10 {
            for j in i + 1..10 {
                let d = (scene.targets[i].sine_azimuth - scene.targets[j].sine_azimuth).abs();
                assert!(d >= 0.025 - 1e-12);
                pairs += 1;
            }
            assert!((scene.targets[i].amplitude.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(pairs, 45);
        let again = random_scene(&SceneSpec::new(10, 0.025), &g, 11).unwrap();
        assert_eq!(scene, again);
        let other = random_scene(&SceneSpec::new(10, 0.025), &g, 12).unwrap();
        assert_ne!(scene, other);
    }

    #[test]
    fn empty_and_impossible_scenes() {
        let g = desk_grid();
        assert!(random_scene(&SceneSpec::new(0, 0.025), &g, 1).unwrap().is_empty());
        assert!(matches!(
            random_scene(&SceneSpec::new(2, 2.0), &g, 1),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn log_uniform_amplitudes_stay_in_range() {
        let g = desk_grid();
        let spec = SceneSpec {
            targets: 20,
            min_azimuth_sep: 0.0,
            amplitude: AmplitudeModel::LogUniform { min_db: -20.0, max_db: 0.0 },
        };
        for t in random_scene(&spec, &g, 3).unwrap().targets {
            let db = 20.0 * t.amplitude.norm().log10();
            assert!((-20.0 - 1e-9..=1e-9).contains(&db));
        }
    }

    #[test]
    fn csv_round_trip() {
        let p = RadarParams::<f64>::desk();
        let g = Grid::reference(&p);
        let scene = random_scene(&SceneSpec::new(6, 0.025), &g, 4).unwrap();
        let back = TargetScene::from_csv(&scene.to_csv(&p), &p).unwrap();
        for (a, b) in scene.targets.iter().zip(&back.targets) {
            assert!((a.amplitude - b.amplitude).norm() < 1e-12);
            assert!((a.delay - b.delay).abs() < 1e-18);
            assert!((a.sine_azimuth - b.sine_azimuth).abs() < 1e-15);
            assert!((a.doppler - b.doppler).abs() < 1e-9);
        }
        assert!(TargetScene::<f64>::from_csv("a,b\n", &p).is_err());
    }

    #[test]
    fn canned_scenes_are_on_both_grids() {
        for params in [RadarParams::<f64>::desk(), RadarParams::prototype()] {
            for text in [CLOSELY_SPACED_CSV, TEN_TARGETS_CSV] {
                let s = TargetScene::from_csv(text, &params).unwrap();
                let wide = Grid::with_azimuth_bins(&params, 400);
                assert!(s.clone().snap_check(&wide).grid.is_some());
            }
        }
        let p = RadarParams::<f64>::desk();
        let close = TargetScene::from_csv(CLOSELY_SPACED_CSV, &p).unwrap();
        let g = Grid::reference(&p);
        let cells: Vec<_> = close.targets.iter().map(|t| g.to_index(t)).collect();
        assert_eq!(cells[0], cells[1]);
        assert_eq!(cells[2], cells[3]);
        assert!((close.targets[1].sine_azimuth - close.targets[0].sine_azimuth - 0.02).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn nearest_cell_is_within_half_a_bin(s in 0.0f64..1199.49, r in 0.0f64..79.49, u in 0.0f64..9.49) {
            let g = desk_grid();
            let (delay, az, fd) = g.to_physical_frac(s, r, u);
            let t = Target { amplitude: Complex::new(1.0, 0.0), delay, sine_azimuth: az, doppler: fd };
            let (d2, a2, f2) = g.to_physical(g.to_index(&t)).unwrap();
            prop_assert!((delay - d2).abs() <= g.delay_cell() / 2.0 * (1.0 + 1e-9));
            prop_assert!((az - a2).abs() <= g.azimuth_cell() / 2.0 * (1.0 + 1e-9));
            prop_assert!((fd - f2).abs() <= g.doppler_cell() / 2.0 * (1.0 + 1e-9));
        }
    }
}
