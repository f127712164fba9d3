//! Antenna constellations and the per-channel array phase parameter.
//!
//! Positions are stored in wavelengths. Random constellations are drawn
//! from a `ChaCha8` stream seeded with `seed_from_u64(seed)`: transmitter
//! positions first, then receiver positions, each uniform on `[0, Z]` and
//! sorted ascending. A draw is rejected and repeated while two elements of
//! the same kind sit closer than half a wavelength. Mode 3 then picks its
//! FDM slots (a sorted `T/2`-subset of `0..T`) from the same stream.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::params::RadarParams;

const MAX_PLACEMENT_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ArrayMode {
    /// Filled `T x R` MIMO array forming the lambda/2 virtual ULA.
    Mode1,
    /// `T x R` elements at random positions inside the Mode 1 aperture.
    Mode2,
    /// Thinned `T/2 x R/2` random array inside the Mode 1 aperture.
    Mode3,
    /// `T x R` random elements spread over the wide reference aperture.
    Mode4,
}

impl ArrayMode {
    pub const ALL: [ArrayMode; 4] = [
        ArrayMode::Mode1,
        ArrayMode::Mode2,
        ArrayMode::Mode3,
        ArrayMode::Mode4,
    ];

    pub fn id(self) -> u8 {
        match self {
            ArrayMode::Mode1 => 1,
            ArrayMode::Mode2 => 2,
            ArrayMode::Mode3 => 3,
            ArrayMode::Mode4 => 4,
        }
    }

    /// Modes whose receivers sample only the subband coefficient set.
    pub fn temporal_sub_nyquist(self) -> bool {
        matches!(self, ArrayMode::Mode3 | ArrayMode::Mode4)
    }
}

impl TryFrom<u8> for ArrayMode {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        match id {
            1 => Ok(ArrayMode::Mode1),
            2 => Ok(ArrayMode::Mode2),
            3 => Ok(ArrayMode::Mode3),
            4 => Ok(ArrayMode::Mode4),
            other => Err(Error::Config(format!("unsupported array mode {other}"))),
        }
    }
}

impl From<ArrayMode> for u8 {
    fn from(mode: ArrayMode) -> u8 {
        mode.id()
    }
}

impl FromStr for ArrayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id: u8 = s
            .trim()
            .trim_start_matches("mode")
            .trim_start_matches("Mode")
            .parse()
            .map_err(|_| Error::Config(format!("unsupported array mode {s:?}")))?;
        ArrayMode::try_from(id)
    }
}

impl fmt::Display for ArrayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mode{}", self.id())
    }
}

/// Transmit and receive element positions, in wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig<T> {
    pub mode: ArrayMode,
    /// Transmitter positions `xi_m`.
    pub tx: Vec<T>,
    /// Receiver positions `zeta_q`.
    pub rx: Vec<T>,
    /// FDM slot (reference transmitter index) occupied by each transmitter.
    pub slots: Vec<usize>,
    /// Normalized aperture `Z`.
    pub aperture: T,
}

impl<T: Real> ArrayConfig<T> {
    pub fn num_tx(&self) -> usize {
        self.tx.len()
    }

    pub fn num_rx(&self) -> usize {
        self.rx.len()
    }

    /// Azimuth bins of the virtual aperture, `2Z` (`TR` for Modes 1-3).
    pub fn azimuth_bins(&self) -> usize {
        (self.aperture * T::lit(2.0))
            .round()
            .to_usize()
            .unwrap_or(0)
            .max(1)
    }

    /// Random constellation of `m` transmitters and `q` receivers in
    /// `[0, aperture]`, using the module-level placement rule.
    pub fn random(
        mode: ArrayMode,
        m: usize,
        q: usize,
        aperture: T,
        slots: Vec<usize>,
        seed: u64,
    ) -> Result<Self> {
        if slots.len() != m {
            return Err(Error::Config(format!(
                "{m} transmitters but {} FDM slots",
                slots.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tx = draw_positions(&mut rng, m, aperture)?;
        let rx = draw_positions(&mut rng, q, aperture)?;
        Ok(Self {
            mode,
            tx,
            rx,
            slots,
            aperture,
        })
    }

    pub fn check(&self) -> Result<()> {
        let inside = |p: &T| *p >= T::zero() && *p <= self.aperture;
        if !self.tx.iter().chain(self.rx.iter()).all(inside) {
            return Err(Error::Config("element outside the aperture".into()));
        }
        if self.tx.is_empty() || self.rx.is_empty() {
            return Err(Error::Config("array needs at least one Tx and one Rx".into()));
        }
        if self.slots.len() != self.tx.len() {
            return Err(Error::Config("one FDM slot per transmitter required".into()));
        }
        Ok(())
    }

    /// Plain-text table: one `kind index position_wavelengths position_m`
    /// row per element, preceded by `#` metadata lines.
    pub fn to_table(&self, wavelength: T) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mode {}", self.mode.id());
        let _ = writeln!(out, "# aperture {}", self.aperture);
        let slots: Vec<String> = self.slots.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "# slots {}", slots.join(" "));
        let _ = writeln!(out, "# kind index position_norm position_m");
        for (kind, positions) in [("Tx", &self.tx), ("Rx", &self.rx)] {
            for (i, p) in positions.iter().enumerate() {
                let _ = writeln!(out, "{kind} {i} {} {}", p, *p * wavelength);
            }
        }
        out
    }

    /// Parses [`to_table`](Self::to_table) output. The metres column is
    /// ignored; missing `slots` default to `0..M`.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut mode = None;
        let mut aperture = None;
        let mut slots = None;
        let mut tx = Vec::new();
        let mut rx = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("array table line {}: {line:?}", lineno + 1));
            if let Some(meta) = line.strip_prefix('#') {
                let mut it = meta.split_whitespace();
                match it.next() {
                    Some("mode") => {
                        let id: u8 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                        mode = Some(ArrayMode::try_from(id)?);
                    }
                    Some("aperture") => {
                        let z: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                        aperture = Some(T::lit(z));
                    }
                    Some("slots") => {
                        let parsed: std::result::Result<Vec<usize>, _> =
                            it.map(str::parse).collect();
                        slots = Some(parsed.map_err(|_| bad())?);
                    }
                    _ => {}
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 3 {
                return Err(bad());
            }
            let index: usize = fields[1].parse().map_err(|_| bad())?;
            let pos: f64 = fields[2].parse().map_err(|_| bad())?;
            let target = match fields[0] {
                "Tx" => &mut tx,
                "Rx" => &mut rx,
                _ => return Err(bad()),
            };
            if index != target.len() {
                return Err(bad());
            }
            target.push(T::lit(pos));
        }
        let mode = mode.ok_or_else(|| Error::Parse("array table has no mode line".into()))?;
        let aperture = match aperture {
            Some(z) => z,
            None => tx
                .iter()
                .chain(rx.iter())
                .fold(T::zero(), |acc, p| acc.max(*p)),
        };
        let slots = slots.unwrap_or_else(|| (0..tx.len()).collect());
        let config = Self {
            mode,
            tx,
            rx,
            slots,
            aperture,
        };
        config.check()?;
        Ok(config)
    }
}

fn draw_positions<T: Real>(rng: &mut ChaCha8Rng, count: usize, aperture: T) -> Result<Vec<T>> {
    let z = aperture.to_f64_lossy();
    // Half a wavelength cannot be honoured when the elements do not fit.
    let spacing = if count > 1 && z / (count - 1) as f64 >= 0.5 {
        0.5
    } else {
        0.0
    };
    for _ in 0..MAX_PLACEMENT_DRAWS {
        let mut positions: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * z).collect();
        positions.sort_by(f64::total_cmp);
        if positions.windows(2).all(|w| w[1] - w[0] >= spacing) {
            return Ok(positions.into_iter().map(T::lit).collect());
        }
    }
    Err(Error::Config(format!(
        "could not place {count} elements at lambda/2 spacing within aperture {z}"
    )))
}

/// Builds the constellation for `mode`. Mode 1 ignores `seed`.
pub fn build_array<T: Real>(
    params: &RadarParams<T>,
    mode: ArrayMode,
    seed: u64,
) -> Result<ArrayConfig<T>> {
    params.validate()?;
    let (t, r) = (params.nyquist_tx, params.nyquist_rx);
    let half = T::lit(0.5);
    let filled_aperture = T::from_count(t * r) * half;
    let config = match mode {
        ArrayMode::Mode1 => ArrayConfig {
            mode,
            tx: (0..t)
                .map(|m| T::from_count(m * r) * half)
                .collect(),
            rx: (0..r).map(|q| T::from_count(q) * half).collect(),
            slots: (0..t).collect(),
            aperture: filled_aperture,
        },
        ArrayMode::Mode2 => {
            ArrayConfig::random(mode, t, r, filled_aperture, (0..t).collect(), seed)?
        }
        ArrayMode::Mode3 => {
            if t % 2 != 0 || r % 2 != 0 {
                return Err(Error::Config(format!(
                    "Mode 3 halves the array and needs even T and R, got {t}x{r}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tx = draw_positions(&mut rng, t / 2, filled_aperture)?;
            let rx = draw_positions(&mut rng, r / 2, filled_aperture)?;
            let mut slots = index::sample(&mut rng, t, t / 2).into_vec();
            slots.sort_unstable();
            ArrayConfig {
                mode,
                tx,
                rx,
                slots,
                aperture: filled_aperture,
            }
        }
        ArrayMode::Mode4 => {
            let (wt, wr) = params.wide_reference;
            let aperture = T::from_count(wt * wr) * half;
            ArrayConfig::random(mode, t, r, aperture, (0..t).collect(), seed)?
        }
    };
    config.check()?;
    Ok(config)
}

/// `beta_mq = (zeta_q + xi_m)(f_m lambda / c + 1)`.
pub fn compute_beta<T: Real>(xi_m: T, zeta_q: T, f_m: T, params: &RadarParams<T>) -> T {
    (zeta_q + xi_m) * (f_m * params.wavelength / params.propagation_speed + T::one())
}

/// Outcome of the minimal-resource conditions for noiseless recovery of
/// `L` targets: `MQ >= 2L`, `MK >= 2L` and `P >= 2L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryConditions {
    pub spatial: bool,
    pub temporal: bool,
    pub pulses: bool,
}

impl RecoveryConditions {
    pub fn all(&self) -> bool {
        self.spatial && self.temporal && self.pulses
    }
}

pub fn check_recovery_conditions(
    m: usize,
    q: usize,
    k: usize,
    p: usize,
    l: usize,
) -> RecoveryConditions {
    let need = 2 * l;
    RecoveryConditions {
        spatial: m * q >= need,
        temporal: m * k >= need,
        pulses: p >= need,
    }
}
