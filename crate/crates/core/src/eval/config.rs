//! TOML scenario files.
//!
//! ```toml
//! seed = 7
//! trials = 100
//! runs = ["1", "3c"]
//!
//! [radar]
//! preset = "desk"
//!
//! [scene]
//! targets = 10
//!
//! [noise]
//! snr_db = -15.0
//!
//! [recovery]
//! combining = "coherent"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiment::{Experiment, RunSpec, SceneSource};
use crate::array::ArrayMode;
use crate::budget::snr_loss_db;
use crate::error::{Error, Result};
use crate::params::RadarParams;
use crate::recovery::{Combining, RecoveryOptions, StopRule};
use crate::scene::{AmplitudeModel, SceneSpec, TargetScene};
use crate::spectrum::{reference_bands, Band};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Desk,
    Prototype,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSection {
    #[serde(default)]
    pub preset: Preset,
    pub tx: Option<usize>,
    pub rx: Option<usize>,
    pub pri: Option<f64>,
    pub pulses: Option<usize>,
    pub bandwidth: Option<f64>,
    pub carrier: Option<f64>,
    pub propagation_speed: Option<f64>,
    /// `[T, R]` of the wide reference aperture.
    pub wide_reference: Option<(usize, usize)>,
}

impl RadarSection {
    pub fn resolve(&self) -> Result<RadarParams<f64>> {
        let base = match self.preset {
            Preset::Desk => RadarParams::desk(),
            Preset::Prototype => RadarParams::prototype(),
        };
        let mut p = RadarParams::with_speed(
            self.tx.unwrap_or(base.nyquist_tx),
            self.rx.unwrap_or(base.nyquist_rx),
            self.pri.unwrap_or(base.pri),
            self.pulses.unwrap_or(base.pulses),
            self.bandwidth.unwrap_or(base.bandwidth),
            self.carrier.unwrap_or(base.carrier),
            self.propagation_speed.unwrap_or(base.propagation_speed),
        )?;
        p.wide_reference = self.wide_reference.unwrap_or(base.wide_reference);
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    /// Scene CSV; overrides the random draw when present.
    pub file: Option<PathBuf>,
    #[serde(default = "default_targets")]
    pub targets: usize,
    #[serde(default)]
    pub min_azimuth_sep: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: AmplitudeModel<f64>,
}

fn default_targets() -> usize {
    10
}

fn default_amplitude() -> AmplitudeModel<f64> {
    AmplitudeModel::UnitModulus
}

impl Default for SceneSection {
    fn default() -> Self {
        Self {
            file: None,
            targets: default_targets(),
            min_azimuth_sep: 0.0,
            amplitude: default_amplitude(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Omit for noiseless runs.
    pub snr_db: Option<f64>,
    /// Anti-alias stop-band attenuation; adds the folding loss to Modes 3
    /// and 4 when set.
    pub stopband_atten_db: Option<f64>,
    /// Sub-Nyquist ADC rate; defaults to half the per-transmitter band.
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverySection {
    #[serde(default)]
    pub combining: Combining,
    /// Stop on residual ratio instead of the known target count.
    pub residual_ratio: Option<f64>,
    pub max_iterations: Option<usize>,
    pub refine: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// `[start_hz, stop_hz]` pairs; defaults to the reference subbands.
    pub bands: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_runs")]
    pub runs: Vec<String>,
    #[serde(default)]
    pub radar: RadarSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub scene: SceneSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub recovery: RecoverySection,
    pub out: Option<PathBuf>,
}

fn default_trials() -> usize {
    100
}

fn default_runs() -> Vec<String> {
    vec!["1".into()]
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: default_trials(),
            runs: default_runs(),
            radar: RadarSection::default(),
            spectrum: SpectrumSection::default(),
            scene: SceneSection::default(),
            noise: NoiseSection::default(),
            recovery: RecoverySection::default(),
            out: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative scene paths are relative to the config file.
        if let (Some(file), Some(dir)) = (&cfg.scene.file, path.parent()) {
            if file.is_relative() {
                cfg.scene.file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn run_specs(&self) -> Result<Vec<RunSpec>> {
        self.runs.iter().map(|s| s.parse()).collect()
    }

    /// Validated experiment description.
    pub fn experiment(&self) -> Result<Experiment<f64>> {
        let params = self.radar.resolve()?;
        let runs = self.run_specs()?;
        if runs.is_empty() {
            return Err(Error::Config("no runs configured".into()));
        }
        let bands = match &self.spectrum.bands {
            Some(b) => b.iter().map(|&(a, z)| Band::new(a, z)).collect(),
            None => reference_bands(params.bandwidth),
        };
        let scene = match &self.scene.file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                SceneSource::Fixed(TargetScene::from_csv(&text, &params)?)
            }
            None => SceneSource::Random(SceneSpec {
                targets: self.scene.targets,
                min_azimuth_sep: self.scene.min_azimuth_sep,
                amplitude: self.scene.amplitude,
            }),
        };
        let targets = scene.targets();
        let stop = match self.recovery.residual_ratio {
            Some(ratio) => StopRule::Residual {
                ratio,
                max_iterations: self.recovery.max_iterations.unwrap_or(4 * targets.max(1)),
            },
            None => StopRule::Targets(targets),
        };
        let folding_loss_db = match self.noise.stopband_atten_db {
            Some(a) => {
                let f_s = self.noise.sample_rate.unwrap_or(params.bandwidth / 2.0);
                let q = 2.0 * params.coefficients as f64 / (f_s * params.pri);
                snr_loss_db(q, a)
            }
            None => 0.0,
        };
        if runs.iter().any(|r| r.mode == ArrayMode::Mode3)
            && (params.nyquist_tx % 2 != 0 || params.nyquist_rx % 2 != 0)
        {
            return Err(Error::Config("Mode 3 needs even transmitter and receiver counts".into()));
        }
        Ok(Experiment {
            params,
            runs,
            bands,
            scene,
            snr_db: self.noise.snr_db.unwrap_or(f64::INFINITY),
            folding_loss_db,
            options: RecoveryOptions {
                stop,
                combining: self.recovery.combining,
            },
            refine: self.recovery.refine,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = ScenarioConfig::from_toml("").unwrap();
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.params, RadarParams::desk());
        assert_eq!(exp.runs, vec![RunSpec::new(ArrayMode::Mode1, false)]);
        assert!(exp.snr_db.is_infinite());
        assert_eq!(exp.options, RecoveryOptions::targets(10));
    }

    #[test]
    fn full_file() {
        let text = r#"
seed = 9
trials = 5
runs = ["1", "3c", "mode4-cognitive"]

[radar]
preset = "prototype"
pulses = 8

[scene]
targets = 4
min_azimuth_sep = 0.1
amplitude = { kind = "log_uniform", min_db = -3.0, max_db = 3.0 }

[noise]
snr_db = -10.0
stopband_atten_db = 30.0

[recovery]
combining = "per_transmitter"
refine = 2
"#;
        let cfg = ScenarioConfig::from_toml(text).unwrap();
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.params.pulses, 8);
        assert_eq!(exp.params.coefficients, 1500);
        assert_eq!(exp.runs.len(), 3);
        assert!((exp.folding_loss_db - snr_loss_db(4.0, 30.0)).abs() < 1e-12);
        assert_eq!(exp.options.combining, Combining::PerTransmitter);
        assert_eq!(exp.refine, Some(2));
        let again = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ScenarioConfig::from_toml("sed = 1").is_err());
        assert!(ScenarioConfig::from_toml("runs = [\"7\"]").unwrap().experiment().is_err());
    }
}
