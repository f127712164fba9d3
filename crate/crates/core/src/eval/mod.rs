//! Scoring recoveries against ground truth and Monte-Carlo experiments.

mod config;
mod experiment;
mod maps;
mod matching;

pub use config::{NoiseSection, Preset, RadarSection, RecoverySection, ScenarioConfig, SceneSection, SpectrumSection};
pub use experiment::{
    run_experiment, run_pipeline, Experiment, ExperimentStats, Pipeline, RunSpec, RunStats, SceneSource, TrialRecord,
    TrialSeeds,
};
pub use maps::{emit_maps, map_rows, parse_rad_csv, ppi_csv, rad_csv, MapRow, PPI_HEADER, RAD_HEADER};
pub use matching::{match_detections, DetectionReport};
