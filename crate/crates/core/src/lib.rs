//! Simulation and recovery for a sub-Nyquist colocated MIMO radar with
//! cognitive transmission. Everything numeric is generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix the scalar.

pub mod array;
pub mod budget;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod num;
pub mod params;
pub mod recovery;
pub mod scene;
pub mod spectrum;
pub mod synthesis;

pub use array::{build_array, check_recovery_conditions, compute_beta, ArrayConfig, ArrayMode, RecoveryConditions};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use num::Real;
pub use params::RadarParams;
pub use spectrum::{alias_map, coefficient_set, mutual_coherence, AliasMap, Band, CognitiveSpectrum, TxPlan};
pub use scene::{random_scene, AmplitudeModel, Grid, GridIndex, SceneSpec, Target, TargetScene};
pub use synthesis::{add_noise, synthesize, CoefficientTensor, NoiseSpec};
pub use budget::{dynamic_range, snr_loss_db, AdcSpec};
pub use recovery::{
    build_dictionaries, doppler_focus, recover, recover_tensor, refine, Combining, Detection, Dictionaries,
    FocusedTensor, RecoveryOptions, RecoveryResult, StopRule,
};
pub use eval::{match_detections, run_experiment, DetectionReport, Experiment, ExperimentStats, RunSpec, ScenarioConfig};

pub type RadarParams64 = RadarParams<f64>;
pub type RadarParams32 = RadarParams<f32>;
pub type ArrayConfig64 = ArrayConfig<f64>;
pub type ArrayConfig32 = ArrayConfig<f32>;
pub type CognitiveSpectrum64 = CognitiveSpectrum<f64>;
pub type CognitiveSpectrum32 = CognitiveSpectrum<f32>;
pub type TxPlan64 = TxPlan<f64>;
pub type TxPlan32 = TxPlan<f32>;
pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type TargetScene64 = TargetScene<f64>;
pub type TargetScene32 = TargetScene<f32>;
pub type CoefficientTensor64 = CoefficientTensor<f64>;
pub type CoefficientTensor32 = CoefficientTensor<f32>;
pub type Dictionaries64 = Dictionaries<f64>;
pub type Dictionaries32 = Dictionaries<f32>;
pub type RecoveryResult64 = RecoveryResult<f64>;
pub type RecoveryResult32 = RecoveryResult<f32>;
pub type Experiment64 = Experiment<f64>;
pub type Experiment32 = Experiment<f32>;
