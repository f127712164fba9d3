use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matching::{match_detections, DetectionReport};
use crate::array::{build_array, ArrayConfig, ArrayMode};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::params::RadarParams;
use crate::recovery::{build_dictionaries, recover_tensor, refine, RecoveryOptions, RecoveryResult};
use crate::scene::{random_scene, Grid, SceneSpec, TargetScene};
use crate::spectrum::{reference_bands, Band, CognitiveSpectrum, TxPlan};
use crate::synthesis::{add_noise, synthesize, CoefficientTensor, NoiseSpec};

/// One array mode with its transmit policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunSpec {
    pub mode: ArrayMode,
    /// Concentrate transmit power in the sampled subbands. Only Modes 3
    /// and 4 sample a subset of the band, so Modes 1 and 2 ignore it.
    pub cognitive: bool,
}

impl RunSpec {
    pub fn new(mode: ArrayMode, cognitive: bool) -> Self {
        Self { mode, cognitive }
    }

    pub fn label(&self) -> String {
        format!(
            "mode{}-{}",
            self.mode.id(),
            if self.cognitive { "cognitive" } else { "non-cognitive" }
        )
    }

    /// Coefficients the receivers see for this run. Nyquist modes get the
    /// whole band; sub-Nyquist modes get the subbands, scaled by the
    /// cognitive gain only when transmitting cognitively.
    pub fn spectrum<T: Real>(&self, params: &RadarParams<T>, bands: &[Band<T>]) -> Result<CognitiveSpectrum<T>> {
        if !self.mode.temporal_sub_nyquist() {
            return CognitiveSpectrum::full(params.bandwidth, params.pri);
        }
        let spec = CognitiveSpectrum::build(params.bandwidth, bands.to_vec(), params.pri)?;
        Ok(if self.cognitive { spec } else { spec.non_cognitive() })
    }
}

impl fmt::Display for RunSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for RunSpec {
    type Err = Error;

    /// `3`, `3c` / `3-cognitive` or `mode3-non-cognitive`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches("mode");
        let (id, rest) = t.split_at(t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len()));
        let mode: ArrayMode = id.parse()?;
        let cognitive = match rest.trim_start_matches('-') {
            "" | "n" | "non-cognitive" => false,
            "c" | "cognitive" => true,
            other => return Err(Error::Parse(format!("unknown run suffix {other:?} in {s:?}"))),
        };
        Ok(Self { mode, cognitive })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneSource<T> {
    /// Fresh scene on the reference grid every trial.
    Random(SceneSpec<T>),
    Fixed(TargetScene<T>),
}

impl<T: Real> SceneSource<T> {
    pub fn targets(&self) -> usize {
        match self {
            SceneSource::Random(s) => s.targets,
            SceneSource::Fixed(s) => s.len(),
        }
    }

    pub fn draw(&self, params: &RadarParams<T>, seed: u64) -> Result<TargetScene<T>> {
        match self {
            SceneSource::Random(spec) => random_scene(spec, &Grid::reference(params), seed),
            SceneSource::Fixed(scene) => Ok(scene.clone()),
        }
    }
}

/// Everything one Monte-Carlo experiment needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment<T> {
    pub params: RadarParams<T>,
    pub runs: Vec<RunSpec>,
    /// Sampled subbands of the sub-Nyquist modes.
    pub bands: Vec<Band<T>>,
    pub scene: SceneSource<T>,
    /// Per-coefficient SNR; `+inf` for noiseless runs.
    pub snr_db: T,
    /// Extra noise power of the subsampling modes, in dB.
    pub folding_loss_db: T,
    pub options: RecoveryOptions<T>,
    pub refine: Option<usize>,
}

impl<T: Real> Experiment<T> {
    /// Reference subbands, `L` random targets, known-`L` recovery.
    pub fn new(params: RadarParams<T>, runs: Vec<RunSpec>, targets: usize, snr_db: T) -> Self {
        Self {
            bands: reference_bands(params.bandwidth),
            params,
            runs,
            scene: SceneSource::Random(SceneSpec::new(targets, T::zero())),
            snr_db,
            folding_loss_db: T::zero(),
            options: RecoveryOptions::targets(targets),
            refine: None,
        }
    }

    fn noise(&self, run: &RunSpec, seed: u64) -> NoiseSpec<T> {
        let mut n = NoiseSpec::new(self.snr_db, seed);
        if run.mode.temporal_sub_nyquist() {
            n.folding_loss_db = self.folding_loss_db;
        }
        n
    }
}

/// Seeds of one trial, shared by every run in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialSeeds {
    pub scene: u64,
    pub array: u64,
    pub noise: u64,
}

impl TrialSeeds {
    /// Independent stream `trial` of the master seed.
    pub fn derive(master: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(trial);
        Self {
            scene: rng.random(),
            array: rng.random(),
            noise: rng.random(),
        }
    }
}

/// Intermediate products of a single end-to-end run.
#[derive(Debug, Clone)]
pub struct Pipeline<T> {
    pub array: ArrayConfig<T>,
    pub plan: TxPlan<T>,
    pub spectrum: CognitiveSpectrum<T>,
    pub grid: Grid<T>,
    pub tensor: CoefficientTensor<T>,
    pub result: RecoveryResult<T>,
    pub report: DetectionReport,
}

/// Synthesizes `scene` for `run`, adds noise, recovers and matches.
pub fn run_pipeline<T: Real>(
    exp: &Experiment<T>,
    run: &RunSpec,
    scene: &TargetScene<T>,
    array_seed: u64,
    noise_seed: u64,
) -> Result<Pipeline<T>> {
    let params = &exp.params;
    let array = build_array(params, run.mode, array_seed)?;
    let plan = TxPlan::fdm(params, &array);
    let spectrum = run.spectrum(params, &exp.bands)?;
    let clean = synthesize(scene, &array, &plan, &spectrum, params)?;
    let tensor = add_noise(&clean, &exp.noise(run, noise_seed))?;
    let dict = build_dictionaries(params, &array, &plan, spectrum.kappa())?;
    let mut result = recover_tensor(&tensor, &dict, &exp.options)?;
    if let Some(f) = exp.refine {
        result = refine(&result, &tensor, &dict, f)?;
    }
    let grid = dict.grid;
    let report = match_detections(scene, &result, &grid);
    Ok(Pipeline {
        array,
        plan,
        spectrum,
        grid,
        tensor,
        result,
        report,
    })
}

/// One (trial, run) outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub run: String,
    pub seeds: TrialSeeds,
    pub targets: usize,
    pub hits: usize,
    pub strict_hits: usize,
    pub misses: usize,
    pub false_alarms: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub run: RunSpec,
    pub trials: usize,
    pub failures: usize,
    /// `histogram[h]` is the fraction of successful trials with `h` hits.
    pub histogram: Vec<f64>,
    pub mean_pd: f64,
    pub mean_strict_pd: f64,
    pub mean_false_alarms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub trials: usize,
    pub master_seed: u64,
    pub runs: Vec<RunStats>,
    pub records: Vec<TrialRecord>,
}

/// Paired Monte-Carlo trials: within a trial every run sees the same
/// scene, array seed and noise seed. Trials run in parallel; results do
/// not depend on scheduling. Errors inside a trial are recorded; more than
/// 10% failed trials is an experiment error.
pub fn run_experiment<T: Real>(exp: &Experiment<T>, trials: usize, master_seed: u64) -> Result<ExperimentStats> {
    if exp.runs.is_empty() {
        return Err(Error::Config("experiment has no runs".into()));
    }
    exp.params.validate()?;
    let records: Vec<Vec<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seeds = TrialSeeds::derive(master_seed, trial as u64);
            let scene = exp.scene.draw(&exp.params, seeds.scene);
            exp.runs
                .iter()
                .map(|run| {
                    let mut rec = TrialRecord {
                        trial,
                        run: run.label(),
                        seeds,
                        targets: exp.scene.targets(),
                        hits: 0,
                        strict_hits: 0,
                        misses: 0,
                        false_alarms: 0,
                        error: None,
                    };
                    let out = scene
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|s| run_pipeline(exp, run, s, seeds.array, seeds.noise).map_err(|e| e.to_string()));
                    match out {
                        Ok(p) => {
                            rec.targets = p.report.hits.len() + p.report.misses.len();
                            rec.hits = p.report.hits.len();
                            rec.strict_hits = p.report.strict_hits.len();
                            rec.misses = p.report.misses.len();
                            rec.false_alarms = p.report.false_alarms.len();
                        }
                        Err(e) => rec.error = Some(e),
                    }
                    rec
                })
                .collect()
        })
        .collect();

    let failed: Vec<&TrialRecord> = records
        .iter()
        .filter_map(|r| r.iter().find(|x| x.error.is_some()))
        .collect();
    if failed.len() * 10 > trials {
        return Err(Error::Experiment {
            failed: failed.len(),
            trials,
            first: failed[0].error.clone().unwrap_or_default(),
        });
    }
    let records: Vec<TrialRecord> = records.into_iter().flatten().collect();
    let runs = exp
        .runs
        .iter()
        .map(|run| {
            let label = run.label();
            let mine: Vec<&TrialRecord> = records.iter().filter(|r| r.run == label).collect();
            let ok: Vec<&&TrialRecord> = mine.iter().filter(|r| r.error.is_none()).collect();
            let n = ok.len().max(1) as f64;
            let max_hits = ok.iter().map(|r| r.targets).max().unwrap_or(exp.scene.targets());
            let mut histogram = vec![0.0; max_hits + 1];
            for r in &ok {
                histogram[r.hits] += 1.0 / n;
            }
            let rate = |h: usize, t: usize| if t == 0 { 1.0 } else { h as f64 / t as f64 };
            RunStats {
                run: *run,
                trials: mine.len(),
                failures: mine.len() - ok.len(),
                histogram,
                mean_pd: ok.iter().map(|r| rate(r.hits, r.targets)).sum::<f64>() / n,
                mean_strict_pd: ok.iter().map(|r| rate(r.strict_hits, r.targets)).sum::<f64>() / n,
                mean_false_alarms: ok.iter().map(|r| r.false_alarms as f64).sum::<f64>() / n,
            }
        })
        .collect();
    Ok(ExperimentStats {
        trials,
        master_seed,
        runs,
        records,
    })
}

impl ExperimentStats {
    pub fn run(&self, run: RunSpec) -> Option<&RunStats> {
        self.runs.iter().find(|r| r.run == run)
    }

    /// `run,trials,failures,mean_pd,mean_strict_pd,mean_false_alarms`
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("run,trials,failures,mean_pd,mean_strict_pd,mean_false_alarms\n");
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.run, r.trials, r.failures, r.mean_pd, r.mean_strict_pd, r.mean_false_alarms
            );
        }
        out
    }

    /// `run,detected,targets,fraction`, one row per histogram bar.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("run,detected,targets,fraction\n");
        for r in &self.runs {
            let l = r.histogram.len() - 1;
            for (h, f) in r.histogram.iter().enumerate().rev() {
                let _ = writeln!(out, "{},{h},{l},{f}", r.run);
            }
        }
        out
    }

    /// `trial,run,scene_seed,array_seed,noise_seed,targets,hits,strict_hits,misses,false_alarms,error`
    pub fn trials_csv(&self) -> String {
        let mut out = String::from(
            "trial,run,scene_seed,array_seed,noise_seed,targets,hits,strict_hits,misses,false_alarms,error\n",
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.trial,
                r.run,
                r.seeds.scene,
                r.seeds.array,
                r.seeds.noise,
                r.targets,
                r.hits,
                r.strict_hits,
                r.misses,
                r.false_alarms,
                r.error.as_deref().unwrap_or("").replace(',', ";")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RadarParams<f64> {
        let p = RadarParams::new(2, 4, 1e-6, 4, 16e6, 10e9).unwrap();
        RadarParams { wide_reference: (4, 4), ..p }
    }

    #[test]
    fn single_noiseless_trial_detects_everything() {
        let exp = Experiment::new(small(), vec![RunSpec::new(ArrayMode::Mode1, false)], 2, f64::INFINITY);
        let stats = run_experiment(&exp, 1, 11).unwrap();
        let r = &stats.runs[0];
        assert_eq!(r.histogram, vec![0.0, 0.0, 1.0]);
        assert_eq!(r.mean_pd, 1.0);
        assert_eq!(r.mean_strict_pd, 1.0);
    }

    #[test]
    fn repeatable_and_paired() {
        let runs = vec![
            RunSpec::new(ArrayMode::Mode1, false),
            RunSpec::new(ArrayMode::Mode2, false),
        ];
        let exp = Experiment::new(small(), runs, 2, 0.0);
        let a = run_experiment(&exp, 6, 5).unwrap();
        let b = run_experiment(&exp, 6, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials_csv(), b.trials_csv());
        for pair in a.records.chunks(2) {
            assert_eq!(pair[0].trial, pair[1].trial);
            assert_eq!(pair[0].seeds, pair[1].seeds);
        }
        for r in &a.runs {
            assert!((r.histogram.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeds_differ_between_trials() {
        assert_ne!(TrialSeeds::derive(1, 0), TrialSeeds::derive(1, 1));
        assert_eq!(TrialSeeds::derive(1, 3), TrialSeeds::derive(1, 3));
    }

    #[test]
    fn failing_trials_raise() {
        let mut exp = Experiment::new(small(), vec![RunSpec::new(ArrayMode::Mode1, false)], 2, 0.0);
        exp.scene = SceneSource::Random(SceneSpec::new(2, 5.0));
        assert!(matches!(run_experiment(&exp, 3, 0), Err(Error::Experiment { failed: 3, .. })));
    }

    #[test]
    fn run_labels_parse() {
        for run in [RunSpec::new(ArrayMode::Mode3, true), RunSpec::new(ArrayMode::Mode1, false)] {
            assert_eq!(run.label().parse::<RunSpec>().unwrap(), run);
        }
        assert_eq!("4c".parse::<RunSpec>().unwrap(), RunSpec::new(ArrayMode::Mode4, true));
        assert!("9".parse::<RunSpec>().is_err());
    }
}
