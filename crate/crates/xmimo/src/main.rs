use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xampling_mimo::array::ArrayConfig;
use xampling_mimo::budget::{dynamic_range, prototype_reductions, snr_loss_db, AdcSpec};
use xampling_mimo::eval::{
    emit_maps, run_experiment, run_pipeline, DetectionReport, ExperimentStats, RunSpec, ScenarioConfig, TrialSeeds,
};
use xampling_mimo::recovery::{build_dictionaries, recover_tensor, refine};
use xampling_mimo::spectrum::TxPlan;
use xampling_mimo::{ArrayMode, CoefficientTensor, Error, RadarParams, Result, TargetScene};

#[derive(Parser)]
#[command(name = "xmimo", version, about = "Cognitive sub-Nyquist MIMO radar simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw or load a scene and write its noisy coefficient tensor.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Scene CSV instead of a random draw.
        #[arg(long)]
        scene: Option<PathBuf>,
    },
    /// Recover targets from a directory written by `simulate`.
    Recover {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Simulate, recover and score one scene.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scene: Option<PathBuf>,
    },
    /// Monte-Carlo trials of one mode.
    Trials {
        #[command(flatten)]
        common: Common,
    },
    /// Paired Monte-Carlo trials over several modes.
    CompareModes {
        #[command(flatten)]
        common: Common,
        /// Runs such as `1`, `3c`, `mode4-cognitive`; defaults to the
        /// config's list or `1,2,3,3c,4c`.
        #[arg(long, value_delimiter = ',')]
        runs: Vec<RunSpec>,
    },
    /// SNR loss, dynamic range, grid constants and resource reduction.
    Budget {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 30.0)]
        stopband_atten_db: f64,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<ArrayMode>,
    #[arg(long, overrides_with = "non_cognitive")]
    cognitive: bool,
    #[arg(long, overrides_with = "cognitive")]
    non_cognitive: bool,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long)]
    targets: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Off-grid refinement factor.
    #[arg(long)]
    refine: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        if self.mode.is_some() || self.cognitive || self.non_cognitive {
            let base: RunSpec = match cfg.runs.first() {
                Some(s) => s.parse()?,
                None => RunSpec::new(ArrayMode::Mode1, false),
            };
            let run = RunSpec::new(self.mode.unwrap_or(base.mode), if self.cognitive {
                true
            } else if self.non_cognitive {
                false
            } else {
                base.cognitive
            });
            cfg.runs = vec![run.label()];
        }
        if let Some(s) = self.snr_db {
            cfg.noise.snr_db = Some(s);
        }
        if let Some(t) = self.targets {
            cfg.scene.targets = t;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = self.refine {
            cfg.recovery.refine = Some(f);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        Ok(cfg)
    }
}

fn out_dir(cfg: &ScenarioConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
    Ok(dir)
}

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<String> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(name.to_string())
}

fn manifest(command: &str, cfg: &ScenarioConfig, extra: &str, files: &[String]) -> String {
    let mut m = format!("xmimo {}\ncommand = {command}\n", env!("CARGO_PKG_VERSION"));
    m.push_str(extra);
    m.push_str("files =");
    for f in files {
        m.push(' ');
        m.push_str(f);
    }
    m.push_str("\n\n[config]\n");
    m.push_str(&cfg.to_toml());
    m
}

fn single_run(cfg: &ScenarioConfig) -> Result<RunSpec> {
    match cfg.run_specs()?.as_slice() {
        [one] => Ok(*one),
        runs => Err(Error::Config(format!("expected one run, got {}", runs.len()))),
    }
}

fn seeds_line(seeds: &TrialSeeds) -> String {
    format!(
        "scene_seed = {}\narray_seed = {}\nnoise_seed = {}\n",
        seeds.scene, seeds.array, seeds.noise
    )
}

fn report_csv(r: &DetectionReport) -> String {
    let mut out = String::from("kind,truth,estimate,strict\n");
    for &(t, e) in &r.hits {
        let _ = writeln!(out, "hit,{t},{e},{}", r.strict_hits.contains(&(t, e)));
    }
    for t in &r.misses {
        let _ = writeln!(out, "miss,{t},,false");
    }
    for e in &r.false_alarms {
        let _ = writeln!(out, "false_alarm,,{e},false");
    }
    out
}

fn with_scene(mut cfg: ScenarioConfig, scene: &Option<PathBuf>) -> ScenarioConfig {
    if scene.is_some() {
        cfg.scene.file = scene.clone();
    }
    cfg
}

fn simulate(cfg: &ScenarioConfig) -> Result<()> {
    let exp = cfg.experiment()?;
    let run = single_run(cfg)?;
    let seeds = TrialSeeds::derive(cfg.seed, 0);
    let scene = exp.scene.draw(&exp.params, seeds.scene)?;
    let p = run_pipeline(&exp, &run, &scene, seeds.array, seeds.noise)?;
    let dir = out_dir(cfg)?;
    let tensor_path = dir.join("tensor.xmct");
    p.tensor.save(&tensor_path)?;
    // `recover` reads this back; scene paths resolve against its directory.
    let mut saved = cfg.clone();
    if saved.scene.file.is_some() {
        saved.scene.file = Some(PathBuf::from("scene.csv"));
    }
    let files = vec![
        "tensor.xmct".to_string(),
        write(&dir, "scene.csv", &scene.to_csv(&exp.params))?,
        write(&dir, "array.txt", &p.array.to_table(exp.params.wavelength))?,
        write(&dir, "config.toml", &saved.to_toml())?,
    ];
    let extra = format!("run = {run}\n{}", seeds_line(&seeds));
    write(&dir, "manifest.txt", &manifest("simulate", cfg, &extra, &files))?;
    println!("wrote {} to {}", files.join(", "), dir.display());
    Ok(())
}

fn recover_cmd(common: &Common, input: &Path) -> Result<()> {
    let mut common = common.clone();
    if common.config.is_none() {
        common.config = Some(input.join("config.toml"));
    }
    let mut cfg = common.resolve()?;
    if common.out.is_none() {
        cfg.out = Some(input.to_path_buf());
    }
    let exp = cfg.experiment()?;
    let params: RadarParams<f64> = exp.params;
    let tensor = CoefficientTensor::<f64>::load(&input.join("tensor.xmct"))?;
    let table_path = input.join("array.txt");
    let table = fs::read_to_string(&table_path).map_err(|e| io(&table_path, e))?;
    let array = ArrayConfig::<f64>::from_table(&table)?;
    let plan = TxPlan::fdm(&params, &array);
    let dict = build_dictionaries(&params, &array, &plan, &tensor.kappa)?;
    let mut result = recover_tensor(&tensor, &dict, &exp.options)?;
    if let Some(f) = exp.refine {
        result = refine(&result, &tensor, &dict, f)?;
    }
    let dir = out_dir(&cfg)?;
    let mut files = vec![write(&dir, "detections.csv", &result.to_csv(&params))?];
    let scene_path = input.join("scene.csv");
    if let Ok(text) = fs::read_to_string(&scene_path) {
        let truth = TargetScene::from_csv(&text, &params)?;
        let report = xampling_mimo::match_detections(&truth, &result, &dict.grid);
        files.push(write(&dir, "report.csv", &report_csv(&report))?);
        emit_maps(&result, &truth, &params, &dir)?;
        files.extend(["ppi.csv".to_string(), "rad.csv".to_string()]);
        println!(
            "{} hits ({} strict), {} misses, {} false alarms",
            report.hits.len(),
            report.strict_hits.len(),
            report.misses.len(),
            report.false_alarms.len()
        );
    }
    write(&dir, "recover_manifest.txt", &manifest("recover", &cfg, "", &files))?;
    Ok(())
}

fn run_cmd(cfg: &ScenarioConfig) -> Result<()> {
    let exp = cfg.experiment()?;
    let run = single_run(cfg)?;
    let seeds = TrialSeeds::derive(cfg.seed, 0);
    let scene = exp.scene.draw(&exp.params, seeds.scene)?;
    let p = run_pipeline(&exp, &run, &scene, seeds.array, seeds.noise)?;
    let dir = out_dir(cfg)?;
    let mut files = vec![
        write(&dir, "scene.csv", &scene.to_csv(&exp.params))?,
        write(&dir, "array.txt", &p.array.to_table(exp.params.wavelength))?,
        write(&dir, "detections.csv", &p.result.to_csv(&exp.params))?,
        write(&dir, "report.csv", &report_csv(&p.report))?,
    ];
    emit_maps(&p.result, &scene, &exp.params, &dir)?;
    files.extend(["ppi.csv".to_string(), "rad.csv".to_string()]);
    let extra = format!("run = {run}\n{}", seeds_line(&seeds));
    write(&dir, "manifest.txt", &manifest("run", cfg, &extra, &files))?;
    println!(
        "{run}: {} hits ({} strict), {} misses, {} false alarms",
        p.report.hits.len(),
        p.report.strict_hits.len(),
        p.report.misses.len(),
        p.report.false_alarms.len()
    );
    Ok(())
}

fn experiment_cmd(name: &str, cfg: &ScenarioConfig) -> Result<()> {
    let exp = cfg.experiment()?;
    let stats: ExperimentStats = run_experiment(&exp, cfg.trials, cfg.seed)?;
    let dir = out_dir(cfg)?;
    let files = vec![
        write(&dir, "summary.csv", &stats.summary_csv())?,
        write(&dir, "histogram.csv", &stats.histogram_csv())?,
        write(&dir, "trials.csv", &stats.trials_csv())?,
    ];
    write(&dir, "manifest.txt", &manifest(name, cfg, "", &files))?;
    print!("{}", stats.summary_csv());
    Ok(())
}

fn budget(out: &Option<PathBuf>, atten: f64) -> Result<()> {
    let adc = AdcSpec::<f64>::prototype();
    let dr = dynamic_range(&adc);
    let p = RadarParams::<f64>::prototype();
    let wide = p.wide_reference;
    let mut text = String::from("quantity,value\n");
    let rows = [
        ("snr_loss_db", snr_loss_db(4.0, atten)),
        ("stopband_atten_db", atten),
        ("dynamic_range_db", dr.range_db),
        ("dynamic_range_low_dbm", dr.lower_dbm),
        ("range_cell_m", p.range_cell()),
        ("azimuth_cell_modes_1_3", 2.0 / p.azimuth_bins() as f64),
        ("azimuth_cell_mode_4", 2.0 / (wide.0 * wide.1) as f64),
        ("unambiguous_range_m", p.unambiguous_range()),
        ("max_velocity_mps", p.max_velocity()),
    ];
    for (k, v) in rows {
        let _ = writeln!(text, "{k},{v}");
    }
    let mut red = String::from("comparison,resource,reference,reduced,reduction_pct\n");
    for (name, rows) in prototype_reductions() {
        for r in rows {
            let _ = writeln!(
                red,
                "{name},{},{},{},{:.2}",
                r.resource,
                r.reference,
                r.reduced,
                100.0 * r.reduction
            );
        }
    }
    print!("{text}\n{red}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        write(dir, "budget.csv", &text)?;
        write(dir, "reductions.csv", &red)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { common, scene } => simulate(&with_scene(common.resolve()?, scene)),
        Command::Recover { common, input } => recover_cmd(common, input),
        Command::Run { common, scene } => run_cmd(&with_scene(common.resolve()?, scene)),
        Command::Trials { common } => {
            let c = common.resolve()?;
            single_run(&c)?;
            experiment_cmd("trials", &c)
        }
        Command::CompareModes { common, runs } => {
            let mut c = common.resolve()?;
            if !runs.is_empty() {
                c.runs = runs.iter().map(RunSpec::label).collect();
            } else if common.config.is_none() && common.mode.is_none() && !common.cognitive && !common.non_cognitive {
                c.runs = DEFAULT_COMPARISON.map(String::from).to_vec();
            }
            experiment_cmd("compare-modes", &c)
        }
        Command::Budget { out, stopband_atten_db } => budget(out, *stopband_atten_db),
    }
}

const DEFAULT_COMPARISON: [&str; 5] = ["1", "2", "3", "3c", "4c"];

fn main() -> ExitCode {
    match execute(&Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("xmimo").chain(args.iter().copied())).unwrap()
    }

    fn common(cli: &Cli) -> &Common {
        match &cli.command {
            Command::Run { common, .. } | Command::Trials { common } => common,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_defaults() {
        let c = cli(&["run", "--mode", "3", "--cognitive", "--snr-db", "-12.5", "--targets", "4", "--seed", "9"]);
        let cfg = common(&c).resolve().unwrap();
        assert_eq!(cfg.runs, vec!["mode3-cognitive".to_string()]);
        assert_eq!(cfg.noise.snr_db, Some(-12.5));
        assert_eq!((cfg.scene.targets, cfg.seed), (4, 9));
        let c = cli(&["trials", "--cognitive", "--non-cognitive"]);
        assert_eq!(common(&c).resolve().unwrap().runs, vec!["mode1-non-cognitive".to_string()]);
    }

    #[test]
    fn config_file_is_read_then_overridden() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.toml");
        fs::write(&path, "seed = 4\ntrials = 3\nruns = [\"2\"]\n[scene]\ntargets = 2\n").unwrap();
        let c = cli(&["trials", "--config", path.to_str().unwrap(), "--trials", "5"]);
        let cfg = common(&c).resolve().unwrap();
        assert_eq!((cfg.seed, cfg.trials, cfg.scene.targets), (4, 5, 2));
        assert_eq!(cfg.runs, vec!["2".to_string()]);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(Cli::try_parse_from(["xmimo", "run", "--mode", "5"]).is_err());
        assert!(Cli::try_parse_from(["xmimo", "frobnicate"]).is_err());
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let missing = dir.path().join("nope.toml");
        assert!(execute(&cli(&["run", "--config", missing.to_str().unwrap(), "--out", out])).is_err());
        let bad = dir.path().join("bad.toml");
        fs::write(&bad, "runs = [\"1\", \"2\"]\n").unwrap();
        assert!(execute(&cli(&["run", "--config", bad.to_str().unwrap(), "--out", out])).is_err());
    }

    #[test]
    fn report_rows() {
        let r = DetectionReport {
            hits: vec![(0, 1), (1, 0)],
            misses: vec![2],
            false_alarms: vec![2],
            strict_hits: vec![(0, 1)],
        };
        assert_eq!(
            report_csv(&r),
            "kind,truth,estimate,strict\nhit,0,1,true\nhit,1,0,false\nmiss,2,,false\nfalse_alarm,,2,false\n"
        );
    }

    #[test]
    fn simulate_then_recover_finds_the_scene() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sim");
        let out_s = out.to_str().unwrap();
        execute(&cli(&["simulate", "--mode", "2", "--targets", "3", "--seed", "2", "--out", out_s])).unwrap();
        for f in ["tensor.xmct", "scene.csv", "array.txt", "config.toml", "manifest.txt"] {
            assert!(out.join(f).exists(), "{f}");
        }
        execute(&cli(&["recover", "--input", out_s])).unwrap();
        let report = fs::read_to_string(out.join("report.csv")).unwrap();
        assert_eq!(report.lines().filter(|l| l.starts_with("hit,")).count(), 3);
        assert!(out.join("ppi.csv").exists());
    }

    #[test]
    fn simulate_with_scene_file_resolves_on_recover() {
        let dir = tempfile::tempdir().unwrap();
        let scene = dir.path().join("scene.csv");
        fs::write(&scene, xampling_mimo::scene::TEN_TARGETS_CSV).unwrap();
        let out = dir.path().join("sim");
        let out_s = out.to_str().unwrap();
        execute(&cli(&["simulate", "--scene", scene.to_str().unwrap(), "--out", out_s])).unwrap();
        execute(&cli(&["recover", "--input", out_s])).unwrap();
        let report = fs::read_to_string(out.join("report.csv")).unwrap();
        assert_eq!(report.lines().filter(|l| l.starts_with("hit,")).count(), 10);
    }

    #[test]
    fn budget_writes_tables() {
        let dir = tempfile::tempdir().unwrap();
        budget(&Some(dir.path().to_path_buf()), 30.0).unwrap();
        let text = fs::read_to_string(dir.path().join("budget.csv")).unwrap();
        assert!(text.contains("range_cell_m,1.25"));
        let red = fs::read_to_string(dir.path().join("reductions.csv")).unwrap();
        assert_eq!(red.lines().count(), 15);
    }
}
