//! Stage orchestration with on-disk artifacts and resume.

use std::fs;
use std::path::{Path, PathBuf};

use crate::codegen::{build_trees, deserialize, emit_c, expert_merge, serialize, Choice, MergeOutcome, TuningTrees};
use crate::driver::SampleStore;
use crate::error::{Error, Result};
use crate::optimize::{optimize_grid, read_points_csv, write_points_csv, OptimizedPoint};
use crate::pipeline::config::{design_from_json, BaselineConfig, Experiment, ExperimentConfig};
use crate::pipeline::validate::{read_reference_csv, validate, Baseline, ValidationReport};
use crate::sampling::adaptive_sampling;
use crate::scalar::fmt_real;
use crate::space::{ParameterSpace, ParameterSpec};
use crate::surrogate::GbdtModel;

pub const CONFIG: &str = "config.json";
pub const SAMPLES: &str = "samples.csv";
pub const MODEL: &str = "model.txt";
pub const POINTS: &str = "optimized_points.csv";
pub const TREES: &str = "trees.txt";
pub const C_SOURCE: &str = "trees.c";
pub const VALIDATION: &str = "validation.csv";
pub const REPORT: &str = "report.txt";

/// What a run or resume did.
#[derive(Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    /// Stages executed, in order; empty when the run was already complete.
    pub ran: Vec<&'static str>,
    pub samples: usize,
    pub report: Option<ValidationReport>,
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Starts a run in `cfg.output_dir`. A directory holding the same
/// configuration is resumed; a different one is refused.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let exp = cfg.resolve()?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let config_path = dir.join(CONFIG);
    let text = cfg.to_json();
    if config_path.exists() {
        let existing = ExperimentConfig::from_json(&fs::read_to_string(&config_path)?)?;
        if existing != *cfg {
            return Err(Error::InvalidArgument(format!(
                "{} holds a different configuration; use a fresh output directory or `resume`",
                dir.display()
            )));
        }
    } else {
        write_atomic(&config_path, text.as_bytes())?;
    }
    execute(cfg, &exp, &dir)
}

/// Loads the configuration stored in `dir`, with its output directory
/// pointed at `dir`.
pub fn load_run_config(dir: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_json(&fs::read_to_string(dir.join(CONFIG))?)?;
    cfg.output_dir = dir.to_path_buf();
    Ok(cfg)
}

/// Continues an interrupted run: unfinished sampling is completed and every
/// missing artifact, plus everything downstream of it, is regenerated.
pub fn resume(dir: &Path, jobs: Option<usize>) -> Result<RunSummary> {
    let mut cfg = load_run_config(dir)?;
    if let Some(j) = jobs {
        cfg.jobs = j;
    }
    let exp = cfg.resolve()?;
    let summary = execute(&cfg, &exp, dir)?;
    if summary.ran.is_empty() {
        log::info!("{}: run already complete", dir.display());
    }
    Ok(summary)
}

pub fn baseline_of(cfg: &ExperimentConfig, space: &ParameterSpace) -> Result<Baseline> {
    match &cfg.validation.baseline {
        BaselineConfig::Design(map) => Ok(Baseline::Fixed(design_from_json(space, map)?)),
        BaselineConfig::Reference(path) => {
            let file = fs::File::open(path).map_err(|e| Error::Config {
                path: "validation.baseline.reference".into(),
                msg: format!("{}: {e}", path.display()),
            })?;
            Ok(Baseline::Reference(read_reference_csv(space, file)?))
        }
    }
}

fn load_trees(dir: &Path, space: &ParameterSpace) -> Result<TuningTrees> {
    let trees = deserialize(&fs::read_to_string(dir.join(TREES))?)?;
    if !trees.matches(space) {
        return Err(Error::Malformed(format!("{} does not match the configured space", TREES)));
    }
    Ok(trees)
}

fn report_text(cfg: &ExperimentConfig, store: &SampleStore, report: &ValidationReport) -> String {
    let count = |s: &str| store.records().iter().filter(|r| r.status.as_str() == s).count();
    format!(
        "sampler: {}\nsamples: {} (ok {}, clipped {}, failed {}, timeout {})\nseed: {}\n\n{}",
        cfg.sampler.kind.as_str(),
        store.len(),
        count("ok"),
        count("clipped"),
        count("failed"),
        count("timeout"),
        cfg.seed,
        report.summary()
    )
}

fn execute(cfg: &ExperimentConfig, exp: &Experiment, dir: &Path) -> Result<RunSummary> {
    let space = &exp.space;
    let jobs = cfg.jobs.max(1);
    let mut ran: Vec<&'static str> = Vec::new();
    let missing = |name: &str| !dir.join(name).exists();

    // sample
    let samples_path = dir.join(SAMPLES);
    let mut store = if samples_path.exists() {
        SampleStore::load(&samples_path, space).map_err(|e| e.in_stage("sample"))?
    } else {
        SampleStore::new(space)
    };
    if store.len() < exp.sampling.schedule.n {
        let mut persist = |s: &SampleStore| s.persist(space, &samples_path);
        let (done, _) = adaptive_sampling(exp.sampler, space, exp.kernel.as_ref(), &exp.sampling, store, &mut persist)
            .map_err(|e| e.in_stage("sample"))?;
        store = done;
        ran.push("sample");
    }

    // model
    let model = if !ran.is_empty() || missing(MODEL) {
        let train: Vec<_> = store.training_records().collect();
        let rows = train.iter().map(|r| space.encode::<f64>(&r.config)).collect::<Result<Vec<_>>>()?;
        let ys: Vec<f64> = train.iter().map(|r| r.objective).collect();
        if rows.len() < 2 {
            return Err(Error::InsufficientSamples { needed: 2, have: rows.len() }.in_stage("model"));
        }
        let model = GbdtModel::fit(&rows, &ys, &space.categorical_dims(), &exp.train).map_err(|e| e.in_stage("model"))?;
        write_atomic(&dir.join(MODEL), model.to_text().as_bytes())?;
        ran.push("model");
        model
    } else {
        GbdtModel::<f64>::from_text(&fs::read_to_string(dir.join(MODEL))?).map_err(|e| e.in_stage("model"))?
    };

    // optimize
    let points: Vec<OptimizedPoint> = if !ran.is_empty() || missing(POINTS) {
        let grid = space.input_grid(&cfg.optimization_grid).map_err(|e| e.in_stage("optimize"))?;
        let points = optimize_grid(&model, space, &grid, &exp.ga, jobs).map_err(|e| e.in_stage("optimize"))?;
        let mut buf = Vec::new();
        write_points_csv(space, &points, &mut buf)?;
        write_atomic(&dir.join(POINTS), &buf)?;
        ran.push("optimize");
        points
    } else {
        read_points_csv(space, fs::File::open(dir.join(POINTS))?).map_err(|e| e.in_stage("optimize"))?
    };

    // trees
    let trees = if !ran.is_empty() || missing(TREES) {
        let trees = build_trees(&points, space, cfg.tree_depth).map_err(|e| e.in_stage("trees"))?;
        write_atomic(&dir.join(TREES), serialize(&trees).as_bytes())?;
        ran.push("trees");
        trees
    } else {
        load_trees(dir, space).map_err(|e| e.in_stage("trees"))?
    };

    // emit
    if !ran.is_empty() || missing(C_SOURCE) {
        let src = emit_c(&trees, &cfg.c_prefix).map_err(|e| e.in_stage("emit"))?;
        write_atomic(&dir.join(C_SOURCE), src.as_bytes())?;
        ran.push("emit");
    }

    // validate + report
    let mut report = None;
    if !ran.is_empty() || missing(VALIDATION) || missing(REPORT) {
        let r = run_validation(cfg, exp, dir, &trees, &store, &cfg.validation.grid).map_err(|e| e.in_stage("validate"))?;
        ran.push("validate");
        report = Some(r);
    }
    Ok(RunSummary { dir: dir.to_path_buf(), ran, samples: store.len(), report })
}

fn run_validation(
    cfg: &ExperimentConfig,
    exp: &Experiment,
    dir: &Path,
    trees: &TuningTrees,
    store: &SampleStore,
    grid_dims: &[usize],
) -> Result<ValidationReport> {
    let space = &exp.space;
    let grid = space.input_grid(grid_dims)?;
    let baseline = baseline_of(cfg, space)?;
    let report = validate(space, trees, &baseline, &grid, exp.kernel.as_ref(), &exp.policy, cfg.jobs)?;
    let mut buf = Vec::new();
    report.write_csv(space, &mut buf)?;
    write_atomic(&dir.join(VALIDATION), &buf)?;
    write_atomic(&dir.join(REPORT), report_text(cfg, store, &report).as_bytes())?;
    Ok(report)
}

/// Re-validates a finished run, optionally on a different grid.
pub fn validate_dir(dir: &Path, grid: Option<Vec<usize>>, jobs: Option<usize>) -> Result<ValidationReport> {
    let mut cfg = load_run_config(dir)?;
    if let Some(j) = jobs {
        cfg.jobs = j;
    }
    let exp = cfg.resolve()?;
    let store = SampleStore::load(&dir.join(SAMPLES), &exp.space)?;
    let trees = load_trees(dir, &exp.space)?;
    let dims = grid.unwrap_or_else(|| cfg.validation.grid.clone());
    run_validation(&cfg, &exp, dir, &trees, &store, &dims)
}

/// Rewrites `trees.c` with a different symbol prefix and returns the source.
pub fn emit_c_dir(dir: &Path, prefix: &str) -> Result<String> {
    let cfg = load_run_config(dir)?;
    let exp = cfg.resolve()?;
    let src = emit_c(&load_trees(dir, &exp.space)?, prefix)?;
    write_atomic(&dir.join(C_SOURCE), src.as_bytes())?;
    Ok(src)
}

pub const MERGED_TREES: &str = "merged_trees.txt";
pub const MERGED_C: &str = "merged_trees.c";
pub const MERGE_TABLE: &str = "merge.csv";

/// Merges the run's trees with a reference table: every listed input is
/// labelled with the better of the two designs and the trees are retrained.
pub fn merge_dir(dir: &Path, reference: &Path, jobs: Option<usize>) -> Result<MergeOutcome> {
    let mut cfg = load_run_config(dir)?;
    if let Some(j) = jobs {
        cfg.jobs = j;
    }
    let exp = cfg.resolve()?;
    let space = &exp.space;
    let table = read_reference_csv(space, fs::File::open(reference)?)?;
    let (inputs, designs): (Vec<_>, Vec<_>) = table.into_iter().unzip();
    let candidate = load_trees(dir, space)?;
    let merged = expert_merge(space, &inputs, &candidate, &designs, exp.kernel.as_ref(), &exp.policy, cfg.tree_depth, cfg.jobs)?;
    write_atomic(&dir.join(MERGED_TREES), serialize(&merged.trees).as_bytes())?;
    write_atomic(&dir.join(MERGED_C), emit_c(&merged.trees, &cfg.c_prefix)?.as_bytes())?;

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header: Vec<String> = space.input_specs().map(|p| p.name.clone()).collect();
    header.extend(["candidate_objective", "reference_objective", "choice"].map(String::from));
    w.write_record(&header)?;
    for row in &merged.rows {
        let mut rec: Vec<String> = row.inputs.iter().map(ParameterSpec::format_value).collect();
        rec.push(fmt_real(row.candidate.objective));
        rec.push(fmt_real(row.reference.objective));
        rec.push(
            match row.choice {
                Choice::Candidate => "candidate",
                Choice::Reference => "reference",
                Choice::Dropped => "dropped",
            }
            .into(),
        );
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(&dir.join(MERGE_TABLE), &bytes)?;
    Ok(merged)
}
