//! Experiment configuration: a JSON document, validated with precise error
//! paths, resolved into the objects the stages need.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::codegen::DEFAULT_MAX_DEPTH;
use crate::driver::{Aggregate, ArgStyle, Kernel, KernelCommand, ObjectivePolicy};
use crate::error::{Error, Result};
use crate::optimize::GaConfig;
use crate::pipeline::kernels::{Builtin, BuiltinName};
use crate::sampling::{AdaptiveOptions, HvsMode, HvsParams, SamplerKind, ScheduleParams, SubSampler};
use crate::seed::{self, Stream};
use crate::space::{BoundReformulation, ParamDecl, ParameterSpace, Value};
use crate::surrogate::{Loss, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Required for command kernels; builtins declare their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<ParamDecl>>,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub surrogate: SurrogateSection,
    /// Genetic search used on the optimization grid.
    #[serde(default)]
    pub ga: GaSection,
    /// Genetic search used inside adaptive sampling; defaults to `ga`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_ga: Option<GaSection>,
    pub optimization_grid: Vec<usize>,
    #[serde(default = "default_depth")]
    pub tree_depth: usize,
    pub validation: ValidationConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    pub output_dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub c_prefix: String,
    #[serde(default)]
    pub bench: BenchConfig,
}

fn default_depth() -> usize {
    DEFAULT_MAX_DEPTH
}

fn default_jobs() -> usize {
    1
}

fn default_prefix() -> String {
    "tune".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelConfig {
    Builtin {
        name: String,
        #[serde(default)]
        noise: f64,
        #[serde(default)]
        noise_seed: u64,
    },
    Command {
        path: PathBuf,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default)]
        arg_style: ArgStyleName,
        #[serde(default = "default_timeout")]
        timeout_s: f64,
        #[serde(default = "default_repeats")]
        repeats: usize,
        #[serde(default)]
        aggregate: AggregateName,
        #[serde(default)]
        reformulations: Vec<ReformulationDecl>,
    },
}

fn default_timeout() -> f64 {
    60.0
}

fn default_repeats() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArgStyleName {
    #[default]
    Named,
    Positional,
    Env,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateName {
    #[default]
    Min,
    Median,
    Mean,
}

/// `{"target": "mb", "alpha": "alpha_mb", "lower": "1", "upper": "m / p", "integer": true}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReformulationDecl {
    pub target: String,
    pub alpha: String,
    pub lower: String,
    pub upper: String,
    #[serde(default)]
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    /// Recorded for failed runs without a clip; unset means `+inf`, which
    /// keeps those runs out of training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerName {
    GaAdaptive,
    Hvs,
    HvsCv,
    Lhs,
    Random,
}

impl SamplerName {
    pub fn kind(self) -> SamplerKind {
        match self {
            SamplerName::GaAdaptive => SamplerKind::GaAdaptive,
            SamplerName::Hvs => SamplerKind::Hvs,
            SamplerName::HvsCv => SamplerKind::HvsCv,
            SamplerName::Lhs => SamplerKind::Lhs,
            SamplerName::Random => SamplerKind::Random,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerName::GaAdaptive => "ga-adaptive",
            SamplerName::Hvs => "hvs",
            SamplerName::HvsCv => "hvs-cv",
            SamplerName::Lhs => "lhs",
            SamplerName::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubSamplerName {
    HvsCv,
    Hvs,
    Lhs,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub kind: SamplerName,
    pub budget: usize,
    pub bootstrap_ratio: f64,
    pub initial_ratio: f64,
    pub final_ratio: f64,
    pub samples_per_iteration: usize,
    pub subsampler: SubSamplerName,
    pub hvs_min_leaf: usize,
    pub hvs_max_depth: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        let hvs = HvsParams::default();
        Self {
            kind: SamplerName::GaAdaptive,
            budget: 1000,
            bootstrap_ratio: 0.1,
            initial_ratio: 0.0,
            final_ratio: 0.8,
            samples_per_iteration: 100,
            subsampler: SubSamplerName::HvsCv,
            hvs_min_leaf: hvs.min_leaf,
            hvs_max_depth: hvs.max_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossName {
    L2,
    L1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateSection {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub learning_rate: f64,
    pub loss: LossName,
}

impl Default for SurrogateSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self { n_trees: t.n_trees, max_depth: t.max_depth, min_leaf: t.min_leaf, learning_rate: t.learning_rate, loss: LossName::L2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation_prob: Option<f64>,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    pub tournament_size: usize,
}

impl Default for GaSection {
    fn default() -> Self {
        let g = GaConfig::default();
        Self {
            population: g.population,
            generations: g.generations,
            crossover_prob: g.crossover_prob,
            mutation_prob: g.mutation_prob,
            eta_crossover: g.eta_crossover,
            eta_mutation: g.eta_mutation,
            tournament_size: g.tournament_size,
        }
    }
}

impl GaSection {
    fn to_config(&self, rng_seed: u64) -> GaConfig {
        GaConfig {
            population: self.population,
            generations: self.generations,
            crossover_prob: self.crossover_prob,
            mutation_prob: self.mutation_prob,
            eta_crossover: self.eta_crossover,
            eta_mutation: self.eta_mutation,
            tournament_size: self.tournament_size,
            rng_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    pub grid: Vec<usize>,
    pub baseline: BaselineConfig,
}

/// Either a fixed design (`{"design": {"T": 4, "b": "32"}}`) or a per-input
/// reference table (`{"reference": "ref.csv"}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BaselineConfig {
    Design(serde_json::Map<String, serde_json::Value>),
    Reference(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub samplers: Vec<SamplerName>,
    pub seeds: usize,
    pub holdout: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            samplers: vec![SamplerName::GaAdaptive, SamplerName::HvsCv, SamplerName::Lhs, SamplerName::Random],
            seeds: 5,
            holdout: 5000,
        }
    }
}

fn config_err(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config { path: path.into(), msg: msg.into() }
}

impl ExperimentConfig {
    /// Parses JSON text; errors carry the JSON path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(if path.is_empty() { ".".into() } else { path }, e.into_inner().to_string())
        })?;
        Ok(cfg)
    }

    /// Reads and validates a file. Relative paths inside are taken relative
    /// to the file's directory and made absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(path.display().to_string(), e.to_string()))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() { std::env::current_dir()? } else { base };
        let base = std::fs::canonicalize(&base).unwrap_or(base);
        cfg.make_absolute(&base);
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn make_absolute(&mut self, base: &Path) {
        let abs = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        abs(&mut self.output_dir);
        if let BaselineConfig::Reference(p) = &mut self.validation.baseline {
            abs(p);
        }
        if let KernelConfig::Command { path, .. } = &mut self.kernel {
            // bare names are looked up on PATH
            if path.components().count() > 1 {
                abs(path);
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Validates everything and builds the runtime objects.
    pub fn resolve(&self) -> Result<Experiment> {
        let (space, kernel): (ParameterSpace, Box<dyn Kernel>) = match &self.kernel {
            KernelConfig::Builtin { name, noise, noise_seed } => {
                let name: BuiltinName = name.parse().map_err(|e: Error| config_err("kernel.builtin.name", e.to_string()))?;
                if !(noise.is_finite() && (0.0..1.0).contains(noise)) {
                    return Err(config_err("kernel.builtin.noise", "must lie in [0, 1)"));
                }
                let k = Builtin { name, noise: *noise, noise_seed: *noise_seed };
                let space = k.space();
                if let Some(decls) = &self.parameters {
                    if decls.iter().map(ParamDecl::to_spec).collect::<std::result::Result<Vec<_>, _>>().ok().as_deref()
                        != Some(space.params())
                    {
                        return Err(config_err("parameters", "builtin kernels declare their own parameters; omit this field"));
                    }
                }
                (space, Box::new(k))
            }
            KernelConfig::Command { path, args, arg_style, timeout_s, repeats, aggregate, reformulations } => {
                let decls = self
                    .parameters
                    .as_ref()
                    .ok_or_else(|| config_err("parameters", "required for command kernels"))?;
                let specs = decls
                    .iter()
                    .enumerate()
                    .map(|(i, d)| d.to_spec().map_err(|m| config_err(format!("parameters[{i}]"), m)))
                    .collect::<Result<Vec<_>>>()?;
                let space = ParameterSpace::new(specs).map_err(|e| config_err("parameters", e.to_string()))?;
                if !(timeout_s.is_finite() && *timeout_s > 0.0) {
                    return Err(config_err("kernel.command.timeout_s", "must be positive"));
                }
                let mut cmd = KernelCommand::new(path);
                cmd.args = args.clone();
                cmd.arg_style = match arg_style {
                    ArgStyleName::Named => ArgStyle::NamedFlags,
                    ArgStyleName::Positional => ArgStyle::Positional,
                    ArgStyleName::Env => ArgStyle::EnvVars,
                };
                cmd.timeout = Duration::from_secs_f64(*timeout_s);
                cmd.repeats = *repeats;
                cmd.aggregate = match aggregate {
                    AggregateName::Min => Aggregate::Min,
                    AggregateName::Median => Aggregate::Median,
                    AggregateName::Mean => Aggregate::Mean,
                };
                for (i, r) in reformulations.iter().enumerate() {
                    let at = format!("kernel.command.reformulations[{i}]");
                    if space.index_of(&r.alpha).is_none() {
                        return Err(config_err(at, format!("unknown alpha parameter `{}`", r.alpha)));
                    }
                    let reform = BoundReformulation::new(&r.target, &r.alpha, &r.lower, &r.upper, r.integer)
                        .map_err(|e| config_err(at, e.to_string()))?;
                    cmd.reformulations.push(reform);
                }
                cmd.validate().map_err(|e| config_err("kernel.command", e.to_string()))?;
                (space, Box::new(cmd))
            }
        };

        let policy = match (self.objective.clip, self.objective.penalty) {
            (Some(c), _) if !c.is_finite() => return Err(config_err("objective.clip", "must be finite")),
            (_, Some(p)) if p.is_nan() => return Err(config_err("objective.penalty", "must be a number")),
            (clip, penalty) => ObjectivePolicy { clip, penalty: penalty.unwrap_or(f64::INFINITY) },
        };

        let s = &self.sampler;
        let schedule = ScheduleParams {
            b: s.bootstrap_ratio,
            i: s.initial_ratio,
            f: s.final_ratio,
            s: s.samples_per_iteration,
            n: s.budget,
        };
        schedule.validate().map_err(|e| config_err("sampler", e.to_string()))?;
        if s.hvs_min_leaf == 0 {
            return Err(config_err("sampler.hvs_min_leaf", "must be at least 1"));
        }

        let train = TrainConfig {
            n_trees: self.surrogate.n_trees,
            max_depth: self.surrogate.max_depth,
            min_leaf: self.surrogate.min_leaf,
            learning_rate: self.surrogate.learning_rate,
            loss: match self.surrogate.loss {
                LossName::L2 => Loss::L2,
                LossName::L1 => Loss::L1,
            },
            rng_seed: self.seed,
        };
        train.validate().map_err(|e| config_err("surrogate", e.to_string()))?;

        let ga = self.ga.to_config(seed::derive(self.seed, Stream::Optimize, 0));
        ga.validate().map_err(|e| config_err("ga", e.to_string()))?;
        let sampling_ga = self.sampling_ga.as_ref().unwrap_or(&self.ga).to_config(self.seed);
        sampling_ga.validate().map_err(|e| config_err("sampling_ga", e.to_string()))?;

        let check_grid = |field: &str, dims: &[usize]| -> Result<Vec<Vec<Value>>> {
            space.input_grid(dims).map_err(|e| config_err(field, e.to_string()))
        };
        check_grid("optimization_grid", &self.optimization_grid)?;
        check_grid("validation.grid", &self.validation.grid)?;
        if self.tree_depth == 0 {
            return Err(config_err("tree_depth", "must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(config_err("jobs", "must be at least 1"));
        }
        crate::codegen::sanitize(&self.c_prefix)
            .eq(&self.c_prefix)
            .then_some(())
            .ok_or_else(|| config_err("c_prefix", "must be a C identifier"))?;
        if let BaselineConfig::Design(map) = &self.validation.baseline {
            design_from_json(&space, map)?;
        }
        if self.bench.seeds == 0 || self.bench.holdout == 0 || self.bench.samplers.is_empty() {
            return Err(config_err("bench", "samplers, seeds and holdout must be non-empty"));
        }

        let subsampler = match s.subsampler {
            SubSamplerName::HvsCv => SubSampler::HvsCv,
            SubSamplerName::Hvs => SubSampler::Hvs,
            SubSamplerName::Lhs => SubSampler::Lhs,
            SubSamplerName::Random => SubSampler::Random,
        };
        let sampling = AdaptiveOptions {
            schedule,
            subsampler,
            hvs: HvsParams { mode: HvsMode::Cv, min_leaf: s.hvs_min_leaf, max_depth: s.hvs_max_depth },
            train: train.clone(),
            ga: sampling_ga,
            policy,
            rng_seed: self.seed,
            jobs: self.jobs,
        };
        Ok(Experiment { space, kernel, sampler: s.kind.kind(), sampling, train, ga, policy })
    }
}

/// Converts `{"name": value}` into design values in space order.
pub fn design_from_json(space: &ParameterSpace, map: &serde_json::Map<String, serde_json::Value>) -> Result<Vec<Value>> {
    let at = |name: &str| format!("validation.baseline.design.{name}");
    for key in map.keys() {
        if !space.design_specs().any(|p| &p.name == key) {
            return Err(config_err(at(key), "not a design parameter"));
        }
    }
    space
        .design_specs()
        .map(|p| {
            let v = map.get(&p.name).ok_or_else(|| config_err(at(&p.name), "missing"))?;
            let text = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => return Err(config_err(at(&p.name), format!("unsupported value {other}"))),
            };
            p.parse_value(&text).map_err(|e| config_err(at(&p.name), e.to_string()))
        })
        .collect()
}

/// Resolved runtime objects of a configuration.
pub struct Experiment {
    pub space: ParameterSpace,
    pub kernel: Box<dyn Kernel>,
    pub sampler: SamplerKind,
    pub sampling: AdaptiveOptions,
    pub train: TrainConfig,
    /// Grid search configuration; its seed is the master for per-point seeds.
    pub ga: GaConfig,
    pub policy: ObjectivePolicy,
}
