//! Experiment configuration, the staged pipeline
//! (sample → model → optimize → trees → emit → validate), resume, and the
//! builtin synthetic kernels.

mod bench;
mod config;
pub mod kernels;
mod run;
mod validate;

pub use bench::{bench_csv, bench_samplers, bench_seed, median_by, BenchRow};
pub use config::{
    design_from_json, BaselineConfig, BenchConfig, Experiment, ExperimentConfig, GaSection, KernelConfig,
    ObjectiveConfig, SamplerConfig, SamplerName, SubSamplerName, SurrogateSection, ValidationConfig,
};
pub use kernels::{Builtin, BuiltinName};
pub use run::{
    baseline_of, emit_c_dir, load_run_config, merge_dir, resume, run_pipeline, validate_dir, RunSummary, CONFIG,
    C_SOURCE, MERGED_C, MERGED_TREES, MERGE_TABLE, MODEL, POINTS, REPORT, SAMPLES, TREES, VALIDATION,
};
pub use validate::{read_reference_csv, validate, Baseline, ValidationReport, ValidationRow};
