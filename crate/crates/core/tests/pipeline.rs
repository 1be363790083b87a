use std::fs;
use std::path::Path;

use serde_json::json;

use tune::driver::SampleStore;
use tune::pipeline::{self, resume, run_pipeline, Builtin, BuiltinName, ExperimentConfig};

fn quad(out: &Path, budget: usize) -> ExperimentConfig {
    let v = json!({
        "kernel": {"builtin": {"name": "quad"}},
        "sampler": {"budget": budget, "samples_per_iteration": 50},
        "surrogate": {"n_trees": 80, "learning_rate": 0.2},
        "sampling_ga": {"population": 8, "generations": 5},
        "ga": {"population": 24, "generations": 20},
        "optimization_grid": [6, 6],
        "validation": {"grid": [6, 6], "baseline": {"design": {"d1": 0.5, "d2": 0.5}}},
        "output_dir": out,
        "seed": 3
    });
    ExperimentConfig::from_json(&v.to_string()).unwrap()
}

#[test]
fn quad_run_beats_default_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_pipeline(&quad(dir.path(), 500)).unwrap();
    assert_eq!(s.samples, 500);
    let report = s.report.unwrap();
    assert!(report.geomean_speedup >= 1.0, "{}", report.summary());
    for f in [pipeline::SAMPLES, pipeline::MODEL, pipeline::POINTS, pipeline::TREES, pipeline::C_SOURCE, pipeline::REPORT] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn interrupted_sampling_resumes_to_the_same_store() {
    let full = tempfile::tempdir().unwrap();
    run_pipeline(&quad(full.path(), 300)).unwrap();
    let space = Builtin::new(BuiltinName::Quad).space();
    let complete = SampleStore::load(&full.path().join(pipeline::SAMPLES), &space).unwrap();

    // cut after the bootstrap and two iterations (180 of 300), as a crash would leave it
    let cut = tempfile::tempdir().unwrap();
    let cfg = quad(cut.path(), 300);
    fs::write(cut.path().join(pipeline::CONFIG), cfg.to_json()).unwrap();
    let mut partial = SampleStore::new(&space);
    partial.extend(complete.records()[..180].iter().cloned());
    partial.persist(&space, &cut.path().join(pipeline::SAMPLES)).unwrap();

    let s = resume(cut.path(), None).unwrap();
    assert_eq!(s.samples, 300);
    assert_eq!(s.ran.first(), Some(&"sample"));
    for f in [pipeline::SAMPLES, pipeline::MODEL, pipeline::TREES] {
        assert_eq!(fs::read(full.path().join(f)).unwrap(), fs::read(cut.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn resume_regenerates_only_missing_and_downstream() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&quad(dir.path(), 200)).unwrap();
    assert!(resume(dir.path(), None).unwrap().ran.is_empty());

    let trees = fs::read(dir.path().join(pipeline::TREES)).unwrap();
    let c = fs::read(dir.path().join(pipeline::C_SOURCE)).unwrap();
    let model_time = fs::metadata(dir.path().join(pipeline::MODEL)).unwrap().modified().unwrap();
    fs::remove_file(dir.path().join(pipeline::TREES)).unwrap();
    let s = resume(dir.path(), None).unwrap();
    assert!(!s.ran.contains(&"sample") && !s.ran.contains(&"model"), "{:?}", s.ran);
    assert!(s.ran.contains(&"trees"), "{:?}", s.ran);
    assert_eq!(fs::read(dir.path().join(pipeline::TREES)).unwrap(), trees);
    assert_eq!(fs::read(dir.path().join(pipeline::C_SOURCE)).unwrap(), c);
    assert_eq!(fs::metadata(dir.path().join(pipeline::MODEL)).unwrap().modified().unwrap(), model_time);
}

#[test]
fn bootstrap_larger_than_budget_is_rejected() {
    let v = json!({
        "kernel": {"builtin": {"name": "quad"}},
        "sampler": {"budget": 10, "bootstrap_ratio": 1.5},
        "optimization_grid": [4, 4],
        "validation": {"grid": [4, 4], "baseline": {"design": {"d1": 0.5, "d2": 0.5}}},
        "output_dir": "x"
    });
    let cfg = ExperimentConfig::from_json(&v.to_string());
    let err = cfg.and_then(|c| c.resolve().map(|_| ())).unwrap_err().to_string();
    assert!(err.contains("sampler") && err.contains("b = 1.5"), "{err}");
}

#[test]
fn different_config_in_same_dir_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&quad(dir.path(), 100)).unwrap();
    let mut other = quad(dir.path(), 100);
    other.seed = 4;
    assert!(run_pipeline(&other).is_err());
}
