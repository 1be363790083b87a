//! Kernel execution, objective clipping and the persistent sample store.

mod command;
mod store;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::space::{Configuration, ParameterSpace};

pub use command::{Aggregate, ArgStyle, KernelCommand};
pub use store::SampleStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    Failed,
    Timeout,
    Clipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failed => "failed",
            Status::Timeout => "timeout",
            Status::Clipped => "clipped",
        }
    }

    /// `ok` or `clipped`: the objective is a real measurement (possibly capped).
    pub fn is_measured(self) -> bool {
        matches!(self, Status::Ok | Status::Clipped)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "ok" => Status::Ok,
            "failed" => Status::Failed,
            "timeout" => Status::Timeout,
            "clipped" => Status::Clipped,
            _ => return Err(format!("unknown status `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub config: Configuration,
    pub objective: f64,
    pub status: Status,
    pub wall_time: f64,
}

/// Result of running a kernel once (all repeats, aggregated).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Value(f64),
    Failed,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Run {
    pub outcome: Outcome,
    pub wall_time: f64,
}

/// Anything that can measure the objective of a full configuration.
///
/// `Err` is reserved for misconfiguration (missing executable); kernel
/// failures are reported through [`Outcome`].
pub trait Kernel: Sync {
    fn run(&self, space: &ParameterSpace, config: &Configuration) -> Result<Run>;
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn run(&self, space: &ParameterSpace, config: &Configuration) -> Result<Run> {
        (**self).run(space, config)
    }
}

/// How raw outcomes become recorded objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivePolicy {
    /// Upper bound on recorded objectives.
    pub clip: Option<f64>,
    /// Recorded for failed or timed-out runs when no clip is set.
    pub penalty: f64,
}

impl Default for ObjectivePolicy {
    fn default() -> Self {
        Self { clip: None, penalty: f64::INFINITY }
    }
}

impl ObjectivePolicy {
    pub fn clipped(clip: f64) -> Self {
        Self { clip: Some(clip), ..Self::default() }
    }

    pub fn record(&self, config: Configuration, run: Run) -> SampleRecord {
        let failure = self.clip.unwrap_or(self.penalty);
        let (objective, status) = match run.outcome {
            Outcome::Value(v) => match self.clip {
                Some(c) if v > c => (c, Status::Clipped),
                _ => (v, Status::Ok),
            },
            Outcome::Failed => (failure, Status::Failed),
            Outcome::Timeout => (failure, Status::Timeout),
        };
        SampleRecord { config, objective, status, wall_time: run.wall_time }
    }
}

pub fn evaluate<K: Kernel + ?Sized>(
    kernel: &K,
    space: &ParameterSpace,
    config: &Configuration,
    policy: &ObjectivePolicy,
) -> Result<SampleRecord> {
    space.check(config)?;
    let run = kernel.run(space, config)?;
    Ok(policy.record(config.clone(), run))
}

/// Evaluates `configs` with up to `parallelism` concurrent kernel runs.
/// Output order matches input order.
pub fn evaluate_batch<K: Kernel + ?Sized>(
    kernel: &K,
    space: &ParameterSpace,
    configs: &[Configuration],
    parallelism: usize,
    policy: &ObjectivePolicy,
) -> Result<Vec<SampleRecord>> {
    if parallelism == 0 {
        return Err(Error::InvalidArgument("parallelism must be at least 1".into()));
    }
    if parallelism == 1 || configs.len() <= 1 {
        return configs.iter().map(|c| evaluate(kernel, space, c, policy)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<SampleRecord>>>> =
        configs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..parallelism.min(configs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let r = evaluate(kernel, space, &configs[i], policy);
                *slots[i].lock().expect("slot poisoned") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot poisoned").expect("every slot is filled"))
        .collect()
}
