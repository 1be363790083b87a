//! Surrogate-guided adaptive sampling: after an LHS bootstrap, each
//! iteration fits a surrogate on everything measured so far, spends a
//! growing share of the batch on genetic searches over that surrogate, and
//! fills the rest from a space-filling sub-sampler.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::driver::{evaluate_batch, Kernel, ObjectivePolicy, SampleStore};
use crate::error::{Error, Result};
use crate::optimize::{minimize_at, GaConfig};
use crate::sampling::hvs::{hvs_next_batch, HvsMode, HvsParams};
use crate::sampling::{lhs_sample, random_inputs, random_sample};
use crate::seed::{self, Stream};
use crate::space::{Configuration, ParameterSpace};
use crate::surrogate::{GbdtModel, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    /// Bootstrap ratio.
    pub b: f64,
    /// GA share at the start.
    pub i: f64,
    /// GA share at the end.
    pub f: f64,
    /// Samples per iteration.
    pub s: usize,
    /// Total budget.
    pub n: usize,
}

impl ScheduleParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("schedule: {m}")));
        if !(self.b > 0.0 && self.b < 1.0) {
            return bad(format!("b = {} must lie in (0, 1)", self.b));
        }
        if !((0.0..=1.0).contains(&self.i) && (0.0..=1.0).contains(&self.f)) {
            return bad("i and f must lie in [0, 1]".into());
        }
        if self.i > self.f {
            return bad(format!("i = {} exceeds f = {}", self.i, self.f));
        }
        if self.s == 0 {
            return bad("s must be at least 1".into());
        }
        if self.n < self.s {
            return bad(format!("n = {} is smaller than s = {}", self.n, self.s));
        }
        let boot = self.bootstrap();
        if boot < 1 || boot > self.n {
            return bad(format!("bootstrap size round(b*n) = {boot} must lie in [1, n]"));
        }
        Ok(())
    }

    pub fn bootstrap(&self) -> usize {
        (self.b * self.n as f64).round() as usize
    }

    /// Exploitation ratio at progress `p = |S| / n`.
    pub fn epsilon(&self, p: f64) -> f64 {
        self.i + (self.f - self.i) * p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubSampler {
    HvsCv,
    Hvs,
    Lhs,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Random,
    Lhs,
    Hvs,
    HvsCv,
    GaAdaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOptions {
    pub schedule: ScheduleParams,
    pub subsampler: SubSampler,
    /// Tree shape for HVS; the mode follows `subsampler`.
    pub hvs: HvsParams,
    pub train: TrainConfig,
    pub ga: GaConfig,
    pub policy: ObjectivePolicy,
    pub rng_seed: u64,
    pub jobs: usize,
}

/// What one iteration did.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub index: usize,
    pub size_before: usize,
    pub progress: f64,
    pub epsilon: f64,
    pub batch: usize,
    /// `round(epsilon * batch)`.
    pub ga_planned: usize,
    /// GA winners actually measured (duplicates are replaced).
    pub ga_kept: usize,
    pub sub_points: usize,
    /// The surrogate could not be fit and the whole batch was sub-sampled.
    pub fallback: bool,
}

fn key(space: &ParameterSpace, config: &Configuration) -> Vec<u64> {
    space
        .encode::<f64>(config)
        .map(|v| v.iter().map(|x| x.to_bits()).collect())
        .unwrap_or_default()
}

fn subsample(
    space: &ParameterSpace,
    store: &SampleStore,
    which: SubSampler,
    hvs: &HvsParams,
    k: usize,
    rng_seed: u64,
) -> Result<Vec<Configuration>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let mode = match which {
        SubSampler::Lhs => return Ok(lhs_sample(space, k, rng_seed)),
        SubSampler::Random => return Ok(random_sample(space, k, rng_seed)),
        SubSampler::Hvs => HvsMode::Variance,
        SubSampler::HvsCv => HvsMode::Cv,
    };
    match hvs_next_batch(space, store, k, &HvsParams { mode, ..*hvs }, rng_seed) {
        Err(Error::InsufficientSamples { needed, have }) => {
            log::warn!("hvs needs {needed} measured samples, have {have}; using lhs for this batch");
            Ok(lhs_sample(space, k, rng_seed))
        }
        other => other,
    }
}

fn fit_surrogate(space: &ParameterSpace, store: &SampleStore, train: &TrainConfig) -> Option<GbdtModel<f64>> {
    let rows: Vec<Vec<f64>> = store.training_records().filter_map(|r| space.encode(&r.config).ok()).collect();
    let ys: Vec<f64> = store.training_records().map(|r| r.objective).collect();
    if rows.len() < 2 || rows.len() != ys.len() {
        return None;
    }
    match GbdtModel::fit(&rows, &ys, &space.categorical_dims(), train) {
        Ok(m) => Some(m),
        Err(e) => {
            log::warn!("surrogate fit failed: {e}");
            None
        }
    }
}

/// GA-Adaptive sampling. `store` may already hold samples from an
/// interrupted run; the loop picks up at the iteration they imply, and
/// `on_progress` is called after the bootstrap and after every iteration.
pub fn ga_adaptive<K: Kernel + ?Sized>(
    space: &ParameterSpace,
    kernel: &K,
    opts: &AdaptiveOptions,
    mut store: SampleStore,
    on_progress: &mut dyn FnMut(&SampleStore) -> Result<()>,
) -> Result<(SampleStore, Vec<IterationLog>)> {
    let sch = opts.schedule;
    sch.validate()?;
    opts.ga.validate()?;
    opts.train.validate()?;
    if store.fingerprint() != space.fingerprint() {
        return Err(Error::FingerprintMismatch {
            expected: space.fingerprint(),
            found: store.fingerprint().to_string(),
        });
    }
    let jobs = opts.jobs.max(1);
    let boot = sch.bootstrap();
    if store.is_empty() {
        let configs = lhs_sample(space, boot, seed::derive(opts.rng_seed, Stream::Bootstrap, 0));
        store.extend(evaluate_batch(kernel, space, &configs, jobs, &opts.policy)?);
        on_progress(&store)?;
    } else if store.len() < boot {
        return Err(Error::Malformed(format!(
            "sample store holds {} records, fewer than the bootstrap size {boot}",
            store.len()
        )));
    }

    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?,
        )
    } else {
        None
    };
    let mut seen: HashSet<Vec<u64>> = store.records().iter().map(|r| key(space, &r.config)).collect();
    let mut logs = Vec::new();

    while store.len() < sch.n {
        let size = store.len();
        if (size - boot) % sch.s != 0 {
            log::warn!("sample store size {size} is not on an iteration boundary");
        }
        let j = (size - boot) / sch.s;
        let p = size as f64 / sch.n as f64;
        let epsilon = sch.epsilon(p);
        let batch = sch.s.min(sch.n - size);
        let ga_planned = ((epsilon * batch as f64).round() as usize).min(batch);

        let mut fallback = false;
        let mut winners = Vec::new();
        if ga_planned > 0 {
            match fit_surrogate(space, &store, &opts.train) {
                None => fallback = true,
                Some(model) => {
                    let mut rng = seed::rng(seed::derive(opts.rng_seed, Stream::GaInputs, j as u64));
                    let inputs = random_inputs(space, ga_planned, &mut rng);
                    let base = seed::derive(opts.rng_seed, Stream::GaInstance, j as u64);
                    let one = |(q, x): (usize, &Vec<_>)| {
                        let ga = opts.ga.with_seed(seed::derive(base, Stream::GaInstance, q as u64));
                        minimize_at(&model, space, x, &ga).map(|pt| space.join(&pt.inputs, &pt.design))
                    };
                    winners = match &pool {
                        Some(pool) => pool.install(|| inputs.par_iter().enumerate().map(one).collect::<Result<Vec<_>>>())?,
                        None => inputs.iter().enumerate().map(one).collect::<Result<Vec<_>>>()?,
                    };
                }
            }
        }
        let mut kept = Vec::new();
        for w in winners {
            if seen.insert(key(space, &w)) {
                kept.push(w);
            }
        }
        let ga_kept = kept.len();
        let sub_points = batch - ga_kept;
        let sub = subsample(
            space,
            &store,
            opts.subsampler,
            &opts.hvs,
            sub_points,
            seed::derive(opts.rng_seed, Stream::Subsampler, j as u64),
        )?;
        for c in &sub {
            seen.insert(key(space, c));
        }
        kept.extend(sub);
        store.extend(evaluate_batch(kernel, space, &kept, jobs, &opts.policy)?);
        logs.push(IterationLog {
            index: j,
            size_before: size,
            progress: p,
            epsilon,
            batch,
            ga_planned,
            ga_kept,
            sub_points,
            fallback,
        });
        log::info!(
            "iteration {j}: |S|={size} eps={epsilon:.3} ga={ga_kept}/{ga_planned} sub={sub_points}"
        );
        on_progress(&store)?;
    }
    Ok((store, logs))
}

/// Runs any of the samplers to the budget in `opts.schedule.n`. Random and
/// LHS draw the whole budget at once; HVS variants run the adaptive loop
/// with no GA share.
pub fn adaptive_sampling<K: Kernel + ?Sized>(
    kind: SamplerKind,
    space: &ParameterSpace,
    kernel: &K,
    opts: &AdaptiveOptions,
    store: SampleStore,
    on_progress: &mut dyn FnMut(&SampleStore) -> Result<()>,
) -> Result<(SampleStore, Vec<IterationLog>)> {
    let n = opts.schedule.n;
    let one_shot = |configs: Vec<Configuration>, mut store: SampleStore, cb: &mut dyn FnMut(&SampleStore) -> Result<()>| {
        if store.is_empty() {
            store.extend(evaluate_batch(kernel, space, &configs, opts.jobs.max(1), &opts.policy)?);
            cb(&store)?;
        } else if store.len() != n {
            return Err(Error::Malformed(format!("sample store holds {} of {n} records", store.len())));
        }
        Ok((store, Vec::new()))
    };
    let seed0 = seed::derive(opts.rng_seed, Stream::Bootstrap, 0);
    match kind {
        SamplerKind::Random => one_shot(random_sample(space, n, seed0), store, on_progress),
        SamplerKind::Lhs => one_shot(lhs_sample(space, n, seed0), store, on_progress),
        SamplerKind::Hvs | SamplerKind::HvsCv => {
            let sub = if kind == SamplerKind::Hvs { SubSampler::Hvs } else { SubSampler::HvsCv };
            let schedule = ScheduleParams { i: 0.0, f: 0.0, ..opts.schedule };
            let o = AdaptiveOptions { schedule, subsampler: sub, ..opts.clone() };
            ga_adaptive(space, kernel, &o, store, on_progress)
        }
        SamplerKind::GaAdaptive => ga_adaptive(space, kernel, opts, store, on_progress),
    }
}
