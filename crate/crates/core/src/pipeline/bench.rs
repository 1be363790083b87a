//! Sampler comparison: for every sampler and seed, sample to the budget,
//! fit the surrogate, and score it globally (random holdout) and locally
//! (at the configurations the optimizer picks).

use rayon::prelude::*;

use crate::driver::{evaluate_batch, SampleRecord, SampleStore};
use crate::error::{Error, Result};
use crate::optimize::optimize_grid;
use crate::pipeline::config::{ExperimentConfig, SamplerName};
use crate::sampling::{adaptive_sampling, random_sample, AdaptiveOptions};
use crate::seed::{self, Stream};
use crate::surrogate::{global_accuracy, local_accuracy, GbdtModel};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub sampler: SamplerName,
    pub seed: u64,
    pub samples: usize,
    pub global_mae: f64,
    pub local_mae: f64,
}

/// Seed of repetition `k`.
pub fn bench_seed(master: u64, k: usize) -> u64 {
    master.wrapping_add(k as u64)
}

/// Runs every (sampler, seed) pair; rows come back sampler-major. Pairs run
/// concurrently on `jobs` threads, each one serial inside, so results do not
/// depend on `jobs`.
pub fn bench_samplers(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<BenchRow>> {
    let exp = cfg.resolve()?;
    let space = &exp.space;
    let kernel = exp.kernel.as_ref();
    let grid = space.input_grid(&cfg.optimization_grid)?;

    let holdouts: Vec<Vec<SampleRecord>> = (0..cfg.bench.seeds)
        .map(|k| {
            let s = seed::derive(bench_seed(cfg.seed, k), Stream::Holdout, 0);
            let configs = random_sample(space, cfg.bench.holdout, s);
            evaluate_batch(kernel, space, &configs, 1, &exp.policy)
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(SamplerName, usize)> =
        cfg.bench.samplers.iter().flat_map(|&s| (0..cfg.bench.seeds).map(move |k| (s, k))).collect();
    let one = |&(sampler, k): &(SamplerName, usize)| -> Result<BenchRow> {
        let seed_k = bench_seed(cfg.seed, k);
        let opts = AdaptiveOptions {
            rng_seed: seed_k,
            jobs: 1,
            ga: exp.sampling.ga.with_seed(seed_k),
            ..exp.sampling.clone()
        };
        let (store, _) = adaptive_sampling(sampler.kind(), space, kernel, &opts, SampleStore::new(space), &mut |_| Ok(()))?;
        let train: Vec<_> = store.training_records().collect();
        let rows = train.iter().map(|r| space.encode::<f64>(&r.config)).collect::<Result<Vec<_>>>()?;
        let ys: Vec<f64> = train.iter().map(|r| r.objective).collect();
        let model = GbdtModel::fit(&rows, &ys, &space.categorical_dims(), &exp.train)?;
        let global = global_accuracy(&model, space, &holdouts[k])?;
        let ga = exp.ga.with_seed(seed::derive(seed_k, Stream::Optimize, 0));
        let points = optimize_grid(&model, space, &grid, &ga, 1)?;
        let local_mae = local_accuracy(&model, space, kernel, &points, &exp.policy)?;
        log::info!("{} seed {seed_k}: global MAE {:.4}, local MAE {:.4}", sampler.as_str(), global.mae, local_mae);
        Ok(BenchRow { sampler, seed: seed_k, samples: store.len(), global_mae: global.mae, local_mae })
    };
    if jobs <= 1 {
        return pairs.iter().map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| pairs.par_iter().map(one).collect())
}

/// Median of `f` over the rows of one sampler.
pub fn median_by(rows: &[BenchRow], sampler: SamplerName, f: impl Fn(&BenchRow) -> f64) -> f64 {
    let mut v: Vec<f64> = rows.iter().filter(|r| r.sampler == sampler).map(f).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("sampler,seed,samples,global_mae,local_mae\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.sampler.as_str(),
            r.seed,
            r.samples,
            crate::scalar::fmt_real(r.global_mae),
            crate::scalar::fmt_real(r.local_mae)
        ));
    }
    out
}
