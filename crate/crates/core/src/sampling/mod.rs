//! Strategies choosing which configurations to measure: space-filling
//! (random, Latin hypercube), variance-driven partition sampling, and the
//! surrogate-guided adaptive loop.

mod adaptive;
mod hvs;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::seed;
use crate::space::{Configuration, Kind, ParameterSpace, ParameterSpec, Value};

pub use adaptive::{
    adaptive_sampling, ga_adaptive, AdaptiveOptions, IterationLog, SamplerKind, ScheduleParams, SubSampler,
};
pub use hvs::{allocate, hvs_next_batch, partitions, HvsMode, HvsParams, Partition, Side};

/// One uniform draw of an encoded value.
pub(crate) fn draw_uniform(spec: &ParameterSpec, rng: &mut ChaCha8Rng) -> f64 {
    match &spec.kind {
        Kind::Real { low, high } => rng.random_range(*low..=*high),
        Kind::Integer { low, high } => rng.random_range(*low..=*high) as f64,
        _ => rng.random_range(0..spec.labels().map_or(1, <[String]>::len)) as f64,
    }
}

fn decode_all(space: &ParameterSpace, rows: Vec<Vec<f64>>) -> Vec<Configuration> {
    rows.into_iter()
        .map(|r| space.decode(&r).expect("sampled encodings are finite"))
        .collect()
}

/// `k` i.i.d. uniform configurations.
pub fn random_sample(space: &ParameterSpace, k: usize, rng_seed: u64) -> Vec<Configuration> {
    let mut rng = seed::rng(rng_seed);
    let rows = (0..k).map(|_| space.params().iter().map(|p| draw_uniform(p, &mut rng)).collect()).collect();
    decode_all(space, rows)
}

/// Uniform random points of the input subspace.
pub fn random_inputs(space: &ParameterSpace, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Value>> {
    (0..k)
        .map(|_| space.input_specs().map(|p| p.decode_value(draw_uniform(p, rng))).collect())
        .collect()
}

/// Latin hypercube in encoded coordinates.
///
/// Numeric dims: `[low, high]` is cut into `k` equal strata, one point per
/// stratum, strata paired across dims by independent permutations. Integer
/// dims are stratified over `[low - 0.5, high + 0.5]` and then rounded.
/// Categorical dims: a round-robin over a shuffled label order, shuffled
/// across points.
pub fn lhs_encoded(specs: &[&ParameterSpec], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; specs.len()]; k];
    for (d, spec) in specs.iter().enumerate() {
        let column: Vec<f64> = match &spec.kind {
            Kind::Real { low, high } => stratified(*low, *high, k, rng),
            Kind::Integer { low, high } => stratified(*low as f64 - 0.5, *high as f64 + 0.5, k, rng)
                .into_iter()
                .map(|v| spec.snap(v))
                .collect(),
            _ => {
                let n = spec.labels().map_or(1, <[String]>::len);
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(rng);
                let mut col: Vec<f64> = (0..k).map(|i| order[i % n] as f64).collect();
                col.shuffle(rng);
                col
            }
        };
        for (row, v) in rows.iter_mut().zip(column) {
            row[d] = v;
        }
    }
    rows
}

fn stratified(lo: f64, hi: f64, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut strata: Vec<usize> = (0..k).collect();
    strata.shuffle(rng);
    let width = (hi - lo) / k as f64;
    strata
        .into_iter()
        .map(|s| {
            let u: f64 = rng.random();
            let bottom = lo + s as f64 * width;
            let v = (lo + (s as f64 + u) * width).max(bottom);
            if s + 1 == k {
                v.min(hi)
            } else {
                // strata are half-open except the last
                let top = lo + (s + 1) as f64 * width;
                if v < top { v } else { top.next_down().max(bottom) }
            }
        })
        .collect()
}

pub fn lhs_sample(space: &ParameterSpace, k: usize, rng_seed: u64) -> Vec<Configuration> {
    let mut rng = seed::rng(rng_seed);
    let specs: Vec<&ParameterSpec> = space.params().iter().collect();
    decode_all(space, lhs_encoded(&specs, k, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Role;

    fn unit(dims: usize) -> ParameterSpace {
        let mut params: Vec<ParameterSpec> =
            (0..dims).map(|i| ParameterSpec::real(&format!("x{i}"), Role::Input, 0.0, 1.0)).collect();
        params.push(ParameterSpec::categorical("c", Role::Design, &["a", "b", "c"]));
        ParameterSpace::new(params).unwrap()
    }

    #[test]
    fn random_is_seeded() {
        let s = unit(2);
        assert_eq!(random_sample(&s, 5, 1), random_sample(&s, 5, 1));
        assert_ne!(random_sample(&s, 5, 1), random_sample(&s, 5, 2));
    }

    #[test]
    fn random_mean_is_central() {
        let s = unit(1);
        let xs = random_sample(&s, 10_000, 8);
        let mean: f64 = xs.iter().map(|c| match c.values[0] { Value::Real(v) => v, _ => unreachable!() }).sum::<f64>() / 1e4;
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn single_label_categorical() {
        let s = ParameterSpace::new(vec![
            ParameterSpec::real("x", Role::Input, 0.0, 1.0),
            ParameterSpec::categorical("c", Role::Design, &["only"]),
        ])
        .unwrap();
        for c in random_sample(&s, 20, 3).iter().chain(&lhs_sample(&s, 20, 3)) {
            assert_eq!(c.values[1], Value::Cat("only".into()));
        }
    }

    #[test]
    fn lhs_four_strata() {
        let s = unit(2);
        let pts = lhs_sample(&s, 4, 5);
        for d in 0..2 {
            let mut strata: Vec<usize> = pts
                .iter()
                .map(|c| match c.values[d] { Value::Real(v) => ((v * 4.0) as usize).min(3), _ => unreachable!() })
                .collect();
            strata.sort();
            assert_eq!(strata, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn lhs_categorical_round_robin() {
        let s = unit(1);
        let pts = lhs_sample(&s, 6, 9);
        for label in ["a", "b", "c"] {
            assert_eq!(pts.iter().filter(|c| c.values[1] == Value::Cat(label.into())).count(), 2);
        }
    }

    #[test]
    fn lhs_integer_covers_range() {
        let s = ParameterSpace::new(vec![
            ParameterSpec::integer("t", Role::Input, 1, 8),
            ParameterSpec::real("x", Role::Design, 0.0, 1.0),
        ])
        .unwrap();
        let mut vals: Vec<i64> = lhs_sample(&s, 8, 4)
            .iter()
            .map(|c| match c.values[0] { Value::Int(v) => v, _ => unreachable!() })
            .collect();
        vals.sort();
        assert_eq!(vals, (1..=8).collect::<Vec<_>>());
    }
}
