//! Elitist single-objective genetic algorithm over mixed genes: simulated
//! binary crossover and polynomial mutation for numeric genes (integers are
//! rounded back), uniform crossover and random reset for categorical genes.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sampling::lhs_encoded;
use crate::scalar::Scalar;
use crate::seed;
use crate::space::{Kind, ParameterSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    /// Even, at least 4.
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability; `None` means `1 / genes`.
    pub mutation_prob: Option<f64>,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    pub tournament_size: usize,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 100,
            crossover_prob: 0.9,
            mutation_prob: None,
            eta_crossover: 15.0,
            eta_mutation: 20.0,
            tournament_size: 2,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("ga: {m}")));
        if self.population < 4 || self.population % 2 != 0 {
            return bad("population must be even and at least 4");
        }
        if self.generations == 0 {
            return bad("generations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad("crossover_prob must be in [0, 1]");
        }
        if let Some(p) = self.mutation_prob {
            if !(0.0..=1.0).contains(&p) {
                return bad("mutation_prob must be in [0, 1]");
            }
        }
        if !(self.eta_crossover > 0.0 && self.eta_mutation > 0.0) {
            return bad("distribution indices must be positive");
        }
        if self.tournament_size < 2 {
            return bad("tournament_size must be at least 2");
        }
        Ok(())
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        Self { rng_seed, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy)]
enum Gene {
    /// Variation bounds; integers use `[low - 0.5, high + 0.5]` before
    /// rounding so every integer is equally reachable.
    Numeric { lo: f64, hi: f64, integer: bool, min: f64, max: f64 },
    Categorical { n: usize },
}

impl Gene {
    fn of(spec: &ParameterSpec) -> Self {
        match &spec.kind {
            Kind::Real { low, high } => Gene::Numeric { lo: *low, hi: *high, integer: false, min: *low, max: *high },
            Kind::Integer { low, high } => {
                let (min, max) = (*low as f64, *high as f64);
                Gene::Numeric { lo: min - 0.5, hi: max + 0.5, integer: true, min, max }
            }
            _ => Gene::Categorical { n: spec.labels().map_or(1, <[String]>::len) },
        }
    }

    fn repair(&self, v: f64) -> f64 {
        match *self {
            Gene::Numeric { integer: false, min, max, .. } => v.clamp(min, max),
            Gene::Numeric { integer: true, min, max, .. } => v.round_ties_even().clamp(min, max),
            Gene::Categorical { n } => v.round().clamp(0.0, (n - 1) as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaResult<T> {
    /// Encoded genes of the best individual ever evaluated.
    pub best: Vec<T>,
    pub value: T,
    /// Best-so-far value after initialization and after each generation.
    pub history: Vec<T>,
    pub evaluations: usize,
}

#[derive(Clone)]
struct Individual<T> {
    genes: Vec<T>,
    fitness: T,
}

fn fitness_order<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Minimizes `objective` over the encoded genes described by `genes`.
/// Non-finite objective values rank as `+∞`.
pub fn ga_minimize<T, F>(genes: &[ParameterSpec], mut objective: F, config: &GaConfig) -> Result<GaResult<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    config.validate()?;
    if genes.is_empty() {
        return Err(Error::InvalidArgument("ga: no genes to optimize".into()));
    }
    let kinds: Vec<Gene> = genes.iter().map(Gene::of).collect();
    let mutation_prob = config.mutation_prob.unwrap_or(1.0 / genes.len() as f64);
    let mut rng = seed::rng(config.rng_seed);
    let mut evaluations = 0usize;
    let mut eval = |g: &[T], evaluations: &mut usize| {
        *evaluations += 1;
        let v = objective(g);
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    };

    let refs: Vec<&ParameterSpec> = genes.iter().collect();
    let mut pop: Vec<Individual<T>> = lhs_encoded(&refs, config.population, &mut rng)
        .into_iter()
        .map(|g| {
            let genes: Vec<T> = g.into_iter().map(T::from_f64_lossy).collect();
            let fitness = eval(&genes, &mut evaluations);
            Individual { genes, fitness }
        })
        .collect();
    pop.sort_by(|a, b| fitness_order(&a.fitness, &b.fitness));
    let mut best = pop[0].clone();
    let mut history = vec![best.fitness];

    for _ in 0..config.generations {
        let mut offspring: Vec<Individual<T>> = Vec::with_capacity(config.population);
        while offspring.len() < config.population {
            let a = tournament(&pop, config.tournament_size, &mut rng);
            let b = tournament(&pop, config.tournament_size, &mut rng);
            let (mut c1, mut c2) = (pop[a].genes.clone(), pop[b].genes.clone());
            if rng.random::<f64>() < config.crossover_prob {
                crossover(&kinds, &mut c1, &mut c2, config.eta_crossover, &mut rng);
            }
            for mut child in [c1, c2] {
                mutate(&kinds, &mut child, mutation_prob, config.eta_mutation, &mut rng);
                let fitness = eval(&child, &mut evaluations);
                offspring.push(Individual { genes: child, fitness });
            }
        }
        pop = survive(pop, offspring, config.population);
        if fitness_order(&pop[0].fitness, &best.fitness).is_lt() {
            best = pop[0].clone();
        }
        history.push(best.fitness);
    }
    Ok(GaResult { best: best.genes, value: best.fitness, history, evaluations })
}

fn tournament<T: Scalar>(pop: &[Individual<T>], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..pop.len());
    for _ in 1..size {
        let c = rng.random_range(0..pop.len());
        if fitness_order(&pop[c].fitness, &pop[winner].fitness).is_lt()
            || (pop[c].fitness == pop[winner].fitness && c < winner)
        {
            winner = c;
        }
    }
    winner
}

/// (μ + λ) truncation, preferring distinct genomes.
fn survive<T: Scalar>(parents: Vec<Individual<T>>, offspring: Vec<Individual<T>>, size: usize) -> Vec<Individual<T>> {
    let mut all: Vec<Individual<T>> = parents.into_iter().chain(offspring).collect();
    all.sort_by(|a, b| fitness_order(&a.fitness, &b.fitness));
    let mut seen = HashSet::new();
    let mut next = Vec::with_capacity(size);
    let mut dupes = Vec::new();
    for ind in all {
        let key: Vec<u64> = ind.genes.iter().map(|g| g.to_f64_lossy().to_bits()).collect();
        if next.len() < size && seen.insert(key) {
            next.push(ind);
        } else {
            dupes.push(ind);
        }
    }
    let missing = size - next.len();
    next.extend(dupes.into_iter().take(missing));
    next.sort_by(|a, b| fitness_order(&a.fitness, &b.fitness));
    next
}

fn sbx_pair(p1: f64, p2: f64, lo: f64, hi: f64, eta: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    if (p1 - p2).abs() <= 1e-14 * (hi - lo).abs().max(1.0) {
        return (p1, p2);
    }
    let (y1, y2) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
    let u: f64 = rng.random();
    let spread = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
        }
    };
    let beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
    let beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
    let c1 = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1));
    let c2 = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1));
    let (c1, c2) = (c1.clamp(lo, hi), c2.clamp(lo, hi));
    if rng.random::<bool>() {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

fn crossover<T: Scalar>(kinds: &[Gene], a: &mut [T], b: &mut [T], eta: f64, rng: &mut ChaCha8Rng) {
    for (j, kind) in kinds.iter().enumerate() {
        if !rng.random::<bool>() {
            continue;
        }
        match *kind {
            Gene::Numeric { lo, hi, .. } => {
                let (x, y) = sbx_pair(a[j].to_f64_lossy(), b[j].to_f64_lossy(), lo, hi, eta, rng);
                a[j] = T::from_f64_lossy(kind.repair(x));
                b[j] = T::from_f64_lossy(kind.repair(y));
            }
            Gene::Categorical { .. } => std::mem::swap(&mut a[j], &mut b[j]),
        }
    }
}

fn polynomial(x: f64, lo: f64, hi: f64, eta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let range = hi - lo;
    if range <= 0.0 {
        return x;
    }
    let d1 = (x - lo) / range;
    let d2 = (hi - x) / range;
    let u: f64 = rng.random();
    let p = 1.0 / (eta + 1.0);
    let dq = if u < 0.5 {
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        v.powf(p) - 1.0
    } else {
        let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - v.powf(p)
    };
    (x + dq * range).clamp(lo, hi)
}

fn mutate<T: Scalar>(kinds: &[Gene], genes: &mut [T], prob: f64, eta: f64, rng: &mut ChaCha8Rng) {
    for (j, kind) in kinds.iter().enumerate() {
        if rng.random::<f64>() >= prob {
            continue;
        }
        let v = match *kind {
            Gene::Numeric { lo, hi, .. } => polynomial(genes[j].to_f64_lossy(), lo, hi, eta, rng),
            Gene::Categorical { n } => rng.random_range(0..n) as f64,
        };
        genes[j] = T::from_f64_lossy(kind.repair(v));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Role;

    fn reals(n: usize) -> Vec<ParameterSpec> {
        (0..n).map(|i| ParameterSpec::real(&format!("d{i}"), Role::Design, 0.0, 1.0)).collect()
    }

    fn sphere(g: &[f64]) -> f64 {
        g.iter().map(|x| (x - 0.3) * (x - 0.3)).sum()
    }

    #[test]
    fn sphere_converges() {
        let cfg = GaConfig { population: 40, generations: 60, rng_seed: 3, ..Default::default() };
        let r = ga_minimize(&reals(3), sphere, &cfg).unwrap();
        assert!(r.value < 1e-3, "{}", r.value);
        assert_eq!(r.value, sphere(&r.best));
    }

    #[test]
    fn best_so_far_never_worsens() {
        let cfg = GaConfig { population: 20, generations: 30, rng_seed: 9, ..Default::default() };
        let r = ga_minimize(&reals(4), sphere, &cfg).unwrap();
        assert_eq!(r.history.len(), 31);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn single_label_category() {
        let genes = vec![ParameterSpec::categorical("only", Role::Design, &["x"])];
        let cfg = GaConfig { population: 4, generations: 1, ..Default::default() };
        let r = ga_minimize(&genes, |_: &[f64]| 1.0, &cfg).unwrap();
        assert_eq!(r.best, vec![0.0]);
    }

    #[test]
    fn genes_stay_admissible() {
        let genes = vec![
            ParameterSpec::integer("t", Role::Design, 1, 8),
            ParameterSpec::categorical("b", Role::Design, &["a", "b", "c"]),
            ParameterSpec::real("r", Role::Design, -2.0, 5.0),
        ];
        let cfg = GaConfig { population: 16, generations: 20, rng_seed: 1, ..Default::default() };
        let mut ok = true;
        ga_minimize(
            &genes,
            |g: &[f64]| {
                ok &= g[0].fract() == 0.0 && (1.0..=8.0).contains(&g[0]);
                ok &= g[1].fract() == 0.0 && (0.0..=2.0).contains(&g[1]);
                ok &= (-2.0..=5.0).contains(&g[2]);
                g[0] + g[1] + g[2]
            },
            &cfg,
        )
        .unwrap();
        assert!(ok);
    }

    #[test]
    fn non_finite_objective_never_wins() {
        let cfg = GaConfig { population: 8, generations: 5, rng_seed: 2, ..Default::default() };
        let r = ga_minimize(&reals(1), |g: &[f64]| if g[0] < 0.5 { f64::NAN } else { g[0] }, &cfg).unwrap();
        assert!(r.best[0] >= 0.5 && r.value.is_finite());
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig { population: 5, ..Default::default() }.validate().is_err());
        assert!(GaConfig { population: 2, ..Default::default() }.validate().is_err());
        assert!(GaConfig { tournament_size: 1, ..Default::default() }.validate().is_err());
        assert!(GaConfig { eta_mutation: 0.0, ..Default::default() }.validate().is_err());
        assert!(GaConfig::default().validate().is_ok());
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = GaConfig { population: 12, generations: 10, rng_seed: 77, ..Default::default() };
        let a = ga_minimize(&reals(2), sphere, &cfg).unwrap();
        let b = ga_minimize(&reals(2), sphere, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generic_over_f32() {
        let cfg = GaConfig { population: 20, generations: 30, rng_seed: 4, ..Default::default() };
        let r = ga_minimize(&reals(2), |g: &[f32]| g.iter().map(|x| (x - 0.7) * (x - 0.7)).sum(), &cfg).unwrap();
        assert!(r.value < 1e-3);
    }
}
