//! Hierarchical variance sampling: a regression tree partitions the space,
//! and each new batch is spread over the leaves in proportion to
//! `measure × variance` (or `measure × coefficient of variation`).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::driver::SampleStore;
use crate::error::{Error, Result};
use crate::seed;
use crate::space::{Configuration, Kind, ParameterSpace};
use crate::surrogate::tree::{grow, mean, Dataset, Node, SplitRule, TreeParams};

const EPS_CV: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HvsMode {
    Variance,
    Cv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvsParams {
    pub mode: HvsMode,
    pub min_leaf: usize,
    pub max_depth: usize,
}

impl Default for HvsParams {
    fn default() -> Self {
        Self { mode: HvsMode::Cv, min_leaf: 10, max_depth: 6 }
    }
}

/// Extent of a partition along one encoded dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Side {
    Real { low: f64, high: f64 },
    Int { low: i64, high: i64 },
    Cats(Vec<u32>),
}

impl Side {
    fn full(kind: &Kind) -> Self {
        match kind {
            Kind::Real { low, high } => Side::Real { low: *low, high: *high },
            Kind::Integer { low, high } => Side::Int { low: *low, high: *high },
            Kind::Categorical { labels } => Side::Cats((0..labels.len() as u32).collect()),
            Kind::Boolean => Side::Cats(vec![0, 1]),
        }
    }

    fn fraction_of(&self, full: &Side) -> f64 {
        match (self, full) {
            (Side::Real { low, high }, Side::Real { low: l, high: h }) => {
                if h > l { (high - low) / (h - l) } else { 1.0 }
            }
            (Side::Int { low, high }, Side::Int { low: l, high: h }) => {
                (high - low + 1) as f64 / (h - l + 1) as f64
            }
            (Side::Cats(s), Side::Cats(all)) => s.len() as f64 / all.len() as f64,
            _ => unreachable!("sides of one dimension share a kind"),
        }
    }

    /// Left and right children under `rule`.
    fn split(&self, rule: &SplitRule<f64>) -> (Side, Side) {
        match (self, rule) {
            (Side::Real { low, high }, SplitRule::Threshold(t)) => {
                (Side::Real { low: *low, high: t.min(*high) }, Side::Real { low: t.max(*low), high: *high })
            }
            (Side::Int { low, high }, SplitRule::Threshold(t)) => {
                let cut = t.floor() as i64;
                (Side::Int { low: *low, high: cut.min(*high) }, Side::Int { low: (cut + 1).max(*low), high: *high })
            }
            (Side::Cats(codes), SplitRule::Categories(set)) => {
                let (l, r) = codes.iter().partition(|c| set.binary_search(c).is_ok());
                (Side::Cats(l), Side::Cats(r))
            }
            (Side::Cats(codes), SplitRule::Threshold(t)) => {
                let (l, r) = codes.iter().partition(|&&c| c as f64 <= *t);
                (Side::Cats(l), Side::Cats(r))
            }
            (side, SplitRule::Categories(_)) => (side.clone(), side.clone()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Side::Real { low, high } => {
                if high > low { rng.random_range(*low..=*high) } else { *low }
            }
            Side::Int { low, high } => rng.random_range(*low..=(*high).max(*low)) as f64,
            Side::Cats(codes) => codes[rng.random_range(0..codes.len())] as f64,
        }
    }
}

/// One leaf of the partition tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub sides: Vec<Side>,
    /// Indices into the store's record list.
    pub member_indices: Vec<usize>,
    pub mean: f64,
    pub variance: f64,
    pub measure: f64,
}

impl Partition {
    pub fn priority(&self, mode: HvsMode) -> f64 {
        match mode {
            HvsMode::Variance => self.measure * self.variance,
            HvsMode::Cv => self.measure * self.variance.sqrt() / self.mean.abs().max(EPS_CV),
        }
    }
}

fn unbiased_variance(values: &[f64], m: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Fits the partition tree on the measured records of `store` and returns
/// its leaves in depth-first (left before right) order.
pub fn partitions(space: &ParameterSpace, store: &SampleStore, params: &HvsParams) -> Result<Vec<Partition>> {
    let usable: Vec<usize> = store
        .records()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status.is_measured() && r.objective.is_finite())
        .map(|(i, _)| i)
        .collect();
    let min_leaf = params.min_leaf.max(1);
    if usable.len() < 2 * min_leaf {
        return Err(Error::InsufficientSamples { needed: 2 * min_leaf, have: usable.len() });
    }
    let rows: Vec<Vec<f64>> = usable
        .iter()
        .map(|&i| space.encode(&store.records()[i].config))
        .collect::<Result<_>>()?;
    let targets: Vec<f64> = usable.iter().map(|&i| store.records()[i].objective).collect();
    let data = Dataset::new(&rows, space.len(), &space.categorical_dims());
    let fitted = grow(
        &data,
        &targets,
        TreeParams { max_depth: params.max_depth, min_leaf },
        &mut |_| 0.0,
    );

    let full: Vec<Side> = space.params().iter().map(|p| Side::full(&p.kind)).collect();
    let nodes = fitted.tree.nodes();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (row, &leaf) in fitted.row_leaf.iter().enumerate() {
        members[leaf].push(row);
    }
    let mut out = Vec::new();
    let mut stack = vec![(0usize, full.clone())];
    while let Some((id, sides)) = stack.pop() {
        match &nodes[id] {
            Node::Leaf { .. } => {
                let ys: Vec<f64> = members[id].iter().map(|&r| targets[r]).collect();
                let m = if ys.is_empty() { 0.0 } else { mean(ys.iter().copied()) };
                let measure = sides.iter().zip(&full).map(|(s, f)| s.fraction_of(f)).product();
                out.push(Partition {
                    member_indices: members[id].iter().map(|&r| usable[r]).collect(),
                    mean: m,
                    variance: unbiased_variance(&ys, m),
                    measure,
                    sides,
                });
            }
            Node::Split { feature, rule, left, right } => {
                let (l, r) = sides[*feature].split(rule);
                let mut ls = sides.clone();
                ls[*feature] = l;
                let mut rs = sides;
                rs[*feature] = r;
                // right pushed first so the left subtree is emitted first
                stack.push((*right, rs));
                stack.push((*left, ls));
            }
        }
    }
    Ok(out)
}

/// Splits `k` across slots in proportion to `priorities` by largest
/// remainder; remainder ties go to the lowest index. Non-positive or
/// non-finite totals fall back to equal weights.
pub fn allocate(priorities: &[f64], k: usize) -> Vec<usize> {
    if priorities.is_empty() {
        return Vec::new();
    }
    let clean: Vec<f64> = priorities.iter().map(|p| if p.is_finite() && *p > 0.0 { *p } else { 0.0 }).collect();
    let total: f64 = clean.iter().sum();
    let weights = if total > 0.0 && total.is_finite() { clean } else { vec![1.0; priorities.len()] };
    let total: f64 = weights.iter().sum();
    let shares: Vec<f64> = weights.iter().map(|w| k as f64 * w / total).collect();
    let mut alloc: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(k.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

/// Next `k` configurations, drawn uniformly inside partitions chosen by
/// priority.
pub fn hvs_next_batch(
    space: &ParameterSpace,
    store: &SampleStore,
    k: usize,
    params: &HvsParams,
    rng_seed: u64,
) -> Result<Vec<Configuration>> {
    let parts = partitions(space, store, params)?;
    let priorities: Vec<f64> = parts.iter().map(|p| p.priority(params.mode)).collect();
    let alloc = allocate(&priorities, k);
    let mut rng = seed::rng(rng_seed);
    let mut out = Vec::with_capacity(k);
    for (part, &count) in parts.iter().zip(&alloc) {
        for _ in 0..count {
            let encoded: Vec<f64> = part.sides.iter().map(|s| s.draw(&mut rng)).collect();
            out.push(space.decode(&encoded)?);
        }
    }
    Ok(out)
}
