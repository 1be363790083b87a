//! Depth-bounded regression trees grown level by level with exact greedy
//! splits. Numeric features are scanned over a presorted order; categorical
//! features are ordered by mean target and then scanned as ordinals.

use std::cmp::Ordering;

use crate::scalar::Scalar;

/// Routing rule of an internal node; rows satisfying it go left.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule<T> {
    /// `x[feature] <= threshold`
    Threshold(T),
    /// `x[feature]` rounded is one of these ordinal codes (sorted).
    Categories(Vec<u32>),
}

impl<T: Scalar> SplitRule<T> {
    #[inline]
    pub fn goes_left(&self, x: T) -> bool {
        match self {
            SplitRule::Threshold(t) => x <= *t,
            SplitRule::Categories(set) => {
                let code = x.to_f64_lossy().round();
                code >= 0.0 && set.binary_search(&(code as u32)).is_ok()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    Leaf { value: T },
    Split { feature: usize, rule: SplitRule<T>, left: usize, right: usize },
}

/// Arena of nodes; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> RegressionTree<T> {
    pub fn from_nodes(nodes: Vec<Node<T>>) -> Option<Self> {
        let n = nodes.len();
        let valid = n > 0
            && nodes.iter().enumerate().all(|(i, node)| match node {
                Node::Leaf { .. } => true,
                Node::Split { left, right, .. } => *left > i && *right > i && *left < n && *right < n,
            });
        valid.then_some(Self { nodes })
    }

    pub fn leaf(value: T) -> Self {
        Self { nodes: vec![Node::Leaf { value }] }
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    /// Index of the leaf reached by `x`.
    #[inline]
    pub fn leaf_index(&self, x: &[T]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, rule, left, right } => {
                    i = if rule.goes_left(x[*feature]) { *left } else { *right };
                }
            }
        }
    }

    #[inline]
    pub fn predict(&self, x: &[T]) -> T {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => *value,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn depth(&self) -> usize {
        fn go<T>(nodes: &[Node<T>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// Column-major training features with per-feature presorted row order.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    cols: Vec<Vec<T>>,
    categorical: Vec<bool>,
    sorted: Vec<Vec<u32>>,
    n_rows: usize,
}

impl<T: Scalar> Dataset<T> {
    /// `rows` must be rectangular; `categorical` lists ordinal-coded columns.
    pub fn new(rows: &[Vec<T>], n_features: usize, categorical: &[usize]) -> Self {
        let n_rows = rows.len();
        let cols: Vec<Vec<T>> =
            (0..n_features).map(|f| rows.iter().map(|r| r[f]).collect()).collect();
        let mut is_cat = vec![false; n_features];
        for &c in categorical {
            if c < n_features {
                is_cat[c] = true;
            }
        }
        let sorted = cols
            .iter()
            .zip(&is_cat)
            .map(|(col, &cat)| {
                if cat {
                    return Vec::new();
                }
                let mut idx: Vec<u32> = (0..n_rows as u32).collect();
                idx.sort_by(|&a, &b| {
                    col[a as usize].partial_cmp(&col[b as usize]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Self { cols, categorical: is_cat, sorted, n_rows }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    pub fn value(&self, row: usize, feature: usize) -> T {
        self.cols[feature][row]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

/// Tree plus the leaf each training row fell into.
pub struct FittedTree<T> {
    pub tree: RegressionTree<T>,
    pub row_leaf: Vec<usize>,
}

struct Candidate<T> {
    gain: T,
    feature: usize,
    rule: SplitRule<T>,
}

#[derive(Clone, Copy)]
struct NodeStats<T> {
    sum: T,
    sum_sq: T,
    count: usize,
}

const CLOSED: u32 = u32::MAX;

/// Grows one tree on `targets` with variance-reduction splits. Leaf values
/// come from `leaf_value`, called with the rows of each leaf.
pub fn grow<T: Scalar>(
    data: &Dataset<T>,
    targets: &[T],
    params: TreeParams,
    leaf_value: &mut dyn FnMut(&[usize]) -> T,
) -> FittedTree<T> {
    let n = data.n_rows;
    let min_leaf = params.min_leaf.max(1);
    // arena of nodes; `None` while open
    let mut nodes: Vec<Option<Node<T>>> = vec![None];
    // per-row arena id of its current node; frontier slot via `slot_of`
    let mut row_node: Vec<usize> = vec![0; n];
    let mut frontier: Vec<usize> = vec![0];
    let mut depth = 0;
    let mut leaves: Vec<usize> = Vec::new();

    while !frontier.is_empty() {
        let mut slot_of = vec![CLOSED; nodes.len()];
        for (s, &id) in frontier.iter().enumerate() {
            slot_of[id] = s as u32;
        }
        let mut stats = vec![NodeStats { sum: T::zero(), sum_sq: T::zero(), count: 0 }; frontier.len()];
        for i in 0..n {
            let s = slot_of[row_node[i]];
            if s != CLOSED {
                let st = &mut stats[s as usize];
                st.sum = st.sum + targets[i];
                st.sum_sq = st.sum_sq + targets[i] * targets[i];
                st.count += 1;
            }
        }
        let splittable: Vec<bool> = stats
            .iter()
            .map(|s| {
                let sse = s.sum_sq - s.sum * s.sum / T::from_usize_lossy(s.count.max(1));
                depth < params.max_depth && s.count >= 2 * min_leaf && sse > T::zero()
            })
            .collect();
        let mut best: Vec<Option<Candidate<T>>> = (0..frontier.len()).map(|_| None).collect();

        for f in 0..data.n_features() {
            if data.categorical[f] {
                best_categorical(data, f, targets, &row_node, &slot_of, &stats, &splittable, min_leaf, &mut best);
            } else {
                best_numeric(data, f, targets, &row_node, &slot_of, &stats, &splittable, min_leaf, &mut best);
            }
        }

        let mut next = Vec::new();
        for (s, &id) in frontier.iter().enumerate() {
            let st = stats[s];
            let sse = st.sum_sq - st.sum * st.sum / T::from_usize_lossy(st.count.max(1));
            let tol = sse.abs() * T::from_f64_lossy(1e-12);
            match best[s].take() {
                Some(c) if splittable[s] && c.gain > tol && c.gain > T::zero() => {
                    let left = nodes.len();
                    nodes.push(None);
                    nodes.push(None);
                    nodes[id] = Some(Node::Split { feature: c.feature, rule: c.rule, left, right: left + 1 });
                    next.push(left);
                    next.push(left + 1);
                }
                _ => leaves.push(id),
            }
        }
        // route rows of split nodes to their children
        for i in 0..n {
            let id = row_node[i];
            if slot_of[id] == CLOSED {
                continue;
            }
            if let Some(Node::Split { feature, rule, left, right }) = &nodes[id] {
                row_node[i] = if rule.goes_left(data.value(i, *feature)) { *left } else { *right };
            }
        }
        frontier = next;
        depth += 1;
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, &id) in row_node.iter().enumerate() {
        members[id].push(i);
    }
    for id in leaves {
        let value = if members[id].is_empty() {
            T::zero()
        } else {
            leaf_value(&members[id])
        };
        nodes[id] = Some(Node::Leaf { value });
    }
    let nodes = nodes.into_iter().map(|n| n.expect("every node closed")).collect();
    FittedTree { tree: RegressionTree { nodes }, row_leaf: row_node }
}

#[inline]
fn split_gain<T: Scalar>(left_sum: T, left_n: usize, total: &NodeStats<T>) -> T {
    let right_sum = total.sum - left_sum;
    let right_n = total.count - left_n;
    left_sum * left_sum / T::from_usize_lossy(left_n) + right_sum * right_sum / T::from_usize_lossy(right_n)
        - total.sum * total.sum / T::from_usize_lossy(total.count)
}

fn midpoint<T: Scalar>(a: T, b: T) -> T {
    let two = T::one() + T::one();
    let m = a + (b - a) / two;
    if m >= b {
        a
    } else {
        m
    }
}

#[allow(clippy::too_many_arguments)]
fn best_numeric<T: Scalar>(
    data: &Dataset<T>,
    f: usize,
    targets: &[T],
    row_node: &[usize],
    slot_of: &[u32],
    stats: &[NodeStats<T>],
    splittable: &[bool],
    min_leaf: usize,
    best: &mut [Option<Candidate<T>>],
) {
    let k = stats.len();
    let mut left_sum = vec![T::zero(); k];
    let mut left_n = vec![0usize; k];
    let mut last = vec![T::zero(); k];
    let col = &data.cols[f];
    for &row in &data.sorted[f] {
        let row = row as usize;
        let s = slot_of[row_node[row]];
        if s == CLOSED || !splittable[s as usize] {
            continue;
        }
        let s = s as usize;
        let x = col[row];
        let st = &stats[s];
        if left_n[s] >= min_leaf && st.count - left_n[s] >= min_leaf && x > last[s] {
            let gain = split_gain(left_sum[s], left_n[s], st);
            if best[s].as_ref().is_none_or(|b| gain > b.gain) {
                best[s] = Some(Candidate { gain, feature: f, rule: SplitRule::Threshold(midpoint(last[s], x)) });
            }
        }
        left_sum[s] = left_sum[s] + targets[row];
        left_n[s] += 1;
        last[s] = x;
    }
}

#[allow(clippy::too_many_arguments)]
fn best_categorical<T: Scalar>(
    data: &Dataset<T>,
    f: usize,
    targets: &[T],
    row_node: &[usize],
    slot_of: &[u32],
    stats: &[NodeStats<T>],
    splittable: &[bool],
    min_leaf: usize,
    best: &mut [Option<Candidate<T>>],
) {
    let k = stats.len();
    // (code -> (sum, count)) per frontier slot
    let mut per: Vec<Vec<(T, usize)>> = vec![Vec::new(); k];
    let col = &data.cols[f];
    for row in 0..data.n_rows {
        let s = slot_of[row_node[row]];
        if s == CLOSED || !splittable[s as usize] {
            continue;
        }
        let code = col[row].to_f64_lossy().round().max(0.0) as usize;
        let acc = &mut per[s as usize];
        if acc.len() <= code {
            acc.resize(code + 1, (T::zero(), 0));
        }
        acc[code].0 = acc[code].0 + targets[row];
        acc[code].1 += 1;
    }
    for s in 0..k {
        if !splittable[s] {
            continue;
        }
        let mut cats: Vec<(usize, T, usize)> = per[s]
            .iter()
            .enumerate()
            .filter(|(_, (_, c))| *c > 0)
            .map(|(code, &(sum, c))| (code, sum, c))
            .collect();
        if cats.len() < 2 {
            continue;
        }
        cats.sort_by(|a, b| {
            let ma = a.1 / T::from_usize_lossy(a.2);
            let mb = b.1 / T::from_usize_lossy(b.2);
            ma.partial_cmp(&mb).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
        });
        let st = &stats[s];
        let (mut lsum, mut ln) = (T::zero(), 0usize);
        for j in 0..cats.len() - 1 {
            lsum = lsum + cats[j].1;
            ln += cats[j].2;
            if ln < min_leaf || st.count - ln < min_leaf {
                continue;
            }
            let gain = split_gain(lsum, ln, st);
            if best[s].as_ref().is_none_or(|b| gain > b.gain) {
                let mut set: Vec<u32> = cats[..=j].iter().map(|c| c.0 as u32).collect();
                set.sort_unstable();
                best[s] = Some(Candidate { gain, feature: f, rule: SplitRule::Categories(set) });
            }
        }
    }
}

pub fn mean<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let (mut s, mut n) = (T::zero(), 0usize);
    for v in values {
        s = s + v;
        n += 1;
    }
    if n == 0 {
        T::zero()
    } else {
        s / T::from_usize_lossy(n)
    }
}

pub fn median<T: Scalar>(mut values: Vec<T>) -> T {
    if values.is_empty() {
        return T::zero();
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / (T::one() + T::one())
    }
}
