//! Exact greedy CART on a small dense table, grown depth first. Ties go to
//! the lowest input index, then the lowest threshold.

use super::TreeNode;

enum Target<'a> {
    Numeric(&'a [f64]),
    Classes { codes: Vec<usize>, n: usize },
}

impl Target<'_> {
    /// Impurity of `rows`: sum of squared deviations, or `n · gini`.
    fn impurity(&self, rows: &[usize]) -> f64 {
        match self {
            Target::Numeric(y) => {
                let m = rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64;
                rows.iter().map(|&r| (y[r] - m) * (y[r] - m)).sum()
            }
            Target::Classes { codes, n } => {
                let mut counts = vec![0usize; *n];
                for &r in rows {
                    counts[codes[r]] += 1;
                }
                gini(&counts, rows.len())
            }
        }
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        match self {
            Target::Numeric(y) => rows.iter().all(|&r| y[r] == y[rows[0]]),
            Target::Classes { codes, .. } => rows.iter().all(|&r| codes[r] == codes[rows[0]]),
        }
    }

    fn leaf(&self, rows: &[usize]) -> f64 {
        match self {
            Target::Numeric(y) => {
                if self.is_pure(rows) {
                    y[rows[0]]
                } else {
                    rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64
                }
            }
            Target::Classes { codes, n } => {
                let mut counts = vec![0usize; *n];
                for &r in rows {
                    counts[codes[r]] += 1;
                }
                // first maximum, i.e. lowest code on ties
                let mut best = 0;
                for (c, &k) in counts.iter().enumerate() {
                    if k > counts[best] {
                        best = c;
                    }
                }
                best as f64
            }
        }
    }

    /// Impurity of every prefix split of `order` (rows sorted by a feature):
    /// entry `k` is left = order[..k], right = order[k..].
    fn prefix_impurities(&self, order: &[usize]) -> Vec<f64> {
        let n = order.len();
        let mut out = vec![0.0; n + 1];
        match self {
            Target::Numeric(y) => {
                let m = order.iter().map(|&r| y[r]).sum::<f64>() / n as f64;
                let (mut ls, mut lq) = (0.0, 0.0);
                let ts: f64 = order.iter().map(|&r| y[r] - m).sum();
                let tq: f64 = order.iter().map(|&r| (y[r] - m) * (y[r] - m)).sum();
                for k in 1..n {
                    let v = y[order[k - 1]] - m;
                    ls += v;
                    lq += v * v;
                    let (rs, rq) = (ts - ls, tq - lq);
                    let left = (lq - ls * ls / k as f64).max(0.0);
                    let right = (rq - rs * rs / (n - k) as f64).max(0.0);
                    out[k] = left + right;
                }
            }
            Target::Classes { codes, n: classes } => {
                let mut left = vec![0usize; *classes];
                let mut right = vec![0usize; *classes];
                for &r in order {
                    right[codes[r]] += 1;
                }
                for k in 1..n {
                    let c = codes[order[k - 1]];
                    left[c] += 1;
                    right[c] -= 1;
                    out[k] = gini(&left, k) + gini(&right, n - k);
                }
            }
        }
        out
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b { m } else { a }
}

pub(super) fn fit_regressor(x: &[Vec<f64>], y: &[f64], max_depth: usize) -> Vec<TreeNode> {
    fit(x, &Target::Numeric(y), max_depth)
}

pub(super) fn fit_classifier(x: &[Vec<f64>], codes: &[f64], n_classes: usize, max_depth: usize) -> Vec<TreeNode> {
    let codes = codes.iter().map(|&c| c as usize).collect();
    fit(x, &Target::Classes { codes, n: n_classes.max(1) }, max_depth)
}

fn fit(x: &[Vec<f64>], target: &Target, max_depth: usize) -> Vec<TreeNode> {
    let rows: Vec<usize> = (0..x.len()).collect();
    let mut nodes = Vec::new();
    grow(x, target, rows, 0, max_depth, &mut nodes);
    nodes
}

fn grow(x: &[Vec<f64>], target: &Target, rows: Vec<usize>, depth: usize, max_depth: usize, nodes: &mut Vec<TreeNode>) -> usize {
    let id = nodes.len();
    nodes.push(TreeNode::Leaf { value: target.leaf(&rows) });
    if depth >= max_depth || rows.len() < 2 || target.is_pure(&rows) {
        return id;
    }
    let parent = target.impurity(&rows);
    let n_inputs = x[0].len();
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..n_inputs {
        let mut order = rows.clone();
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let imp = target.prefix_impurities(&order);
        for k in 1..order.len() {
            let (lo, hi) = (x[order[k - 1]][f], x[order[k]][f]);
            if lo == hi {
                continue;
            }
            let gain = parent - imp[k];
            if gain > best.map_or(0.0, |b| b.0) {
                best = Some((gain, f, midpoint(lo, hi)));
            }
        }
    }
    let Some((gain, input, threshold)) = best else { return id };
    if gain <= parent * 1e-12 {
        return id;
    }
    let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| x[i][input] <= threshold);
    let left = grow(x, target, l, depth + 1, max_depth, nodes);
    let right = grow(x, target, r, depth + 1, max_depth, nodes);
    nodes[id] = TreeNode::Split { input, threshold, left, right };
    id
}
