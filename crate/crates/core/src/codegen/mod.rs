//! Distills optimized points into one decision tree per design parameter,
//! evaluates and serializes those trees, and emits them as C.

mod cart;
mod emit;
mod io;
mod merge;

use crate::error::{Error, Result};
use crate::optimize::OptimizedPoint;
use crate::space::{Configuration, ParameterSpace, ParameterSpec, Role, Value};

pub use emit::{emit_c, sanitize};
pub use io::{deserialize, serialize};
pub use merge::{expert_merge, Choice, MergeOutcome, MergeRow};

pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    Regressor,
    Classifier,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// Encoded value: a real, an integer, or a category ordinal.
    Leaf { value: f64 },
    /// `x[input] <= threshold` goes left.
    Split { input: usize, threshold: f64, left: usize, right: usize },
}

/// Decision tree for one design parameter over the encoded input values.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTreeModel {
    pub target: ParameterSpec,
    pub kind: TreeKind,
    pub max_depth: usize,
    nodes: Vec<TreeNode>,
}

impl DecisionTreeModel {
    /// Checks node links, input indices and depth.
    pub fn new(target: ParameterSpec, max_depth: usize, nodes: Vec<TreeNode>, n_inputs: usize) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Malformed(format!("tree `{}` has no nodes", target.name)));
        }
        for (i, node) in nodes.iter().enumerate() {
            match node {
                TreeNode::Leaf { value } if !value.is_finite() => {
                    return Err(Error::Malformed(format!("tree `{}`: non-finite leaf", target.name)));
                }
                TreeNode::Split { input, threshold, left, right } => {
                    if *input >= n_inputs || !threshold.is_finite() {
                        return Err(Error::Malformed(format!("tree `{}`: bad split at node {i}", target.name)));
                    }
                    if *left <= i || *right <= i || *left >= n || *right >= n {
                        return Err(Error::Malformed(format!("tree `{}`: bad child link at node {i}", target.name)));
                    }
                }
                _ => {}
            }
        }
        let kind = if target.is_categorical() { TreeKind::Classifier } else { TreeKind::Regressor };
        let tree = Self { target, kind, max_depth, nodes };
        if tree.depth() > max_depth {
            return Err(Error::Malformed(format!(
                "tree `{}` has depth {} > {max_depth}",
                tree.target.name,
                tree.depth()
            )));
        }
        Ok(tree)
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize, seen: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                // links only point forward, so recursion is bounded by the arena
                TreeNode::Split { left, right, .. } if seen < nodes.len() => {
                    1 + go(nodes, *left, seen + 1).max(go(nodes, *right, seen + 1))
                }
                TreeNode::Split { .. } => usize::MAX / 2,
            }
        }
        go(&self.nodes, 0, 0)
    }

    /// Raw leaf value reached by encoded inputs `x`.
    pub fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { input, threshold, left, right } => {
                    i = if x[*input] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Admissible encoded output: rounded for integers and categories,
    /// clamped to bounds.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.target.snap(self.leaf_value(x))
    }
}

/// One tree per design parameter, in space order.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningTrees {
    inputs: Vec<ParameterSpec>,
    trees: Vec<DecisionTreeModel>,
}

impl TuningTrees {
    pub fn new(inputs: Vec<ParameterSpec>, trees: Vec<DecisionTreeModel>) -> Result<Self> {
        if inputs.is_empty() || trees.is_empty() {
            return Err(Error::Malformed("trees need at least one input and one design parameter".into()));
        }
        if inputs.iter().any(|p| p.role != Role::Input) || trees.iter().any(|t| t.target.role != Role::Design) {
            return Err(Error::Malformed("parameter roles do not match".into()));
        }
        let mut names: Vec<&str> = inputs.iter().map(|p| p.name.as_str()).chain(trees.iter().map(|t| t.target.name.as_str())).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Malformed("duplicate parameter name".into()));
        }
        for t in &trees {
            for node in &t.nodes {
                if let TreeNode::Split { input, .. } = node {
                    if *input >= inputs.len() {
                        return Err(Error::Malformed(format!("tree `{}` splits on unknown input", t.target.name)));
                    }
                }
            }
        }
        Ok(Self { inputs, trees })
    }

    pub fn inputs(&self) -> &[ParameterSpec] {
        &self.inputs
    }

    pub fn trees(&self) -> &[DecisionTreeModel] {
        &self.trees
    }

    /// Whether these trees were built for `space`.
    pub fn matches(&self, space: &ParameterSpace) -> bool {
        space.input_specs().eq(self.inputs.iter()) && space.design_specs().eq(self.trees.iter().map(|t| &t.target))
    }

    /// Encodes input values without bound checks: out-of-range numbers are
    /// routed by the thresholds like any other.
    pub fn encode_inputs(&self, inputs: &[Value]) -> Result<Vec<f64>> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::DimensionMismatch { expected: self.inputs.len(), found: inputs.len() });
        }
        self.inputs
            .iter()
            .zip(inputs)
            .map(|(p, v)| match v {
                Value::Real(x) => Ok(*x),
                Value::Int(x) => Ok(*x as f64),
                Value::Cat(_) => p.encode_value(v),
            })
            .collect()
    }

    /// Encoded design outputs for encoded inputs.
    pub fn predict_encoded(&self, x: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.predict(x)).collect()
    }

    /// Design values chosen for `inputs`.
    pub fn predict_config(&self, inputs: &[Value]) -> Result<Configuration> {
        let x = self.encode_inputs(inputs)?;
        Ok(Configuration::new(
            self.trees.iter().map(|t| t.target.decode_value(t.predict(&x))).collect(),
        ))
    }
}

/// Fits one CART tree per design parameter on (inputs → optimized value):
/// variance reduction for numeric targets, Gini for categorical ones,
/// minimum leaf size 1.
pub fn build_trees(points: &[OptimizedPoint], space: &ParameterSpace, max_depth: usize) -> Result<TuningTrees> {
    if points.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, have: 0 });
    }
    let inputs: Vec<ParameterSpec> = space.input_specs().cloned().collect();
    let designs: Vec<&ParameterSpec> = space.design_specs().collect();
    let mut x = Vec::with_capacity(points.len());
    let mut y = vec![Vec::with_capacity(points.len()); designs.len()];
    for p in points {
        if p.inputs.len() != inputs.len() || p.design.len() != designs.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), found: p.inputs.len() + p.design.len() });
        }
        x.push(inputs.iter().zip(&p.inputs).map(|(s, v)| s.encode_value(v)).collect::<Result<Vec<f64>>>()?);
        for (d, (s, v)) in designs.iter().zip(&p.design).enumerate() {
            y[d].push(s.encode_value(v)?);
        }
    }
    let trees = designs
        .iter()
        .zip(&y)
        .map(|(spec, targets)| {
            let nodes = if spec.is_categorical() {
                let n = spec.labels().map_or(1, <[String]>::len);
                cart::fit_classifier(&x, targets, n, max_depth)
            } else {
                cart::fit_regressor(&x, targets, max_depth)
            };
            DecisionTreeModel::new((*spec).clone(), max_depth, nodes, inputs.len())
        })
        .collect::<Result<Vec<_>>>()?;
    TuningTrees::new(inputs, trees)
}
