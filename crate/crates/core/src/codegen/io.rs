//! Versioned text document for [`TuningTrees`].
//!
//! ```text
//! tune-trees v1
//! input {"name":"n","role":"input","type":"integer","low":256.0,"high":4096.0}
//! tree 8 3 {"name":"T","role":"design","type":"integer","low":1.0,"high":32.0}
//! split 0 1.5000000000000000e0 1 2
//! leaf 2.0000000000000000e0
//! leaf 8.0000000000000000e0
//! end
//! ```
//!
//! `tree <max_depth> <node count> <declaration>`; nodes follow in arena
//! order, and `split <input> <threshold> <left> <right>` links by index.

use super::{DecisionTreeModel, TreeNode, TuningTrees};
use crate::error::{Error, Result};
use crate::scalar::{fmt_real, parse_real};
use crate::space::{ParamDecl, ParameterSpec};

const MAGIC: &str = "tune-trees";
const VERSION: &str = "v1";

fn decl(p: &ParameterSpec) -> String {
    serde_json::to_string(&ParamDecl::from(p)).expect("declarations serialize")
}

pub fn serialize(trees: &TuningTrees) -> String {
    let mut out = format!("{MAGIC} {VERSION}\n");
    for p in trees.inputs() {
        out.push_str(&format!("input {}\n", decl(p)));
    }
    for t in trees.trees() {
        out.push_str(&format!("tree {} {} {}\n", t.max_depth, t.nodes().len(), decl(&t.target)));
        for node in t.nodes() {
            match node {
                TreeNode::Leaf { value } => out.push_str(&format!("leaf {}\n", fmt_real(*value))),
                TreeNode::Split { input, threshold, left, right } => {
                    out.push_str(&format!("split {input} {} {left} {right}\n", fmt_real(*threshold)))
                }
            }
        }
    }
    out.push_str("end\n");
    out
}

fn malformed(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Malformed(format!("trees document line {line}: {msg}"))
}

fn parse_decl(text: &str, line: usize) -> Result<ParameterSpec> {
    let d: ParamDecl = serde_json::from_str(text).map_err(|e| malformed(line, e))?;
    d.to_spec().map_err(|e| malformed(line, e))
}

pub fn deserialize(text: &str) -> Result<TuningTrees> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let (_, head) = lines.next().ok_or_else(|| malformed(1, "empty document"))?;
    match head.split_once(' ') {
        Some((MAGIC, VERSION)) => {}
        Some((MAGIC, v)) => return Err(Error::Version { expected: VERSION.into(), found: v.into() }),
        _ => return Err(malformed(1, "not a trees document")),
    }
    let mut inputs = Vec::new();
    let mut trees: Vec<(ParameterSpec, usize, usize, Vec<TreeNode>)> = Vec::new();
    let mut ended = false;
    for (no, line) in lines.by_ref() {
        let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
        match tag {
            "input" if trees.is_empty() => inputs.push(parse_decl(rest, no)?),
            "tree" => {
                let mut parts = rest.splitn(3, ' ');
                let depth = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| malformed(no, "bad depth"))?;
                let count = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| malformed(no, "bad node count"))?;
                let spec = parse_decl(parts.next().unwrap_or(""), no)?;
                trees.push((spec, depth, count, Vec::new()));
            }
            "leaf" | "split" => {
                let tree = trees.last_mut().ok_or_else(|| malformed(no, "node before any tree"))?;
                let f: Vec<&str> = rest.split(' ').collect();
                let node = match (tag, f.as_slice()) {
                    ("leaf", [v]) => TreeNode::Leaf { value: parse_real(v).ok_or_else(|| malformed(no, "bad value"))? },
                    ("split", [i, t, l, r]) => {
                        let idx = |s: &str| s.parse::<usize>().map_err(|_| malformed(no, "bad index"));
                        TreeNode::Split {
                            input: idx(i)?,
                            threshold: parse_real(t).ok_or_else(|| malformed(no, "bad threshold"))?,
                            left: idx(l)?,
                            right: idx(r)?,
                        }
                    }
                    _ => return Err(malformed(no, format!("bad `{tag}` line"))),
                };
                tree.3.push(node);
            }
            "end" => {
                ended = true;
                break;
            }
            _ => return Err(malformed(no, format!("unexpected `{tag}`"))),
        }
    }
    if !ended {
        return Err(Error::Malformed("trees document is truncated (no `end`)".into()));
    }
    if let Some((no, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(malformed(no, "content after `end`"));
    }
    let n_inputs = inputs.len();
    let trees = trees
        .into_iter()
        .map(|(spec, depth, count, nodes)| {
            if nodes.len() != count {
                return Err(Error::Malformed(format!(
                    "tree `{}` declares {count} nodes, found {}",
                    spec.name,
                    nodes.len()
                )));
            }
            DecisionTreeModel::new(spec, depth, nodes, n_inputs)
        })
        .collect::<Result<Vec<_>>>()?;
    TuningTrees::new(inputs, trees)
}
