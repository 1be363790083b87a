//! Line-oriented, versioned text document for boosted models. Reals are
//! written with 17 significant digits, so a round trip is bit-exact.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::{fmt_real, parse_real, Scalar};
use crate::surrogate::tree::{Node, RegressionTree, SplitRule};
use crate::surrogate::GbdtModel;

const MAGIC: &str = "tune-gbdt";
const VERSION: &str = "v1";

impl<T: Scalar> GbdtModel<T> {
    pub fn to_text(&self) -> String {
        let r = |v: T| fmt_real(v.to_f64_lossy());
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "n_features {}", self.n_features);
        let _ = writeln!(out, "base_score {}", r(self.base_score));
        let _ = writeln!(out, "learning_rate {}", r(self.learning_rate));
        let cats: Vec<String> = self.categorical.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "categorical {}", cats.join(" ").trim_end());
        let _ = writeln!(out, "trees {}", self.trees.len());
        for t in &self.trees {
            let _ = writeln!(out, "tree {}", t.nodes().len());
            for n in t.nodes() {
                match n {
                    Node::Leaf { value } => {
                        let _ = writeln!(out, "leaf {}", r(*value));
                    }
                    Node::Split { feature, rule: SplitRule::Threshold(th), left, right } => {
                        let _ = writeln!(out, "split {feature} le {} {left} {right}", r(*th));
                    }
                    Node::Split { feature, rule: SplitRule::Categories(set), left, right } => {
                        let set: Vec<String> = set.iter().map(u32::to_string).collect();
                        let _ = writeln!(out, "split {feature} in {} {left} {right}", set.join(","));
                    }
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Malformed(format!("unexpected end of document, expected {what}")))
        };
        let (_, head) = next("header")?;
        let mut parts = head.split(' ');
        if parts.next() != Some(MAGIC) {
            return Err(Error::Malformed(format!("not a model document: `{head}`")));
        }
        match parts.next() {
            Some(VERSION) => {}
            other => {
                return Err(Error::Version { expected: VERSION.into(), found: other.unwrap_or("").into() })
            }
        }
        let field = |(line, text): (usize, &str), key: &str| -> Result<String> {
            text.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' ').or(if rest.is_empty() { Some("") } else { None }))
                .map(str::to_string)
                .ok_or_else(|| Error::Malformed(format!("line {line}: expected `{key}`")))
        };
        let bad = |line: usize, what: &str| Error::Malformed(format!("line {line}: bad {what}"));
        let int = |line: usize, s: &str| s.parse::<usize>().map_err(|_| bad(line, "integer"));
        let real = |line: usize, s: &str| parse_real(s).map(T::from_f64_lossy).ok_or_else(|| bad(line, "real"));

        let l = next("n_features")?;
        let n_features = int(l.0, &field(l, "n_features")?)?;
        let l = next("base_score")?;
        let base_score = real(l.0, &field(l, "base_score")?)?;
        let l = next("learning_rate")?;
        let learning_rate = real(l.0, &field(l, "learning_rate")?)?;
        let l = next("categorical")?;
        let categorical = field(l, "categorical")?
            .split_whitespace()
            .map(|s| int(l.0, s))
            .collect::<Result<Vec<_>>>()?;
        let l = next("trees")?;
        let n_trees = int(l.0, &field(l, "trees")?)?;
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let l = next("tree")?;
            let n_nodes = int(l.0, &field(l, "tree")?)?;
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                let (line, text) = next("node")?;
                let tok: Vec<&str> = text.split(' ').collect();
                let node = match tok.as_slice() {
                    ["leaf", v] => Node::Leaf { value: real(line, v)? },
                    ["split", f, kind, rule, left, right] => {
                        let feature = int(line, f)?;
                        if feature >= n_features {
                            return Err(bad(line, "feature index"));
                        }
                        let rule = match *kind {
                            "le" => SplitRule::Threshold(real(line, rule)?),
                            "in" => SplitRule::Categories(
                                rule.split(',')
                                    .map(|c| c.parse::<u32>().map_err(|_| bad(line, "category code")))
                                    .collect::<Result<Vec<_>>>()?,
                            ),
                            _ => return Err(bad(line, "split kind")),
                        };
                        Node::Split { feature, rule, left: int(line, left)?, right: int(line, right)? }
                    }
                    _ => return Err(bad(line, "node")),
                };
                nodes.push(node);
            }
            trees.push(
                RegressionTree::from_nodes(nodes)
                    .ok_or_else(|| Error::Malformed("tree with dangling child index".into()))?,
            );
        }
        let (line, end) = next("end")?;
        if end != "end" {
            return Err(bad(line, "trailer"));
        }
        Ok(GbdtModel::from_parts(n_features, base_score, learning_rate, categorical, trees))
    }
}
