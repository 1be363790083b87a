//! C source emission: one pure function per design parameter.

use std::collections::HashMap;
use std::fmt::Write;

use super::{TreeNode, TuningTrees};
use crate::error::{Error, Result};
use crate::scalar::fmt_real;
use crate::space::Kind;

/// Maps a name onto a C identifier: invalid characters become `_`, and a
/// leading digit gets a `_` prefix.
pub fn sanitize(name: &str) -> String {
    let mut out: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

fn comment_safe(s: &str) -> String {
    s.replace("*/", "* /").replace(['\n', '\r'], " ")
}

fn kind_name(kind: &Kind) -> String {
    match kind {
        Kind::Real { low, high } => format!("real in [{low}, {high}]"),
        Kind::Integer { low, high } => format!("integer in [{low}, {high}]"),
        Kind::Categorical { .. } => "categorical, pass the code".to_string(),
        Kind::Boolean => "boolean, pass 0 or 1".to_string(),
    }
}

/// Emits `double <prefix>_<param>(double x0, ...)` for every design
/// parameter. Categorical parameters return the category code.
pub fn emit_c(trees: &TuningTrees, prefix: &str) -> Result<String> {
    if sanitize(prefix) != prefix {
        return Err(Error::Codegen(format!("prefix `{prefix}` is not a C identifier")));
    }
    let mut seen: HashMap<String, &str> = HashMap::new();
    let mut fn_names = Vec::new();
    for t in trees.trees() {
        let name = format!("{prefix}_{}", sanitize(&t.target.name));
        if let Some(other) = seen.insert(name.clone(), &t.target.name) {
            return Err(Error::Codegen(format!(
                "`{}` and `{other}` both map to the C identifier `{name}`",
                t.target.name
            )));
        }
        fn_names.push(name);
    }

    let mut out = String::new();
    out.push_str("/* Generated decision trees.\n *\n * Arguments:\n");
    for (k, p) in trees.inputs().iter().enumerate() {
        let _ = writeln!(out, " *   x{k} = {} ({})", comment_safe(&p.name), kind_name(&p.kind));
    }
    for p in trees.inputs().iter().chain(trees.trees().iter().map(|t| &t.target)) {
        if let Some(labels) = p.labels() {
            let _ = writeln!(out, " *\n * Codes of {}:", comment_safe(&p.name));
            for (c, l) in labels.iter().enumerate() {
                let _ = writeln!(out, " *   {c} = {}", comment_safe(l));
            }
        }
    }
    out.push_str(" */\n");

    let params: Vec<String> = (0..trees.inputs().len()).map(|k| format!("double x{k}")).collect();
    let params = params.join(", ");
    for (t, name) in trees.trees().iter().zip(&fn_names) {
        let _ = writeln!(out, "\ndouble {name}({params})\n{{");
        for k in 0..trees.inputs().len() {
            let _ = writeln!(out, "    (void)x{k};");
        }
        body(&mut out, t.nodes(), 0, 1, &|v| t.target.snap(v));
        out.push_str("}\n");
    }
    Ok(out)
}

fn body(out: &mut String, nodes: &[TreeNode], i: usize, indent: usize, snap: &dyn Fn(f64) -> f64) {
    let pad = "    ".repeat(indent);
    match &nodes[i] {
        TreeNode::Leaf { value } => {
            let _ = writeln!(out, "{pad}return {};", fmt_real(snap(*value)));
        }
        TreeNode::Split { input, threshold, left, right } => {
            let _ = writeln!(out, "{pad}if (x{input} <= {}) {{", fmt_real(*threshold));
            body(out, nodes, *left, indent + 1, snap);
            let _ = writeln!(out, "{pad}}} else {{");
            body(out, nodes, *right, indent + 1, snap);
            let _ = writeln!(out, "{pad}}}");
        }
    }
}
