//! Parameter declarations and the numeric encoding shared by the surrogate,
//! the samplers and the genetic optimizer.
//!
//! Every parameter is encoded as one real: reals pass through, integers are
//! cast, categories become their 0-based ordinal.

mod decl;
mod expr;
mod reform;

use std::collections::HashSet;
use std::fmt;
use std::sync::LazyLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::{fmt_real, Scalar};

pub use decl::{ParamDecl, TypeTag};
pub use expr::Expr;
pub use reform::{resolve_reformulations, BoundReformulation};

static BOOL_LABELS: LazyLock<[String; 2]> =
    LazyLock::new(|| ["false".to_string(), "true".to_string()]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Design,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Input => "input",
            Role::Design => "design",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Real { low: f64, high: f64 },
    Integer { low: i64, high: i64 },
    Categorical { labels: Vec<String> },
    /// Categorical over `false`, `true`.
    Boolean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpec {
    pub name: String,
    pub role: Role,
    pub kind: Kind,
}

/// One parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Cat(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Cat(s) => f.write_str(s),
        }
    }
}

/// Values aligned with a [`ParameterSpace`]'s parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub values: Vec<Value>,
}

impl Configuration {
    pub fn new(values: Vec<Value>) -> Self {
        Self { values }
    }
}

/// Round half to even; the integer rounding rule used everywhere.
pub fn round_even(v: f64) -> f64 {
    v.round_ties_even()
}

impl ParameterSpec {
    pub fn real(name: &str, role: Role, low: f64, high: f64) -> Self {
        Self { name: name.into(), role, kind: Kind::Real { low, high } }
    }

    pub fn integer(name: &str, role: Role, low: i64, high: i64) -> Self {
        Self { name: name.into(), role, kind: Kind::Integer { low, high } }
    }

    pub fn categorical<S: AsRef<str>>(name: &str, role: Role, labels: &[S]) -> Self {
        let labels = labels.iter().map(|s| s.as_ref().to_string()).collect();
        Self { name: name.into(), role, kind: Kind::Categorical { labels } }
    }

    pub fn boolean(name: &str, role: Role) -> Self {
        Self { name: name.into(), role, kind: Kind::Boolean }
    }

    /// Category labels for categorical and boolean parameters.
    pub fn labels(&self) -> Option<&[String]> {
        match &self.kind {
            Kind::Categorical { labels } => Some(labels),
            Kind::Boolean => Some(&BOOL_LABELS[..]),
            _ => None,
        }
    }

    pub fn is_categorical(&self) -> bool {
        self.labels().is_some()
    }

    /// Inclusive bounds of the encoded value.
    pub fn encoded_bounds(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Real { low, high } => (*low, *high),
            Kind::Integer { low, high } => (*low as f64, *high as f64),
            _ => (0.0, (self.labels().map_or(1, <[String]>::len) - 1) as f64),
        }
    }

    /// Number of admissible values, `None` for reals.
    pub fn cardinality(&self) -> Option<u64> {
        match &self.kind {
            Kind::Real { .. } => None,
            Kind::Integer { low, high } => Some((high - low) as u64 + 1),
            _ => self.labels().map(|l| l.len() as u64),
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.kind {
            Kind::Real { low, high } => {
                if !(low.is_finite() && high.is_finite()) {
                    out.push(format!("`{}`: bounds must be finite", self.name));
                } else if low >= high {
                    out.push(format!("`{}`: inverted bounds ({low} >= {high})", self.name));
                }
            }
            Kind::Integer { low, high } => {
                if low > high {
                    out.push(format!("`{}`: inverted bounds ({low} > {high})", self.name));
                }
            }
            Kind::Categorical { labels } => {
                if labels.is_empty() {
                    out.push(format!("`{}`: empty category list", self.name));
                }
                let mut seen = HashSet::new();
                for l in labels {
                    if !seen.insert(l) {
                        out.push(format!("`{}`: duplicate category `{l}`", self.name));
                    }
                }
            }
            Kind::Boolean => {}
        }
        out
    }

    pub fn encode_value(&self, value: &Value) -> Result<f64> {
        let bad = |msg: String| Error::InvalidValue { param: self.name.clone(), msg };
        match (&self.kind, value) {
            (Kind::Real { low, high }, Value::Real(v)) => {
                if !(low <= v && v <= high) {
                    return Err(bad(format!("{v} outside [{low}, {high}]")));
                }
                Ok(*v)
            }
            (Kind::Integer { low, high }, Value::Int(v)) => {
                if !(low <= v && v <= high) {
                    return Err(bad(format!("{v} outside [{low}, {high}]")));
                }
                Ok(*v as f64)
            }
            (_, Value::Cat(label)) if self.is_categorical() => self
                .labels()
                .and_then(|ls| ls.iter().position(|l| l == label))
                .map(|i| i as f64)
                .ok_or_else(|| Error::UnknownCategory {
                    param: self.name.clone(),
                    label: label.clone(),
                }),
            (_, v) => Err(bad(format!("value `{v}` does not match the parameter kind"))),
        }
    }

    /// Maps any finite real back to an admissible value (rounding, clamping).
    pub fn decode_value(&self, v: f64) -> Value {
        match &self.kind {
            Kind::Real { low, high } => Value::Real(v.clamp(*low, *high)),
            Kind::Integer { low, high } => {
                Value::Int((round_even(v) as i64).clamp(*low, *high))
            }
            _ => {
                let labels = self.labels().unwrap_or_default();
                let max = labels.len().saturating_sub(1) as f64;
                let code = round_even(v).clamp(0.0, max) as usize;
                Value::Cat(labels[code].clone())
            }
        }
    }

    /// Snaps an encoded value onto the admissible set without changing kind.
    pub fn snap(&self, v: f64) -> f64 {
        let (lo, hi) = self.encoded_bounds();
        match self.kind {
            Kind::Real { .. } => v.clamp(lo, hi),
            _ => round_even(v).clamp(lo, hi),
        }
    }

    /// Parses a textual value (CSV cell, CLI argument).
    pub fn parse_value(&self, text: &str) -> Result<Value> {
        let text = text.trim();
        let bad = |msg: &str| Error::InvalidValue {
            param: self.name.clone(),
            msg: format!("cannot parse `{text}`: {msg}"),
        };
        let value = match &self.kind {
            Kind::Real { .. } => {
                Value::Real(crate::scalar::parse_real(text).ok_or_else(|| bad("not a real"))?)
            }
            Kind::Integer { .. } => {
                Value::Int(text.parse::<i64>().map_err(|_| bad("not an integer"))?)
            }
            _ => Value::Cat(text.to_string()),
        };
        self.encode_value(&value)?;
        Ok(value)
    }

    /// Canonical text of a value, lossless for reals.
    pub fn format_value(value: &Value) -> String {
        match value {
            Value::Real(v) => fmt_real(*v),
            other => other.to_string(),
        }
    }

    fn canonical(&self) -> String {
        let kind = match &self.kind {
            Kind::Real { low, high } => format!("real[{},{}]", fmt_real(*low), fmt_real(*high)),
            Kind::Integer { low, high } => format!("integer[{low},{high}]"),
            Kind::Categorical { labels } => format!("categorical{labels:?}"),
            Kind::Boolean => "boolean".to_string(),
        };
        format!("{}|{}|{}", self.name, self.role, kind)
    }
}

/// Ordered parameter declarations, partitioned into input and design roles.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    params: Vec<ParameterSpec>,
    input_dims: Vec<usize>,
    design_dims: Vec<usize>,
}

/// Lists every violated invariant of a parameter list.
pub fn validate_space(params: &[ParameterSpec]) -> Result<()> {
    let mut problems = Vec::new();
    let mut names = HashSet::new();
    for p in params {
        if p.name.is_empty() {
            problems.push("empty parameter name".to_string());
        }
        if !names.insert(p.name.as_str()) {
            problems.push(format!("duplicate name `{}`", p.name));
        }
        problems.extend(p.violations());
    }
    if !params.iter().any(|p| p.role == Role::Input) {
        problems.push("no input dims".to_string());
    }
    if !params.iter().any(|p| p.role == Role::Design) {
        problems.push("no design dims".to_string());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSpace(problems))
    }
}

impl ParameterSpace {
    pub fn new(params: Vec<ParameterSpec>) -> Result<Self> {
        validate_space(&params)?;
        let dims = |role| {
            params.iter().enumerate().filter(|(_, p)| p.role == role).map(|(i, _)| i).collect()
        };
        Ok(Self { input_dims: dims(Role::Input), design_dims: dims(Role::Design), params })
    }

    pub fn params(&self) -> &[ParameterSpec] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn input_dims(&self) -> &[usize] {
        &self.input_dims
    }

    pub fn design_dims(&self) -> &[usize] {
        &self.design_dims
    }

    pub fn input_specs(&self) -> impl Iterator<Item = &ParameterSpec> {
        self.input_dims.iter().map(|&i| &self.params[i])
    }

    pub fn design_specs(&self) -> impl Iterator<Item = &ParameterSpec> {
        self.design_dims.iter().map(|&i| &self.params[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// Indices of categorical (including boolean) parameters.
    pub fn categorical_dims(&self) -> Vec<usize> {
        (0..self.params.len()).filter(|&i| self.params[i].is_categorical()).collect()
    }

    pub fn encode<T: Scalar>(&self, config: &Configuration) -> Result<Vec<T>> {
        if config.values.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: config.values.len(),
            });
        }
        self.params
            .iter()
            .zip(&config.values)
            .map(|(p, v)| p.encode_value(v).map(T::from_f64_lossy))
            .collect()
    }

    pub fn decode<T: Scalar>(&self, encoded: &[T]) -> Result<Configuration> {
        if encoded.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: encoded.len(),
            });
        }
        let mut values = Vec::with_capacity(encoded.len());
        for (i, (p, v)) in self.params.iter().zip(encoded).enumerate() {
            let v = v.to_f64_lossy();
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
            values.push(p.decode_value(v));
        }
        Ok(Configuration { values })
    }

    /// Checks that a configuration is admissible.
    pub fn check(&self, config: &Configuration) -> Result<()> {
        self.encode::<f64>(config).map(|_| ())
    }

    /// Builds a full configuration from input values and design values.
    pub fn join(&self, inputs: &[Value], designs: &[Value]) -> Configuration {
        let mut values = vec![Value::Int(0); self.params.len()];
        for (&i, v) in self.input_dims.iter().zip(inputs) {
            values[i] = v.clone();
        }
        for (&i, v) in self.design_dims.iter().zip(designs) {
            values[i] = v.clone();
        }
        Configuration { values }
    }

    /// Splits a configuration into (input values, design values).
    pub fn split(&self, config: &Configuration) -> (Vec<Value>, Vec<Value>) {
        let pick = |dims: &[usize]| dims.iter().map(|&i| config.values[i].clone()).collect();
        (pick(&self.input_dims), pick(&self.design_dims))
    }

    /// Stable hash of the declarations; guards sample stores against reuse
    /// with an edited space.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.params {
            h.update(p.canonical().as_bytes());
            h.update(b"\n");
        }
        hex::encode(&h.finalize()[..8])
    }

    /// Regular grid over the input subspace, first input varying slowest.
    pub fn input_grid(&self, dims_per_axis: &[usize]) -> Result<Vec<Vec<Value>>> {
        if dims_per_axis.len() != self.input_dims.len() {
            return Err(Error::InvalidArgument(format!(
                "grid needs {} axis counts, got {}",
                self.input_dims.len(),
                dims_per_axis.len()
            )));
        }
        let axes = self
            .input_specs()
            .zip(dims_per_axis)
            .map(|(p, &count)| axis_points(p, count))
            .collect::<Result<Vec<_>>>()?;
        let total: usize = axes.iter().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; axes.len()];
        for _ in 0..total {
            out.push(idx.iter().zip(&axes).map(|(&i, a)| a[i].clone()).collect());
            for d in (0..axes.len()).rev() {
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(out)
    }
}

fn axis_points(p: &ParameterSpec, count: usize) -> Result<Vec<Value>> {
    if count == 0 {
        return Err(Error::InvalidArgument(format!("grid axis `{}` has zero points", p.name)));
    }
    let lerp = |lo: f64, hi: f64, i: usize| {
        if i + 1 == count {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (count - 1) as f64
        }
    };
    Ok(match &p.kind {
        Kind::Real { low, high } => {
            if count < 2 {
                return Err(Error::InvalidArgument(format!(
                    "real grid axis `{}` needs at least 2 points",
                    p.name
                )));
            }
            (0..count).map(|i| Value::Real(lerp(*low, *high, i))).collect()
        }
        Kind::Integer { low, high } => {
            let mut pts: Vec<i64> = if count == 1 {
                vec![*low]
            } else {
                (0..count).map(|i| round_even(lerp(*low as f64, *high as f64, i)) as i64).collect()
            };
            pts.dedup();
            if pts.len() < count {
                log::info!("grid axis `{}`: {count} requested, {} distinct integers", p.name, pts.len());
            }
            pts.into_iter().map(Value::Int).collect()
        }
        _ => {
            let labels = p.labels().unwrap_or_default();
            if count < labels.len() {
                log::warn!(
                    "grid axis `{}`: keeping the first {count} of {} categories",
                    p.name,
                    labels.len()
                );
            }
            labels.iter().take(count).map(|l| Value::Cat(l.clone())).collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn demo() -> ParameterSpace {
        ParameterSpace::new(vec![
            ParameterSpec::real("n", Role::Input, 1000.0, 5000.0),
            ParameterSpec::integer("T", Role::Design, 1, 64),
            ParameterSpec::categorical("algo", Role::Design, &["flat", "blocked"]),
        ])
        .unwrap()
    }

    #[test]
    fn minimal_space_is_valid() {
        assert!(validate_space(&[
            ParameterSpec::real("n", Role::Input, 1000.0, 5000.0),
            ParameterSpec::integer("T", Role::Design, 1, 64),
        ])
        .is_ok());
    }

    #[test]
    fn rejects_duplicates_and_missing_roles() {
        let err = validate_space(&[
            ParameterSpec::real("n", Role::Input, 0.0, 1.0),
            ParameterSpec::real("n", Role::Input, 0.0, 1.0),
        ])
        .unwrap_err();
        let Error::InvalidSpace(problems) = err else { panic!() };
        assert!(problems.iter().any(|p| p.contains("duplicate name")));
        assert!(problems.iter().any(|p| p.contains("no design dims")));
    }

    #[test]
    fn rejects_bad_bounds_and_empty_categories() {
        let Error::InvalidSpace(problems) = validate_space(&[
            ParameterSpec::real("a", Role::Input, 2.0, 1.0),
            ParameterSpec::integer("b", Role::Design, 5, 4),
            ParameterSpec::categorical::<&str>("c", Role::Design, &[]),
        ])
        .unwrap_err() else {
            panic!()
        };
        assert_eq!(problems.len(), 3, "{problems:?}");
        // equal integer bounds are fine, equal real bounds are not
        assert!(validate_space(&[
            ParameterSpec::real("a", Role::Input, 1.0, 1.0),
            ParameterSpec::integer("b", Role::Design, 3, 3),
        ])
        .is_err());
        assert!(ParameterSpec::integer("b", Role::Design, 3, 3).violations().is_empty());
    }

    #[test]
    fn encode_ordinal() {
        let s = demo();
        let c = Configuration::new(vec![
            Value::Real(2000.0),
            Value::Int(8),
            Value::Cat("blocked".into()),
        ]);
        assert_eq!(s.encode::<f64>(&c).unwrap(), vec![2000.0, 8.0, 1.0]);
        let b = ParameterSpec::boolean("flag", Role::Design);
        assert_eq!(b.encode_value(&Value::Cat("false".into())).unwrap(), 0.0);
        let bad = Configuration::new(vec![Value::Real(2000.0), Value::Int(8), Value::Cat("gpu".into())]);
        assert!(matches!(s.encode::<f64>(&bad), Err(Error::UnknownCategory { .. })));
    }

    #[test]
    fn decode_rounds_and_clamps() {
        let s = demo();
        let c = s.decode(&[2000.0, 8.4, 0.6]).unwrap();
        assert_eq!(
            c.values,
            vec![Value::Real(2000.0), Value::Int(8), Value::Cat("blocked".into())]
        );
        let c = s.decode(&[2000.0, 200.0, 0.0]).unwrap();
        assert_eq!(c.values[1], Value::Int(64));
        assert_eq!(s.decode(&[2000.0, 2.5, 0.0]).unwrap().values[1], Value::Int(2));
        assert!(matches!(s.decode(&[f64::NAN, 1.0, 0.0]), Err(Error::NonFinite(0))));
    }

    #[test]
    fn grid_shapes() {
        let s = ParameterSpace::new(vec![
            ParameterSpec::real("m", Role::Input, 1000.0, 5000.0),
            ParameterSpec::real("n", Role::Input, 1000.0, 5000.0),
            ParameterSpec::integer("T", Role::Design, 1, 64),
        ])
        .unwrap();
        assert_eq!(s.input_grid(&[16, 16]).unwrap().len(), 256);
        let g = s.input_grid(&[46, 46]).unwrap();
        assert_eq!(g.len(), 2116);
        assert_eq!(g[0], vec![Value::Real(1000.0), Value::Real(1000.0)]);
        assert_eq!(g[2115], vec![Value::Real(5000.0), Value::Real(5000.0)]);
        assert!(s.input_grid(&[0, 3]).is_err());

        let one = ParameterSpace::new(vec![
            ParameterSpec::real("x", Role::Input, 0.0, 1.0),
            ParameterSpec::integer("T", Role::Design, 1, 2),
        ])
        .unwrap();
        let g = one.input_grid(&[3]).unwrap();
        assert_eq!(g, vec![vec![Value::Real(0.0)], vec![Value::Real(0.5)], vec![Value::Real(1.0)]]);
    }

    #[test]
    fn grid_integer_dedup_and_category_truncation() {
        let s = ParameterSpace::new(vec![
            ParameterSpec::integer("k", Role::Input, 1, 3),
            ParameterSpec::categorical("v", Role::Input, &["a", "b", "c"]),
            ParameterSpec::integer("T", Role::Design, 1, 2),
        ])
        .unwrap();
        // 1..=3 with 5 points collapses to 3 distinct integers
        assert_eq!(s.input_grid(&[5, 2]).unwrap().len(), 3 * 2);
        assert_eq!(s.input_grid(&[2, 9]).unwrap().len(), 2 * 3);
    }

    #[test]
    fn fingerprint_tracks_bounds() {
        let a = demo();
        let b = ParameterSpace::new(vec![
            ParameterSpec::real("n", Role::Input, 1000.0, 6000.0),
            ParameterSpec::integer("T", Role::Design, 1, 64),
            ParameterSpec::categorical("algo", Role::Design, &["flat", "blocked"]),
        ])
        .unwrap();
        assert_eq!(a.fingerprint(), demo().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    fn arb_config() -> impl Strategy<Value = Configuration> {
        (1000.0f64..=5000.0, 1i64..=64, 0usize..2).prop_map(|(n, t, a)| {
            Configuration::new(vec![
                Value::Real(n),
                Value::Int(t),
                Value::Cat(["flat", "blocked"][a].into()),
            ])
        })
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(c in arb_config()) {
            let s = demo();
            let back = s.decode(&s.encode::<f64>(&c).unwrap()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn decode_is_total(v in proptest::collection::vec(-1e6f64..1e6, 3)) {
            let s = demo();
            let c = s.decode(&v).unwrap();
            prop_assert!(s.check(&c).is_ok());
        }
    }
}
