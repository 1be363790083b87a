//! Serializable form of a parameter declaration, shared by the experiment
//! configuration and the trees document.

use serde::{Deserialize, Serialize};

use super::{Kind, ParameterSpec, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeTag {
    Real,
    Integer,
    Categorical,
    Boolean,
}

/// `{"name": "T", "role": "design", "type": "integer", "low": 1, "high": 32}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDecl {
    pub name: String,
    pub role: Role,
    #[serde(rename = "type")]
    pub ty: TypeTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

impl ParamDecl {
    /// Converts to a spec; the message names the offending field.
    pub fn to_spec(&self) -> std::result::Result<ParameterSpec, String> {
        let bounds = || match (self.low, self.high) {
            (Some(l), Some(h)) => Ok((l, h)),
            _ => Err(format!("`{}`: `low` and `high` are required for type {:?}", self.name, self.ty)),
        };
        let no_values = || match self.values {
            Some(_) => Err(format!("`{}`: `values` only applies to categorical parameters", self.name)),
            None => Ok(()),
        };
        let kind = match self.ty {
            TypeTag::Real => {
                no_values()?;
                let (low, high) = bounds()?;
                Kind::Real { low, high }
            }
            TypeTag::Integer => {
                no_values()?;
                let (l, h) = bounds()?;
                let int = |v: f64| {
                    (v.fract() == 0.0 && v.abs() < 9.0e15)
                        .then_some(v as i64)
                        .ok_or_else(|| format!("`{}`: integer bound {v} is not an integer", self.name))
                };
                Kind::Integer { low: int(l)?, high: int(h)? }
            }
            TypeTag::Categorical => {
                if self.low.is_some() || self.high.is_some() {
                    return Err(format!("`{}`: categorical parameters take `values`, not bounds", self.name));
                }
                let labels = self.values.clone().ok_or_else(|| format!("`{}`: `values` is required", self.name))?;
                Kind::Categorical { labels }
            }
            TypeTag::Boolean => {
                no_values()?;
                if self.low.is_some() || self.high.is_some() {
                    return Err(format!("`{}`: boolean parameters take no bounds", self.name));
                }
                Kind::Boolean
            }
        };
        Ok(ParameterSpec { name: self.name.clone(), role: self.role, kind })
    }
}

impl From<&ParameterSpec> for ParamDecl {
    fn from(p: &ParameterSpec) -> Self {
        let mut d = ParamDecl { name: p.name.clone(), role: p.role, ty: TypeTag::Boolean, low: None, high: None, values: None };
        match &p.kind {
            Kind::Real { low, high } => {
                d.ty = TypeTag::Real;
                (d.low, d.high) = (Some(*low), Some(*high));
            }
            Kind::Integer { low, high } => {
                d.ty = TypeTag::Integer;
                (d.low, d.high) = (Some(*low as f64), Some(*high as f64));
            }
            Kind::Categorical { labels } => {
                d.ty = TypeTag::Categorical;
                d.values = Some(labels.clone());
            }
            Kind::Boolean => {}
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for p in [
            ParameterSpec::real("x", Role::Input, 0.1, 2.5),
            ParameterSpec::integer("t", Role::Design, -3, 40),
            ParameterSpec::categorical("b", Role::Design, &["8", "a b"]),
            ParameterSpec::boolean("flag", Role::Design),
        ] {
            let json = serde_json::to_string(&ParamDecl::from(&p)).unwrap();
            let back: ParamDecl = serde_json::from_str(&json).unwrap();
            assert_eq!(back.to_spec().unwrap(), p);
        }
    }

    #[test]
    fn rejects_bad_declarations() {
        let parse = |s: &str| serde_json::from_str::<ParamDecl>(s).map_err(|e| e.to_string()).and_then(|d| d.to_spec());
        assert!(parse(r#"{"name":"t","role":"design","type":"integer","low":1.5,"high":4}"#).is_err());
        assert!(parse(r#"{"name":"t","role":"design","type":"real","low":1}"#).is_err());
        assert!(parse(r#"{"name":"t","role":"design","type":"categorical"}"#).is_err());
        assert!(parse(r#"{"name":"t","role":"design","type":"real","low":0,"high":1,"step":2}"#).is_err());
        assert!(parse(r#"{"name":"t","role":"sideways","type":"boolean"}"#).is_err());
    }
}
