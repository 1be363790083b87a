//! Replacement of a constrained parameter by a free `alpha ∈ [0, 1]` that
//! interpolates between context-dependent bounds.

use crate::error::{Error, Result};
use crate::space::{round_even, Configuration, Expr, ParameterSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReformulation {
    /// Name of the derived parameter handed to the kernel.
    pub target: String,
    /// Design parameter in `[0, 1]` that replaces `target` in the space.
    pub alpha_name: String,
    pub lower: Expr,
    pub upper: Expr,
    /// Round the interpolated value to an integer inside the bounds.
    pub integer: bool,
}

impl BoundReformulation {
    pub fn new(target: &str, alpha_name: &str, lower: &str, upper: &str, integer: bool) -> Result<Self> {
        Ok(Self {
            target: target.into(),
            alpha_name: alpha_name.into(),
            lower: Expr::parse(lower)?,
            upper: Expr::parse(upper)?,
            integer,
        })
    }

    /// Evaluates both bounds in `context`.
    pub fn bounds(&self, context: &dyn Fn(&str) -> Option<f64>) -> Result<(f64, f64)> {
        let lower = self.lower.eval(context)?;
        let upper = self.upper.eval(context)?;
        if lower > upper {
            return Err(Error::InfeasibleContext { target: self.target.clone(), lower, upper });
        }
        Ok((lower, upper))
    }

    /// `lower + alpha * (upper - lower)`; integer targets are rounded half to
    /// even and clamped to the integers inside `[lower, upper]`.
    pub fn apply(&self, alpha: f64, context: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidValue {
                param: self.alpha_name.clone(),
                msg: format!("alpha {alpha} outside [0, 1]"),
            });
        }
        let (lower, upper) = self.bounds(context)?;
        let value = lower + alpha * (upper - lower);
        if !self.integer {
            return Ok(value.clamp(lower, upper));
        }
        let (lo, hi) = (lower.ceil(), upper.floor());
        if lo > hi {
            return Err(Error::InfeasibleContext { target: self.target.clone(), lower, upper });
        }
        Ok(round_even(value).clamp(lo, hi))
    }
}

/// Resolves every reformulation for `config`, in order. Later bounds may
/// refer to earlier targets as well as to any parameter of the space
/// (categoricals by ordinal).
pub fn resolve_reformulations(
    reforms: &[BoundReformulation],
    space: &ParameterSpace,
    config: &Configuration,
) -> Result<Vec<(String, f64)>> {
    let encoded: Vec<f64> = space.encode(config)?;
    let mut resolved: Vec<(String, f64)> = Vec::with_capacity(reforms.len());
    for r in reforms {
        let alpha_idx = space.index_of(&r.alpha_name).ok_or_else(|| Error::InvalidValue {
            param: r.alpha_name.clone(),
            msg: "reformulation alpha is not a declared parameter".into(),
        })?;
        let value = {
            let lookup = |name: &str| {
                resolved
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, v)| *v)
                    .or_else(|| space.index_of(name).map(|i| encoded[i]))
            };
            r.apply(encoded[alpha_idx], &lookup)?
        };
        resolved.push((r.target.clone(), value));
    }
    Ok(resolved)
}
