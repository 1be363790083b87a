//! Synthetic kernels with known optima, for tests and demos. They record a
//! wall time of zero so that sample stores are reproducible byte for byte.

use std::str::FromStr;

use crate::driver::{Kernel, Outcome, Run};
use crate::error::{Error, Result};
use crate::seed::{self, Stream};
use crate::space::{Configuration, ParameterSpace, ParameterSpec, Role, Value};

pub const CLIFF_BLOCKS: [&str; 5] = ["8", "16", "32", "64", "128"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinName {
    Quad,
    Cliff,
    Discrete,
}

impl FromStr for BuiltinName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad" => Ok(BuiltinName::Quad),
            "cliff" => Ok(BuiltinName::Cliff),
            "discrete" => Ok(BuiltinName::Discrete),
            other => Err(Error::InvalidArgument(format!(
                "unknown builtin kernel `{other}` (expected quad, cliff or discrete)"
            ))),
        }
    }
}

/// A builtin objective, optionally with multiplicative noise
/// `1 + noise · u`, `u ∈ [-1, 1)` hashed from the configuration and seed, so
/// repeated evaluations still agree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Builtin {
    pub name: BuiltinName,
    pub noise: f64,
    pub noise_seed: u64,
}

impl Builtin {
    pub fn new(name: BuiltinName) -> Self {
        Self { name, noise: 0.0, noise_seed: 0 }
    }

    pub fn space(&self) -> ParameterSpace {
        let params = match self.name {
            BuiltinName::Quad => vec![
                ParameterSpec::real("x1", Role::Input, 0.0, 1.0),
                ParameterSpec::real("x2", Role::Input, 0.0, 1.0),
                ParameterSpec::real("d1", Role::Design, 0.0, 1.0),
                ParameterSpec::real("d2", Role::Design, 0.0, 1.0),
            ],
            BuiltinName::Cliff => vec![
                ParameterSpec::integer("n", Role::Input, 256, 4096),
                ParameterSpec::integer("T", Role::Design, 1, 32),
                ParameterSpec::categorical("b", Role::Design, &CLIFF_BLOCKS),
            ],
            BuiltinName::Discrete => vec![
                ParameterSpec::integer("i1", Role::Input, 1, 8),
                ParameterSpec::integer("i2", Role::Input, 1, 8),
                ParameterSpec::integer("d1", Role::Design, 1, 8),
                ParameterSpec::integer("d2", Role::Design, 1, 8),
                ParameterSpec::integer("d3", Role::Design, 1, 8),
            ],
        };
        ParameterSpace::new(params).expect("builtin spaces are valid")
    }

    /// A middle-of-the-road design used as the default comparison point.
    pub fn default_baseline(&self) -> Vec<Value> {
        match self.name {
            BuiltinName::Quad => vec![Value::Real(0.5), Value::Real(0.5)],
            BuiltinName::Cliff => vec![Value::Int(4), Value::Cat("32".into())],
            BuiltinName::Discrete => vec![Value::Int(4), Value::Int(4), Value::Int(4)],
        }
    }

    /// Noise-free objective.
    pub fn exact(&self, config: &Configuration) -> Result<f64> {
        let v = &config.values;
        let real = |i: usize| match &v[i] {
            Value::Real(x) => Ok(*x),
            Value::Int(x) => Ok(*x as f64),
            other => Err(Error::InvalidValue { param: format!("#{i}"), msg: format!("expected a number, got `{other}`") }),
        };
        let expected = self.space().len();
        if v.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: v.len() });
        }
        Ok(match self.name {
            BuiltinName::Quad => {
                let (x1, x2, d1, d2) = (real(0)?, real(1)?, real(2)?, real(3)?);
                0.1 + (d1 - x1).powi(2) + (d2 - (1.0 - x2)).powi(2)
            }
            BuiltinName::Cliff => {
                let (n, t) = (real(0)?, real(1)?);
                let Value::Cat(b) = &v[2] else {
                    return Err(Error::InvalidValue { param: "b".into(), msg: "expected a category".into() });
                };
                cliff(n, t, b)
            }
            BuiltinName::Discrete => {
                let x = [real(0)? as i64, real(1)? as i64];
                let d = [real(2)? as i64, real(3)? as i64, real(4)? as i64];
                discrete(x, d)
            }
        })
    }

    fn noise_factor(&self, config: &Configuration) -> f64 {
        if self.noise == 0.0 {
            return 1.0;
        }
        let mut h = self.noise_seed;
        for v in &config.values {
            let bits = match v {
                Value::Real(x) => x.to_bits(),
                Value::Int(x) => *x as u64,
                Value::Cat(s) => s.bytes().fold(0xcbf29ce484222325u64, |a, b| (a ^ b as u64).wrapping_mul(0x100000001b3)),
            };
            h = seed::derive(h, Stream::Noise, bits);
        }
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        1.0 + self.noise * (2.0 * u - 1.0)
    }
}

/// Best block size for problem size `n`.
pub fn cliff_best_block(n: f64) -> &'static str {
    if n < 1024.0 {
        "8"
    } else if n < 2048.0 {
        "32"
    } else {
        "128"
    }
}

fn cliff(n: f64, t: f64, b: &str) -> f64 {
    let useful = t.min((n / 128.0).ceil());
    n / (50.0 * useful) + if b == cliff_best_block(n) { 0.0 } else { 0.2 }
}

/// `1 + 0.05 · Σ|d_j − t_j| + h`, with targets `t = (i1, i2, 9 − max(i1, i2))`
/// and `h ∈ [0, 0.02)` a fixed hashed table over (inputs, design).
pub fn discrete(x: [i64; 2], d: [i64; 3]) -> f64 {
    let t = [x[0], x[1], 9 - x[0].max(x[1])];
    let dist: i64 = d.iter().zip(&t).map(|(a, b)| (a - b).abs()).sum();
    let key = ((x[0] * 8 + x[1]) * 512 + (d[0] * 64 + d[1] * 8 + d[2])) as u64;
    let h = (seed::derive(0x5eed_d15c, Stream::Noise, key) >> 11) as f64 / (1u64 << 53) as f64;
    1.0 + 0.05 * dist as f64 + 0.02 * h
}

impl Kernel for Builtin {
    fn run(&self, _: &ParameterSpace, config: &Configuration) -> Result<Run> {
        let v = self.exact(config)? * self.noise_factor(config);
        Ok(Run { outcome: Outcome::Value(v), wall_time: 0.0 })
    }
}
