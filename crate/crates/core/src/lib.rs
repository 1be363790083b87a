//! Offline black-box auto-tuning for compute kernels.
//!
//! The pipeline measures a user kernel over a mixed space of *input*
//! parameters (fixed by the caller at runtime, e.g. matrix sizes) and
//! *design* parameters (knobs the library may choose, e.g. thread counts),
//! fits a gradient-boosted tree surrogate, runs one genetic search per point
//! of a regular input grid against that surrogate, and distills the winners
//! into one shallow decision tree per design parameter, emitted as C.
//!
//! The numeric kernels ([`surrogate`], [`optimize`]) are generic over the
//! floating-point type through [`Scalar`]; the aliases below fix them to
//! `f64`, which is what the pipeline and CLI use.

pub mod codegen;
pub mod driver;
pub mod error;
pub mod optimize;
pub mod pipeline;
pub mod sampling;
pub mod scalar;
pub mod seed;
pub mod space;
pub mod surrogate;

pub use error::{Error, Result};
pub use scalar::Scalar;












pub type Surrogate = surrogate::GbdtModel<f64>;
pub type SurrogateF32 = surrogate::GbdtModel<f32>;
pub type Metrics = surrogate::Metrics<f64>;
pub type GaOutcome = optimize::GaResult<f64>;
