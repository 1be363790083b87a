//! Per-input design optimization against the surrogate.

mod ga;
mod grid;

pub use ga::{ga_minimize, GaConfig, GaResult};
pub use grid::{minimize_at, optimize_grid, read_points_csv, write_points_csv, OptimizedPoint};
