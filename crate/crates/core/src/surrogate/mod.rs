//! Gradient-boosted regression trees over encoded configurations, and the
//! accuracy measures used to judge them.

mod accuracy;
mod gbdt;
mod io;
mod metrics;
pub mod tree;

pub use accuracy::{encode_rows, global_accuracy, local_accuracy};
pub use gbdt::{FitTrace, GbdtModel, Loss, TrainConfig};
pub use metrics::{metrics, Metrics};
pub use tree::{Node, RegressionTree, SplitRule};
