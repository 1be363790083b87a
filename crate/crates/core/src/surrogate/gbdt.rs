use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::surrogate::tree::{self, Dataset, RegressionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    /// Squared error; residual targets `y - ŷ`, leaves hold the mean.
    #[default]
    L2,
    /// Absolute error; residual targets `sign(y - ŷ)`, leaves hold the
    /// median raw residual.
    L1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub learning_rate: f64,
    pub loss: Loss,
    /// Recorded for reproducibility; fitting itself draws no random numbers.
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { n_trees: 400, max_depth: 8, min_leaf: 5, learning_rate: 0.1, loss: Loss::L2, rng_seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("surrogate: {m}")));
        if self.n_trees == 0 {
            return bad("n_trees must be at least 1");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if self.min_leaf == 0 {
            return bad("min_leaf must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        Ok(())
    }
}

/// Additive ensemble: `base_score + learning_rate * Σ tree(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel<T> {
    pub(crate) n_features: usize,
    pub(crate) base_score: T,
    pub(crate) learning_rate: T,
    pub(crate) categorical: Vec<usize>,
    pub(crate) trees: Vec<RegressionTree<T>>,
}

/// Per-stage training loss recorded by [`GbdtModel::fit_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace<T> {
    /// Mean training loss (squared or absolute error by `loss`), starting
    /// with the base-score-only model.
    pub losses: Vec<T>,
}

impl<T: Scalar> GbdtModel<T> {
    pub fn constant(n_features: usize, value: T) -> Self {
        Self {
            n_features,
            base_score: value,
            learning_rate: T::one(),
            categorical: Vec::new(),
            trees: Vec::new(),
        }
    }

    pub fn from_parts(
        n_features: usize,
        base_score: T,
        learning_rate: T,
        categorical: Vec<usize>,
        trees: Vec<RegressionTree<T>>,
    ) -> Self {
        Self { n_features, base_score, learning_rate, categorical, trees }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn base_score(&self) -> T {
        self.base_score
    }

    pub fn learning_rate(&self) -> T {
        self.learning_rate
    }

    pub fn categorical_features(&self) -> &[usize] {
        &self.categorical
    }

    pub fn trees(&self) -> &[RegressionTree<T>] {
        &self.trees
    }

    /// Fits the ensemble on rows `x` (encoded configurations) and targets `y`.
    /// `categorical` lists the ordinal-coded feature indices.
    pub fn fit(x: &[Vec<T>], y: &[T], categorical: &[usize], config: &TrainConfig) -> Result<Self> {
        Self::fit_traced(x, y, categorical, config).map(|(m, _)| m)
    }

    pub fn fit_traced(
        x: &[Vec<T>],
        y: &[T],
        categorical: &[usize],
        config: &TrainConfig,
    ) -> Result<(Self, FitTrace<T>)> {
        config.validate()?;
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
        }
        if x.len() < 2 {
            return Err(Error::InsufficientSamples { needed: 2, have: x.len() });
        }
        let n_features = x[0].len();
        for row in x {
            if row.len() != n_features {
                return Err(Error::DimensionMismatch { expected: n_features, found: row.len() });
            }
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut categorical: Vec<usize> = categorical.iter().copied().filter(|&c| c < n_features).collect();
        categorical.sort_unstable();
        categorical.dedup();

        // canonical row order, so the fit does not depend on input order
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| {
            x[a].iter()
                .zip(&x[b])
                .map(|(p, q)| p.partial_cmp(q).unwrap_or(Ordering::Equal))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
                .then_with(|| y[a].partial_cmp(&y[b]).unwrap_or(Ordering::Equal))
        });
        let rows: Vec<Vec<T>> = order.iter().map(|&i| x[i].clone()).collect();
        let y: Vec<T> = order.iter().map(|&i| y[i]).collect();

        let lr = T::from_f64_lossy(config.learning_rate);
        let base = tree::mean(y.iter().copied());
        let mut model = Self { n_features, base_score: base, learning_rate: lr, categorical, trees: Vec::new() };
        let loss_of = |pred: &[T]| -> T {
            let n = T::from_usize_lossy(pred.len());
            match config.loss {
                Loss::L2 => y.iter().zip(pred).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>() / n,
                Loss::L1 => y.iter().zip(pred).map(|(a, b)| (*a - *b).abs()).sum::<T>() / n,
            }
        };
        let mut pred = vec![base; y.len()];
        let mut trace = FitTrace { losses: vec![loss_of(&pred)] };
        if y.iter().all(|&v| v == y[0]) {
            return Ok((model, trace));
        }

        let data = Dataset::new(&rows, n_features, &model.categorical);
        let params = TreeParams { max_depth: config.max_depth, min_leaf: config.min_leaf };
        for _ in 0..config.n_trees {
            let residual: Vec<T> = y.iter().zip(&pred).map(|(a, b)| *a - *b).collect();
            let fitted = match config.loss {
                Loss::L2 => tree::grow(&data, &residual, params, &mut |idx: &[usize]| {
                    tree::mean(idx.iter().map(|&i| residual[i]))
                }),
                Loss::L1 => {
                    let signs: Vec<T> = residual.iter().map(|r| sign(*r)).collect();
                    tree::grow(&data, &signs, params, &mut |idx: &[usize]| {
                        tree::median(idx.iter().map(|&i| residual[i]).collect())
                    })
                }
            };
            let stalled = fitted.tree.nodes().len() == 1 && fitted.tree.predict(&rows[0]) == T::zero();
            if stalled {
                break;
            }
            for (p, &leaf) in pred.iter_mut().zip(&fitted.row_leaf) {
                if let tree::Node::Leaf { value } = fitted.tree.nodes()[leaf] {
                    *p = *p + lr * value;
                }
            }
            model.trees.push(fitted.tree);
            trace.losses.push(loss_of(&pred));
        }
        Ok((model, trace))
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, x: &[T]) -> T {
        let sum: T = self.trees.iter().map(|t| t.predict(x)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn predict_one(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, found: x.len() });
        }
        Ok(self.predict_unchecked(x))
    }

    pub fn predict(&self, rows: &[Vec<T>]) -> Result<Vec<T>> {
        rows.iter().map(|r| self.predict_one(r)).collect()
    }
}

fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}
