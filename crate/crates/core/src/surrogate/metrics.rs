use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Regression accuracy summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics<T> {
    pub mae: T,
    pub rmse: T,
    /// Mean absolute percentage error over nonzero truths; `None` if every
    /// truth is zero.
    pub mape: Option<T>,
    /// Truths excluded from MAPE because they are zero.
    pub mape_excluded: usize,
}

pub fn metrics<T: Scalar>(predictions: &[T], truths: &[T]) -> Result<Metrics<T>> {
    if predictions.len() != truths.len() {
        return Err(Error::DimensionMismatch { expected: truths.len(), found: predictions.len() });
    }
    if truths.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, have: 0 });
    }
    let n = T::from_usize_lossy(truths.len());
    let mut abs = T::zero();
    let mut sq = T::zero();
    let mut pct = T::zero();
    let mut excluded = 0;
    for (&p, &t) in predictions.iter().zip(truths) {
        let e = (p - t).abs();
        abs = abs + e;
        sq = sq + e * e;
        if t == T::zero() {
            excluded += 1;
        } else {
            pct = pct + e / t.abs();
        }
    }
    if excluded > 0 {
        log::warn!("MAPE: excluded {excluded} zero truth value(s)");
    }
    let kept = truths.len() - excluded;
    Ok(Metrics {
        mae: abs / n,
        rmse: (sq / n).sqrt(),
        mape: (kept > 0).then(|| pct / T::from_usize_lossy(kept)),
        mape_excluded: excluded,
    })
}
