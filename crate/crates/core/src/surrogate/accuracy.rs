use crate::driver::{evaluate, Kernel, ObjectivePolicy, SampleRecord};
use crate::error::{Error, Result};
use crate::optimize::OptimizedPoint;
use crate::scalar::Scalar;
use crate::space::{Configuration, ParameterSpace};
use crate::surrogate::{metrics, GbdtModel, Metrics};

pub fn encode_rows<T: Scalar>(space: &ParameterSpace, configs: &[&Configuration]) -> Result<Vec<Vec<T>>> {
    configs.iter().map(|c| space.encode(c)).collect()
}

/// Accuracy against already-measured records (e.g. a random holdout).
/// Records without a finite objective are skipped.
pub fn global_accuracy<T: Scalar>(
    model: &GbdtModel<T>,
    space: &ParameterSpace,
    holdout: &[SampleRecord],
) -> Result<Metrics<f64>> {
    let kept: Vec<&SampleRecord> = holdout.iter().filter(|r| r.objective.is_finite()).collect();
    let configs: Vec<&Configuration> = kept.iter().map(|r| &r.config).collect();
    let preds: Vec<f64> = model
        .predict(&encode_rows::<T>(space, &configs)?)?
        .into_iter()
        .map(T::to_f64_lossy)
        .collect();
    let truths: Vec<f64> = kept.iter().map(|r| r.objective).collect();
    metrics(&preds, &truths)
}

/// Mean absolute error between the surrogate and fresh measurements at the
/// configurations the optimizer picked.
pub fn local_accuracy<T: Scalar, K: Kernel + ?Sized>(
    model: &GbdtModel<T>,
    space: &ParameterSpace,
    kernel: &K,
    points: &[OptimizedPoint],
    policy: &ObjectivePolicy,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, have: 0 });
    }
    let mut preds = Vec::with_capacity(points.len());
    let mut truths = Vec::with_capacity(points.len());
    for p in points {
        let config = space.join(&p.inputs, &p.design);
        let measured = evaluate(kernel, space, &config, policy)?;
        if !measured.objective.is_finite() {
            continue;
        }
        preds.push(model.predict_one(&space.encode::<T>(&config)?)?.to_f64_lossy());
        truths.push(measured.objective);
    }
    Ok(metrics(&preds, &truths)?.mae)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{Outcome, Run};
    use crate::space::{ParameterSpec, Role, Value};

    struct Linear;

    impl Kernel for Linear {
        fn run(&self, _: &ParameterSpace, c: &Configuration) -> Result<Run> {
            let Value::Real(x) = c.values[0] else { unreachable!() };
            Ok(Run { outcome: Outcome::Value(x), wall_time: 0.0 })
        }
    }

    #[test]
    fn constant_model_local_mae() {
        let space = ParameterSpace::new(vec![
            ParameterSpec::real("x", Role::Input, 0.0, 10.0),
            ParameterSpec::integer("t", Role::Design, 1, 2),
        ])
        .unwrap();
        let points: Vec<OptimizedPoint> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&x| OptimizedPoint { inputs: vec![Value::Real(x)], design: vec![Value::Int(1)], predicted: 2.0 })
            .collect();
        let model = GbdtModel::<f64>::constant(2, 2.0);
        let mae = local_accuracy(&model, &space, &Linear, &points, &ObjectivePolicy::default()).unwrap();
        assert!((mae - 2.0 / 3.0).abs() < 1e-15);
    }
}
