//! Pointwise best-of between tuned trees and a reference configuration,
//! retrained into new trees.

use super::{build_trees, TuningTrees};
use crate::driver::{evaluate_batch, Kernel, ObjectivePolicy, SampleRecord};
use crate::error::{Error, Result};
use crate::optimize::OptimizedPoint;
use crate::space::{ParameterSpace, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Candidate,
    Reference,
    /// Both runs failed; the input is left out of the retraining set.
    Dropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeRow {
    pub inputs: Vec<Value>,
    pub candidate: SampleRecord,
    pub reference: SampleRecord,
    pub choice: Choice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub trees: TuningTrees,
    pub rows: Vec<MergeRow>,
    pub dropped: usize,
}

/// Candidate wins only when strictly better; a failed run always loses.
fn choose(candidate: &SampleRecord, reference: &SampleRecord) -> Choice {
    match (candidate.status.is_measured(), reference.status.is_measured()) {
        (false, false) => Choice::Dropped,
        (true, false) => Choice::Candidate,
        (false, true) => Choice::Reference,
        (true, true) if candidate.objective < reference.objective => Choice::Candidate,
        (true, true) => Choice::Reference,
    }
}

/// Measures the candidate's choice and the reference at every input,
/// labels each input with the better of the two, and retrains.
#[allow(clippy::too_many_arguments)]
pub fn expert_merge<K: Kernel + ?Sized>(
    space: &ParameterSpace,
    inputs: &[Vec<Value>],
    candidate: &TuningTrees,
    reference: &[Vec<Value>],
    kernel: &K,
    policy: &ObjectivePolicy,
    max_depth: usize,
    jobs: usize,
) -> Result<MergeOutcome> {
    if reference.len() != inputs.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), found: reference.len() });
    }
    let mut configs = Vec::with_capacity(2 * inputs.len());
    for (x, r) in inputs.iter().zip(reference) {
        let tuned = candidate.predict_config(x)?;
        configs.push(space.join(x, &tuned.values));
        configs.push(space.join(x, r));
    }
    let records = evaluate_batch(kernel, space, &configs, jobs.max(1), policy)?;
    let mut rows = Vec::with_capacity(inputs.len());
    let mut labels = Vec::new();
    for (x, pair) in inputs.iter().zip(records.chunks(2)) {
        let (c, r) = (pair[0].clone(), pair[1].clone());
        let choice = choose(&c, &r);
        let winner = match choice {
            Choice::Candidate => Some(&c),
            Choice::Reference => Some(&r),
            Choice::Dropped => None,
        };
        if let Some(w) = winner {
            let (_, design) = space.split(&w.config);
            labels.push(OptimizedPoint { inputs: x.clone(), design, predicted: w.objective });
        }
        rows.push(MergeRow { inputs: x.clone(), candidate: c, reference: r, choice });
    }
    let dropped = rows.iter().filter(|r| r.choice == Choice::Dropped).count();
    if dropped > 0 {
        log::warn!("{dropped} inputs dropped from the merge: both configurations failed");
    }
    let trees = build_trees(&labels, space, max_depth)?;
    Ok(MergeOutcome { trees, rows, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::tests::one_input_space;
    use crate::driver::{Outcome, Run};
    use crate::space::Configuration;

    /// Best T is 2 below x = 1.5 and 8 above; T = 5 fails.
    struct Steps;

    impl Kernel for Steps {
        fn run(&self, _: &ParameterSpace, c: &Configuration) -> Result<Run> {
            let (Value::Real(x), Value::Int(t)) = (&c.values[0], &c.values[1]) else { unreachable!() };
            let best = if *x <= 1.5 { 2 } else { 8 };
            let outcome = if *t == 5 { Outcome::Failed } else { Outcome::Value(1.0 + (t - best).abs() as f64) };
            Ok(Run { outcome, wall_time: 0.0 })
        }
    }

    fn grid() -> Vec<Vec<Value>> {
        (0..8).map(|i| vec![Value::Real(i as f64 * 3.0 / 7.0)]).collect()
    }

    fn constant(t: i64) -> TuningTrees {
        let pts: Vec<OptimizedPoint> = grid()
            .into_iter()
            .map(|x| OptimizedPoint { inputs: x, design: vec![Value::Int(t)], predicted: 0.0 })
            .collect();
        build_trees(&pts, &one_input_space(), 8).unwrap()
    }

    #[test]
    fn pointwise_best_of() {
        let space = one_input_space();
        let reference: Vec<Vec<Value>> = vec![vec![Value::Int(2)]; 8];
        let m = expert_merge(&space, &grid(), &constant(8), &reference, &Steps, &ObjectivePolicy::default(), 8, 1).unwrap();
        for row in &m.rows {
            let Value::Real(x) = row.inputs[0] else { unreachable!() };
            assert_eq!(row.choice, if x <= 1.5 { Choice::Reference } else { Choice::Candidate });
            let best = m.trees.predict_config(&row.inputs).unwrap();
            assert_eq!(best.values[0], Value::Int(if x <= 1.5 { 2 } else { 8 }));
        }
    }

    #[test]
    fn ties_keep_reference_and_failures_drop() {
        let space = one_input_space();
        let m = expert_merge(&space, &grid(), &constant(3), &vec![vec![Value::Int(3)]; 8], &Steps, &ObjectivePolicy::default(), 8, 1)
            .unwrap();
        assert!(m.rows.iter().all(|r| r.choice == Choice::Reference));
        let m = expert_merge(&space, &grid(), &constant(5), &vec![vec![Value::Int(4)]; 8], &Steps, &ObjectivePolicy::default(), 8, 1)
            .unwrap();
        assert!(m.rows.iter().all(|r| r.choice == Choice::Reference));
        let both_fail = expert_merge(&space, &grid(), &constant(5), &vec![vec![Value::Int(5)]; 8], &Steps, &ObjectivePolicy::default(), 8, 1);
        assert!(both_fail.is_err());
    }
}
