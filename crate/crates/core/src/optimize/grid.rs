use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimize::{ga_minimize, GaConfig};
use crate::scalar::{fmt_real, parse_real, Scalar};
use crate::seed::{self, Stream};
use crate::space::{ParameterSpace, ParameterSpec, Value};
use crate::surrogate::GbdtModel;

/// Best design found for one input point, with its surrogate prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedPoint {
    pub inputs: Vec<Value>,
    pub design: Vec<Value>,
    pub predicted: f64,
}

/// Runs one genetic search over the design dims with `inputs` frozen,
/// minimizing the surrogate prediction.
pub fn minimize_at<T: Scalar>(
    model: &GbdtModel<T>,
    space: &ParameterSpace,
    inputs: &[Value],
    ga: &GaConfig,
) -> Result<OptimizedPoint> {
    if model.n_features() != space.len() {
        return Err(Error::DimensionMismatch { expected: space.len(), found: model.n_features() });
    }
    let mut template = vec![T::zero(); space.len()];
    for (&i, v) in space.input_dims().iter().zip(inputs) {
        template[i] = T::from_f64_lossy(space.params()[i].encode_value(v)?);
    }
    let genes: Vec<ParameterSpec> = space.design_specs().cloned().collect();
    let design_dims = space.design_dims();
    let result = ga_minimize(
        &genes,
        |g: &[T]| {
            let mut x = template.clone();
            for (&i, &v) in design_dims.iter().zip(g) {
                x[i] = v;
            }
            model.predict_unchecked(&x)
        },
        ga,
    )?;
    let design = genes.iter().zip(&result.best).map(|(p, v)| p.decode_value(v.to_f64_lossy())).collect();
    Ok(OptimizedPoint { inputs: inputs.to_vec(), design, predicted: result.value.to_f64_lossy() })
}

/// One independent search per grid point; point `i` uses a seed derived from
/// `ga.rng_seed` and `i`, so results do not depend on `jobs`.
pub fn optimize_grid<T: Scalar>(
    model: &GbdtModel<T>,
    space: &ParameterSpace,
    grid: &[Vec<Value>],
    ga: &GaConfig,
    jobs: usize,
) -> Result<Vec<OptimizedPoint>> {
    ga.validate()?;
    let one = |(i, inputs): (usize, &Vec<Value>)| {
        let cfg = ga.with_seed(seed::derive(ga.rng_seed, Stream::Optimize, i as u64));
        minimize_at(model, space, inputs, &cfg).map_err(|e| {
            log::error!("grid point {i} failed: {e}");
            e
        })
    };
    if jobs <= 1 {
        return grid.iter().enumerate().map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| grid.par_iter().enumerate().map(one).collect())
}

pub fn write_points_csv<W: Write>(space: &ParameterSpace, points: &[OptimizedPoint], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<&str> = space.input_specs().chain(space.design_specs()).map(|p| p.name.as_str()).collect();
    header.push("predicted_objective");
    w.write_record(&header)?;
    for p in points {
        let mut row: Vec<String> = p.inputs.iter().chain(&p.design).map(ParameterSpec::format_value).collect();
        row.push(fmt_real(p.predicted));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points_csv<R: Read>(space: &ParameterSpace, input: R) -> Result<Vec<OptimizedPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let specs: Vec<&ParameterSpec> = space.input_specs().chain(space.design_specs()).collect();
    let n_in = space.input_dims().len();
    let header = r.headers()?.clone();
    let expected: Vec<&str> = specs.iter().map(|p| p.name.as_str()).chain(["predicted_objective"]).collect();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Malformed(format!("optimized points header must be {}", expected.join(","))));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let values = specs
            .iter()
            .zip(row.iter())
            .map(|(p, c)| p.parse_value(c))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Malformed(format!("line {line}: {e}")))?;
        let predicted = parse_real(&row[specs.len()])
            .ok_or_else(|| Error::Malformed(format!("line {line}: bad predicted_objective")))?;
        out.push(OptimizedPoint {
            inputs: values[..n_in].to_vec(),
            design: values[n_in..].to_vec(),
            predicted,
        });
    }
    Ok(out)
}
