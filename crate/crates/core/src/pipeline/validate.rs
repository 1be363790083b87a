//! Measures tuned trees against a baseline over a validation grid.

use std::io::{Read, Write};

use crate::codegen::TuningTrees;
use crate::driver::{evaluate_batch, Kernel, ObjectivePolicy, SampleRecord};
use crate::error::{Error, Result};
use crate::scalar::fmt_real;
use crate::space::{ParameterSpace, ParameterSpec, Value};

/// What the tuned configurations are compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    Fixed(Vec<Value>),
    /// Per-input designs; inputs missing from the table use the nearest
    /// listed input (normalized encoded distance, first on ties).
    Reference(Vec<(Vec<Value>, Vec<Value>)>),
}

impl Baseline {
    pub fn design_for(&self, space: &ParameterSpace, inputs: &[Value]) -> Result<Vec<Value>> {
        match self {
            Baseline::Fixed(d) => Ok(d.clone()),
            Baseline::Reference(table) => {
                if let Some((_, d)) = table.iter().find(|(x, _)| x.as_slice() == inputs) {
                    return Ok(d.clone());
                }
                let specs: Vec<&ParameterSpec> = space.input_specs().collect();
                let point = encode_normalized(&specs, inputs)?;
                let mut best: Option<(f64, &Vec<Value>)> = None;
                for (x, d) in table {
                    let q = encode_normalized(&specs, x)?;
                    let dist: f64 = point.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                    if best.is_none_or(|(bd, _)| dist < bd) {
                        best = Some((dist, d));
                    }
                }
                best.map(|(_, d)| d.clone()).ok_or_else(|| Error::InvalidArgument("empty reference table".into()))
            }
        }
    }
}

fn encode_normalized(specs: &[&ParameterSpec], values: &[Value]) -> Result<Vec<f64>> {
    specs
        .iter()
        .zip(values)
        .map(|(p, v)| {
            let (lo, hi) = p.encoded_bounds();
            let e = p.encode_value(v)?;
            Ok(if hi > lo { (e - lo) / (hi - lo) } else { 0.0 })
        })
        .collect()
}

/// Reads a reference table: a header of input then design parameter names
/// (extra columns are ignored), one row per input point.
pub fn read_reference_csv<R: Read>(space: &ParameterSpace, input: R) -> Result<Vec<(Vec<Value>, Vec<Value>)>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Malformed(format!("reference table has no column `{name}`")))
    };
    let inputs: Vec<(usize, &ParameterSpec)> = space.input_specs().map(|p| Ok((col(&p.name)?, p))).collect::<Result<_>>()?;
    let designs: Vec<(usize, &ParameterSpec)> = space.design_specs().map(|p| Ok((col(&p.name)?, p))).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let parse = |cols: &[(usize, &ParameterSpec)]| -> Result<Vec<Value>> {
            cols.iter().map(|(i, p)| p.parse_value(row.get(*i).unwrap_or(""))).collect()
        };
        out.push((parse(&inputs)?, parse(&designs)?));
    }
    if out.is_empty() {
        return Err(Error::Malformed("reference table has no rows".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub inputs: Vec<Value>,
    pub tuned: SampleRecord,
    pub baseline: SampleRecord,
    /// `baseline / tuned`; `None` when either run failed or is not positive.
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub geomean_speedup: f64,
    /// Percent of compared inputs with speedup > 1.
    pub progressions_pct: f64,
    /// Percent of compared inputs with speedup < 1.
    pub regressions_pct: f64,
    /// Mean speedup over progressions.
    pub mean_progression_speedup: f64,
    /// Mean of `tuned / baseline` over regressions.
    pub mean_regression_slowdown: f64,
    pub failures: usize,
}

impl ValidationReport {
    pub fn from_rows(rows: Vec<ValidationRow>) -> Self {
        let speedups: Vec<f64> = rows.iter().filter_map(|r| r.speedup).collect();
        let n = speedups.len() as f64;
        let nan_if_empty = |v: &[f64], f: &dyn Fn(f64) -> f64| {
            if v.is_empty() { f64::NAN } else { v.iter().map(|&x| f(x)).sum::<f64>() / v.len() as f64 }
        };
        let prog: Vec<f64> = speedups.iter().copied().filter(|&s| s > 1.0).collect();
        let regr: Vec<f64> = speedups.iter().copied().filter(|&s| s < 1.0).collect();
        Self {
            geomean_speedup: nan_if_empty(&speedups, &f64::ln).exp(),
            progressions_pct: if n > 0.0 { 100.0 * prog.len() as f64 / n } else { f64::NAN },
            regressions_pct: if n > 0.0 { 100.0 * regr.len() as f64 / n } else { f64::NAN },
            mean_progression_speedup: nan_if_empty(&prog, &|x| x),
            mean_regression_slowdown: nan_if_empty(&regr, &|x| 1.0 / x),
            failures: rows.len() - speedups.len(),
            rows,
        }
    }

    pub fn progressions(&self) -> usize {
        self.rows.iter().filter(|r| r.speedup.is_some_and(|s| s > 1.0)).count()
    }

    pub fn regressions(&self) -> usize {
        self.rows.iter().filter(|r| r.speedup.is_some_and(|s| s < 1.0)).count()
    }

    /// One row per input, ready for heatmap plotting.
    pub fn write_csv<W: Write>(&self, space: &ParameterSpace, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header: Vec<String> = space.input_specs().map(|p| p.name.clone()).collect();
        header.extend(space.design_specs().map(|p| format!("tuned_{}", p.name)));
        header.extend(space.design_specs().map(|p| format!("baseline_{}", p.name)));
        header.extend(["tuned_objective", "tuned_status", "baseline_objective", "baseline_status", "speedup"].map(String::from));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.inputs.iter().map(ParameterSpec::format_value).collect();
            for s in [&r.tuned, &r.baseline] {
                let (_, design) = space.split(&s.config);
                rec.extend(design.iter().map(ParameterSpec::format_value));
            }
            rec.push(fmt_real(r.tuned.objective));
            rec.push(r.tuned.status.as_str().into());
            rec.push(fmt_real(r.baseline.objective));
            rec.push(r.baseline.status.as_str().into());
            rec.push(r.speedup.map_or_else(String::new, fmt_real));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "validation inputs: {}\n\
             compared: {}\n\
             failures: {}\n\
             geomean speedup: {:.4}\n\
             progressions: {} ({:.1}%)\n\
             regressions: {} ({:.1}%)\n\
             mean progression speedup: {:.4}\n\
             mean regression slowdown: {:.4}\n",
            self.rows.len(),
            self.rows.len() - self.failures,
            self.failures,
            self.geomean_speedup,
            self.progressions(),
            self.progressions_pct,
            self.regressions(),
            self.regressions_pct,
            self.mean_progression_speedup,
            self.mean_regression_slowdown,
        )
    }
}

/// Runs tuned and baseline designs at every grid input.
pub fn validate<K: Kernel + ?Sized>(
    space: &ParameterSpace,
    trees: &TuningTrees,
    baseline: &Baseline,
    grid: &[Vec<Value>],
    kernel: &K,
    policy: &ObjectivePolicy,
    jobs: usize,
) -> Result<ValidationReport> {
    let mut configs = Vec::with_capacity(2 * grid.len());
    for x in grid {
        configs.push(space.join(x, &trees.predict_config(x)?.values));
        configs.push(space.join(x, &baseline.design_for(space, x)?));
    }
    let records = evaluate_batch(kernel, space, &configs, jobs.max(1), policy)?;
    let rows = grid
        .iter()
        .zip(records.chunks(2))
        .map(|(x, pair)| {
            let (tuned, base) = (pair[0].clone(), pair[1].clone());
            let ok = |r: &SampleRecord| r.status.is_measured() && r.objective.is_finite() && r.objective > 0.0;
            let speedup = (ok(&tuned) && ok(&base)).then(|| base.objective / tuned.objective);
            ValidationRow { inputs: x.clone(), tuned, baseline: base, speedup }
        })
        .collect();
    let report = ValidationReport::from_rows(rows);
    if report.failures > 0 {
        log::warn!("{} validation inputs failed and are excluded from the aggregates", report.failures);
    }
    Ok(report)
}
