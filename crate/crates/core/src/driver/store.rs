use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::driver::{SampleRecord, Status};
use crate::error::{Error, Result};
use crate::scalar::{fmt_real, parse_real};
use crate::space::{Configuration, ParameterSpace, ParameterSpec};

const FINGERPRINT_PREFIX: &str = "# space_fingerprint=";

/// Append-only log of measured samples, bound to one parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStore {
    fingerprint: String,
    records: Vec<SampleRecord>,
}

impl SampleStore {
    pub fn new(space: &ParameterSpace) -> Self {
        Self { fingerprint: space.fingerprint(), records: Vec::new() }
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: SampleRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = SampleRecord>) {
        self.records.extend(records);
    }

    /// Records usable as training data: finite objectives only.
    pub fn training_records(&self) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(|r| r.objective.is_finite())
    }

    pub fn write_to<W: Write>(&self, space: &ParameterSpace, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "{FINGERPRINT_PREFIX}{}", self.fingerprint)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header: Vec<&str> = space.params().iter().map(|p| p.name.as_str()).collect();
        header.extend(["objective", "status", "wall_time"]);
        w.write_record(&header)?;
        for r in &self.records {
            let mut row: Vec<String> = r.config.values.iter().map(ParameterSpec::format_value).collect();
            row.push(fmt_real(r.objective));
            row.push(r.status.to_string());
            row.push(fmt_real(r.wall_time));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the store atomically (temporary file + rename).
    pub fn persist(&self, space: &ParameterSpace, path: &Path) -> Result<()> {
        let tmp = path.with_extension("csv.tmp");
        {
            let f = fs::File::create(&tmp)?;
            let mut buf = std::io::BufWriter::new(f);
            self.write_to(space, &mut buf)?;
            buf.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path, space: &ParameterSpace) -> Result<Self> {
        let f = fs::File::open(path)?;
        Self::read_from(BufReader::new(f), space, path)
    }

    pub fn read_from<R: BufRead>(mut input: R, space: &ParameterSpace, path: &Path) -> Result<Self> {
        let err = |line: u64, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        let mut first = String::new();
        input.read_line(&mut first)?;
        let found = first
            .trim_end()
            .strip_prefix(FINGERPRINT_PREFIX)
            .ok_or_else(|| err(1, "missing `# space_fingerprint=` line".into()))?;
        let expected = space.fingerprint();
        if found != expected {
            return Err(Error::FingerprintMismatch { expected, found: found.to_string() });
        }
        let mut rest = String::new();
        input.read_to_string(&mut rest)?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
        let header = reader.headers().map_err(|e| err(2, e.to_string()))?.clone();
        let n = space.len();
        let expected_header: Vec<&str> = space
            .params()
            .iter()
            .map(|p| p.name.as_str())
            .chain(["objective", "status", "wall_time"])
            .collect();
        if header.iter().ne(expected_header.iter().copied()) {
            return Err(err(2, format!("header must be {}", expected_header.join(","))));
        }
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() + 1);
                err(line, e.to_string())
            })?;
            let line = row.position().map_or(0, |p| p.line() + 1);
            let values = space
                .params()
                .iter()
                .zip(row.iter())
                .map(|(p, cell)| p.parse_value(cell))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| err(line, e.to_string()))?;
            let objective = parse_real(&row[n])
                .ok_or_else(|| err(line, format!("objective `{}` is not a number", &row[n])))?;
            let status: Status = row[n + 1].parse().map_err(|e| err(line, e))?;
            let wall_time = parse_real(&row[n + 2])
                .ok_or_else(|| err(line, format!("wall_time `{}` is not a number", &row[n + 2])))?;
            if status.is_measured() && !objective.is_finite() {
                return Err(err(line, "measured sample with non-finite objective".into()));
            }
            records.push(SampleRecord { config: Configuration::new(values), objective, status, wall_time });
        }
        Ok(Self { fingerprint: expected, records })
    }
}
