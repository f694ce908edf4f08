//! CSV persistence: sample sets (one row per time, one column per path),
//! statistic summaries and aggregate check results.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::ensemble::{PathEnsemble, TiltedEnsembleSpec};
use crate::error::{Error, Result};

/// The `# n=..,T=..,N=..,a=..,lambda=..,seed=..` line heading a samples file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleHeader {
    pub n: usize,
    pub t: f64,
    pub resolution: u32,
    pub a: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl SampleHeader {
    pub fn for_spec(spec: &TiltedEnsembleSpec, seed: u64) -> Self {
        Self {
            n: spec.n,
            t: spec.t,
            resolution: spec.resolution,
            a: spec.a,
            lambda: spec.lambda,
            seed,
        }
    }

    fn line(&self) -> String {
        format!(
            "# n={},T={},N={},a={},lambda={},seed={}",
            self.n, self.t, self.resolution, self.a, self.lambda, self.seed
        )
    }

    fn parse(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| Error::Config("samples file must start with a '#' header line".into()))?;
        let mut h = Self {
            n: 0,
            t: f64::NAN,
            resolution: 0,
            a: f64::NAN,
            lambda: f64::NAN,
            seed: 0,
        };
        let bad = |kv: &str| Error::Config(format!("bad header field '{kv}'"));
        for kv in body.trim().split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(kv))?;
            match k.trim() {
                "n" => h.n = v.parse().map_err(|_| bad(kv))?,
                "T" => h.t = v.parse().map_err(|_| bad(kv))?,
                "N" => h.resolution = v.parse().map_err(|_| bad(kv))?,
                "a" => h.a = v.parse().map_err(|_| bad(kv))?,
                "lambda" => h.lambda = v.parse().map_err(|_| bad(kv))?,
                "seed" => h.seed = v.parse().map_err(|_| bad(kv))?,
                _ => return Err(bad(kv)),
            }
        }
        if h.n == 0 || h.resolution == 0 {
            return Err(Error::Config("header lacks n or N".into()));
        }
        Ok(h)
    }
}

/// Writes `samples` as rows `sample,t,X1,..,Xn`, one per sample and time.
pub fn write_samples<W: Write>(mut out: W, header: &SampleHeader, samples: &[PathEnsemble]) -> Result<()> {
    writeln!(out, "{}", header.line())?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut head = vec!["sample".to_string(), "t".to_string()];
    head.extend((1..=header.n).map(|i| format!("X{i}")));
    w.write_record(&head)?;
    let mut rec = Vec::with_capacity(header.n + 2);
    for (j, s) in samples.iter().enumerate() {
        if s.n() != header.n {
            return Err(Error::Dimension {
                expected: header.n,
                found: s.n(),
            });
        }
        for (k, t) in s.times().iter().enumerate() {
            rec.clear();
            rec.push(j.to_string());
            rec.push(t.to_string());
            rec.extend((0..s.n()).map(|i| s.path(i)[k].to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_samples`].
pub fn read_samples<R: Read>(input: R) -> Result<(SampleHeader, Vec<PathEnsemble>)> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first)?;
    let header = SampleHeader::parse(first.trim_end())?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let n = header.n;
    if r.headers()?.len() != n + 2 {
        return Err(Error::Dimension {
            expected: n + 2,
            found: r.headers()?.len(),
        });
    }
    let mut samples = Vec::new();
    let mut current: Option<(usize, Vec<f64>, Vec<Vec<f64>>)> = None;
    let finish = |(_, times, cols): (usize, Vec<f64>, Vec<Vec<f64>>)| -> Result<PathEnsemble> {
        PathEnsemble::new(times, cols.len(), cols.concat())
    };
    for rec in r.records() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64> {
            rec[j]
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{}'", &rec[j])))
        };
        let id: usize = rec[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad sample index '{}'", &rec[0])))?;
        if current.as_ref().map_or(true, |c| c.0 != id) {
            if let Some(c) = current.take() {
                samples.push(finish(c)?);
            }
            current = Some((id, Vec::new(), vec![Vec::new(); n]));
        }
        let c = current.as_mut().expect("set above");
        c.1.push(parse(1)?);
        for i in 0..n {
            c.2[i].push(parse(i + 2)?);
        }
    }
    if let Some(c) = current.take() {
        samples.push(finish(c)?);
    }
    Ok((header, samples))
}

/// One row of a statistics summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub statistic: String,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "N")]
    pub resolution: u32,
    pub a: f64,
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
    pub seed: u64,
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv_writer(out);
    if rows.is_empty() {
        w.write_record(SUMMARY_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "statistic", "n", "T", "N", "a", "lambda", "alpha", "mean", "stderr", "count", "seed",
];

pub fn read_summary<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// One row of the aggregate results table: a subcheck of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub check: String,
    pub subcheck: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Whether the subcheck enters the verdict of its check.
    pub counted: bool,
}

pub const RESULT_COLUMNS: [&str; 6] = ["check", "subcheck", "value", "threshold", "pass", "counted"];

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv_writer(out);
    if rows.is_empty() {
        w.write_record(RESULT_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
