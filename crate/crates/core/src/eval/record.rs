use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::model::{format_real, parse_real};
use crate::{Error, Result};

/// The six compared posteriors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    True,
    Bt,
    Bs,
    Bu,
    Fpp,
    Npp,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::True,
        Method::Bt,
        Method::Bs,
        Method::Bu,
        Method::Fpp,
        Method::Npp,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::True => "True",
            Method::Bt => "BT",
            Method::Bs => "BS",
            Method::Bu => "BU",
            Method::Fpp => "FPP",
            Method::Npp => "NPP",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method `{0}`")]
pub struct ParseMethodError(pub String);

impl FromStr for Method {
    type Err = ParseMethodError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| ParseMethodError(s.to_string()))
    }
}

/// Metrics of one method on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub scenario_id: String,
    pub k: u32,
    pub replicate: usize,
    pub method: Method,
    pub bias: Vec<f64>,
    pub mse: Vec<f64>,
    pub stdev: Vec<f64>,
    /// 1 when the truth is inside the HPD region.
    pub coverage: Vec<f64>,
    pub clppd: f64,
    pub loo: f64,
}

fn header(params: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = ["scenario_id", "k", "replicate", "method"]
        .map(String::from)
        .to_vec();
    for metric in ["bias", "mse", "stdev", "cov"] {
        h.extend(params.iter().map(|p| format!("{metric}_{p}")));
    }
    h.push("clppd".into());
    h.push("loo".into());
    h
}

/// Writes records as CSV after a `# ` comment line.
pub fn write_records_to<W: Write>(
    w: W,
    comment: &str,
    params: &[&str],
    records: &[MetricsRecord],
) -> Result<()> {
    let mut w = w;
    writeln!(w, "# {comment}").map_err(|e| Error::Csv(e.into()))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header(params))?;
    for r in records {
        if [&r.bias, &r.mse, &r.stdev, &r.coverage]
            .iter()
            .any(|v| v.len() != params.len())
        {
            return Err(Error::InvalidArgument(format!(
                "record {}/{} has the wrong parameter count",
                r.replicate, r.method
            )));
        }
        let mut row = vec![
            r.scenario_id.clone(),
            r.k.to_string(),
            r.replicate.to_string(),
            r.method.to_string(),
        ];
        for v in [&r.bias, &r.mse, &r.stdev] {
            row.extend(v.iter().map(|x| format_real(*x)));
        }
        row.extend(r.coverage.iter().map(|x| format!("{}", *x as u8)));
        row.push(format_real(r.clppd));
        row.push(format_real(r.loo));
        csv.write_record(&row)?;
    }
    csv.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_records(
    path: &Path,
    comment: &str,
    params: &[&str],
    records: &[MetricsRecord],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records_to(std::io::BufWriter::new(file), comment, params, records)
}

/// Reads a records CSV; returns the parameter names and the records. Errors
/// name the 1-based file line.
pub fn read_records(path: &Path) -> Result<(Vec<String>, Vec<MetricsRecord>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let skipped = text.lines().take_while(|l| l.starts_with('#')).count();
    let body: String = text
        .lines()
        .skip(skipped)
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    let head: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let header_line = skipped + 1;
    if head.len() < 6
        || (head.len() - 6) % 4 != 0
        || head[..4] != ["scenario_id", "k", "replicate", "method"]
    {
        return Err(Error::InvalidObservation {
            row: header_line,
            reason: "unrecognised records header".into(),
        });
    }
    let p = (head.len() - 6) / 4;
    let params: Vec<String> = head[4..4 + p]
        .iter()
        .map(|h| h.strip_prefix("bias_").unwrap_or(h).to_string())
        .collect();
    let refs: Vec<&str> = params.iter().map(String::as_str).collect();
    if header(&refs) != head {
        return Err(Error::InvalidObservation {
            row: header_line,
            reason: "unrecognised records header".into(),
        });
    }
    let mut records = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let line = header_line + 1 + n;
        let bad = |reason: String| Error::InvalidObservation { row: line, reason };
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.len() != head.len() {
            return Err(bad(format!(
                "expected {} fields, got {}",
                head.len(),
                row.len()
            )));
        }
        let real =
            |i: usize| parse_real(&row[i]).map_err(|e| bad(format!("column {}: {e}", head[i])));
        let reals = |start: usize| (start..start + p).map(real).collect::<Result<Vec<f64>>>();
        records.push(MetricsRecord {
            scenario_id: row[0].to_string(),
            k: row[1]
                .parse()
                .map_err(|_| bad("k is not an integer".into()))?,
            replicate: row[2]
                .parse()
                .map_err(|_| bad("replicate is not an integer".into()))?,
            method: row[3]
                .parse()
                .map_err(|e: ParseMethodError| bad(e.to_string()))?,
            bias: reals(4)?,
            mse: reals(4 + p)?,
            stdev: reals(4 + 2 * p)?,
            coverage: reals(4 + 3 * p)?,
            clppd: real(4 + 4 * p)?,
            loo: real(5 + 4 * p)?,
        });
    }
    Ok((params, records))
}
