use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::aggregate::AggregateTable;
use super::replicate::{ExperimentOutput, MethodSamples};
use crate::model::format_real;
use crate::{Error, Result};

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(f))
}

/// Table-shaped CSV: `k, method, replicates`, then the table columns.
pub fn write_aggregate_csv(path: &Path, comment: &str, table: &AggregateTable) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# {comment}").map_err(|e| Error::io(path, e))?;
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["k".to_string(), "method".into(), "replicates".into()];
    header.extend(table.columns());
    csv.write_record(&header)?;
    for row in &table.rows {
        let mut fields = vec![
            row.k.to_string(),
            row.method.to_string(),
            row.replicates.to_string(),
        ];
        fields.extend(row.cells.iter().map(|c| format_real(c.mean)));
        csv.write_record(&fields)?;
    }
    csv.flush().map_err(|e| Error::io(path, e))
}

/// Long-format draws: `k, method, draw`, then one column per parameter.
pub fn write_samples_csv(
    path: &Path,
    comment: &str,
    params: &[&str],
    samples: &[MethodSamples],
) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# {comment}").map_err(|e| Error::io(path, e))?;
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["k".to_string(), "method".into(), "draw".into()];
    header.extend(params.iter().map(|p| p.to_string()));
    csv.write_record(&header)?;
    for s in samples {
        for (i, row) in s.natural.iter().enumerate() {
            let mut fields = vec![s.k.to_string(), s.method.to_string(), i.to_string()];
            fields.extend(row.iter().map(|v| format_real(*v)));
            csv.write_record(&fields)?;
        }
    }
    csv.flush().map_err(|e| Error::io(path, e))
}

/// Run metadata recorded in the summary file.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryMeta {
    pub version: String,
    pub example: String,
    pub ks: Vec<u32>,
    pub replicates: usize,
    pub particles: usize,
    pub n_target: usize,
    pub n_source: usize,
    pub root_seed: u64,
    pub grid: usize,
    pub npp_a: f64,
    pub npp_b: f64,
    pub theta_target: Vec<f64>,
    pub s_hat: Vec<f64>,
    pub failed_replicates: Vec<usize>,
}

impl SummaryMeta {
    pub fn from_output(out: &ExperimentOutput) -> Self {
        let c = &out.scenarios[0];
        SummaryMeta {
            version: crate::VERSION.to_string(),
            example: c.example.to_string(),
            ks: out.scenarios.iter().map(|s| s.k).collect(),
            replicates: c.replicates,
            particles: c.particles,
            n_target: c.n_target,
            n_source: c.n_source,
            root_seed: c.root_seed,
            grid: c.grid,
            npp_a: c.npp_prior.a,
            npp_b: c.npp_prior.b,
            theta_target: c.shift.theta_target.clone(),
            s_hat: c.shift.s_hat.clone(),
            failed_replicates: out.failures.iter().map(|f| f.replicate).collect(),
        }
    }
}

#[derive(Serialize)]
struct SummaryCell {
    k: u32,
    method: String,
    replicates: usize,
    mean: toml::Table,
    se: toml::Table,
}

#[derive(Serialize)]
struct Summary<'a> {
    run: &'a SummaryMeta,
    cell: Vec<SummaryCell>,
}

/// Metadata plus every table cell with its Monte Carlo standard error.
/// Undefined values (e.g. the standard error of a single replicate) are
/// omitted.
pub fn write_summary_toml(
    path: &Path,
    comment: &str,
    meta: &SummaryMeta,
    table: &AggregateTable,
) -> Result<()> {
    let cell = table
        .rows
        .iter()
        .map(|r| {
            let mut mean = toml::Table::new();
            let mut se = toml::Table::new();
            for c in &r.cells {
                if c.mean.is_finite() {
                    mean.insert(c.name.clone(), c.mean.into());
                }
                if c.se.is_finite() {
                    se.insert(c.name.clone(), c.se.into());
                }
            }
            SummaryCell {
                k: r.k,
                method: r.method.to_string(),
                replicates: r.replicates,
                mean,
                se,
            }
        })
        .collect();
    let text =
        toml::to_string(&Summary { run: meta, cell }).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, format!("# {comment}\n{text}")).map_err(|e| Error::io(path, e))
}
