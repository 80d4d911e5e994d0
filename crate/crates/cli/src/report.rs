use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use tsmc_core::config::RunConfig;
use tsmc_core::eval::{read_records, Method};
use tsmc_core::experiments::{aggregate, param_groups, AggregateTable};
use tsmc_core::model::{format_real, parse_real};
use tsmc_core::stats::{gaussian_kde_grid, gaussian_kde_grid_2d};

use crate::error::{CliError, Result};
use crate::output::{header, out_dir, save_config, write_text};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Records CSV written by `experiment`.
    #[arg(long)]
    records: PathBuf,

    /// Posterior draws CSV (default: samples.csv next to the records, if present).
    #[arg(long)]
    samples: Option<PathBuf>,

    /// Parameter pair for the bivariate densities (default: the first two).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pair: Option<Vec<String>>,

    /// Grid nodes per axis for the univariate densities.
    #[arg(long, default_value_t = 256)]
    points: usize,

    /// Grid nodes per axis for the bivariate densities.
    #[arg(long, default_value_t = 64)]
    points_2d: usize,
}

/// Aligned plain-text rendering of the table.
pub fn format_table(table: &AggregateTable) -> String {
    let mut head = vec!["k".to_string(), "method".into(), "reps".into()];
    head.extend(table.columns());
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![
                r.k.to_string(),
                r.method.to_string(),
                r.replicates.to_string(),
            ];
            v.extend(r.cells.iter().map(|c| format!("{:.3}", c.mean)));
            v
        })
        .collect();
    let widths: Vec<usize> = (0..head.len())
        .map(|j| {
            rows.iter()
                .map(|r| r[j].len())
                .chain([head[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for line in std::iter::once(&head).chain(&rows) {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, w))| {
                if j == 1 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Draws grouped by `(k, method)`, plus the parameter names.
type Draws = BTreeMap<(u32, Method), Vec<Vec<f64>>>;

fn read_samples(path: &Path) -> Result<(Vec<String>, Draws)> {
    let bad = |line: usize, message: String| CliError::Input {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let text = std::fs::read_to_string(path).map_err(|e| bad(0, e.to_string()))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#'));
    let (hl, head) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let head: Vec<&str> = head.split(',').collect();
    if head.len() < 4 || head[..3] != ["k", "method", "draw"] {
        return Err(bad(
            hl + 1,
            "expected header k,method,draw,<parameters>".into(),
        ));
    }
    let params: Vec<String> = head[3..].iter().map(|s| s.to_string()).collect();
    let mut draws: Draws = BTreeMap::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != head.len() {
            return Err(bad(
                i + 1,
                format!("expected {} fields, got {}", head.len(), f.len()),
            ));
        }
        let k = f[0]
            .parse()
            .map_err(|_| bad(i + 1, "k is not an integer".into()))?;
        let m: Method = f[1].parse().map_err(|e| bad(i + 1, format!("{e}")))?;
        let row = f[3..]
            .iter()
            .map(|v| parse_real(v).map_err(|e| bad(i + 1, e)))
            .collect::<Result<Vec<f64>>>()?;
        draws.entry((k, m)).or_default().push(row);
    }
    Ok((params, draws))
}

fn kde_files(
    dir: &Path,
    seed_line: &str,
    params: &[String],
    draws: &Draws,
    a: &ReportArgs,
) -> Result<()> {
    let mut one = format!("# {seed_line}\nk,method,parameter,x,density\n");
    let (px, py) = match &a.pair {
        Some(p) => {
            let find = |name: &String| {
                params
                    .iter()
                    .position(|q| q == name)
                    .ok_or_else(|| CliError::Usage(format!("unknown parameter `{name}` in --pair")))
            };
            (find(&p[0])?, find(&p[1])?)
        }
        None if params.len() >= 2 => (0, 1),
        None => {
            return Err(CliError::Usage(
                "bivariate densities need two parameters".into(),
            ))
        }
    };
    let mut two = format!(
        "# {seed_line}\nk,method,{},{},density\n",
        params[px], params[py]
    );
    for ((k, m), rows) in draws {
        for (j, name) in params.iter().enumerate() {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            match gaussian_kde_grid(&col, a.points) {
                Some(g) => {
                    for (x, d) in g.xs.iter().zip(&g.density) {
                        let _ = writeln!(
                            one,
                            "{k},{m},{name},{},{}",
                            format_real(*x),
                            format_real(*d)
                        );
                    }
                }
                None => log::warn!("{m} k={k}: no spread in {name}; density skipped"),
            }
        }
        let xs: Vec<f64> = rows.iter().map(|r| r[px]).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[py]).collect();
        match gaussian_kde_grid_2d(&xs, &ys, a.points_2d) {
            Some(g) => {
                for (i, y) in g.ys.iter().enumerate() {
                    for (jx, x) in g.xs.iter().enumerate() {
                        let d = g.density[i * g.xs.len() + jx];
                        let _ = writeln!(
                            two,
                            "{k},{m},{},{},{}",
                            format_real(*x),
                            format_real(*y),
                            format_real(d)
                        );
                    }
                }
            }
            None => log::warn!("{m} k={k}: degenerate pair; bivariate density skipped"),
        }
    }
    write_text(&dir.join("kde_1d.csv"), &one)?;
    write_text(&dir.join("kde_2d.csv"), &two)
}

pub fn run(a: ReportArgs, cfg: RunConfig) -> Result<()> {
    if !a.records.is_file() {
        return Err(CliError::Input {
            path: a.records.clone(),
            message: "records file not found".into(),
        });
    }
    if a.points < 2 || a.points_2d < 2 {
        return Err(CliError::Usage(
            "density grids need at least 2 points per axis".into(),
        ));
    }
    let (params, records) = read_records(&a.records)?;
    let table = aggregate(&records, &param_groups(&params));
    let text = format_table(&table);
    print!("{text}");

    let dir = out_dir(&cfg, "report")?;
    let seed_line = header(cfg.seed());
    write_text(&dir.join("table.txt"), &format!("# {seed_line}\n{text}"))?;

    let samples = a.samples.clone().or_else(|| {
        let p = a.records.with_file_name("samples.csv");
        p.is_file().then_some(p)
    });
    if let Some(path) = samples {
        let (sample_params, draws) = read_samples(&path)?;
        kde_files(&dir, &seed_line, &sample_params, &draws, &a)?;
    } else {
        log::info!("no samples file; density grids skipped");
    }
    save_config(&dir, &cfg)
}
