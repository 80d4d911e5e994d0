use std::collections::BTreeMap;

use crate::eval::{rank_methods, Method, MetricsRecord};

/// Parameters averaged into one table column.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGroup {
    pub name: String,
    pub indices: Vec<usize>,
}

/// Column groups for a parameter list: the linear model reports the mean of
/// the two coefficients and sigma separately; anything else is averaged over
/// all parameters.
pub fn param_groups<S: AsRef<str>>(params: &[S]) -> Vec<ParamGroup> {
    let names: Vec<&str> = params.iter().map(AsRef::as_ref).collect();
    if names == ["beta0", "beta1", "sigma"] {
        vec![
            ParamGroup {
                name: "beta".into(),
                indices: vec![0, 1],
            },
            ParamGroup {
                name: "sigma".into(),
                indices: vec![2],
            },
        ]
    } else {
        vec![ParamGroup {
            name: "theta".into(),
            indices: (0..names.len()).collect(),
        }]
    }
}

/// Mean and Monte Carlo standard error of one column.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub name: String,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub k: u32,
    pub method: Method,
    pub replicates: usize,
    pub cells: Vec<Cell>,
}

impl AggregateRow {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.cells.iter().find(|c| c.name == name).map(|c| c.mean)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTable {
    pub groups: Vec<ParamGroup>,
    pub rows: Vec<AggregateRow>,
}

impl AggregateTable {
    pub fn columns(&self) -> Vec<String> {
        let mut cols = Vec::new();
        for metric in ["bias", "mse", "stdev", "cov"] {
            cols.extend(self.groups.iter().map(|g| format!("{metric}_{}", g.name)));
        }
        cols.extend(["clppd", "c_rank", "loo", "l_rank"].map(String::from));
        cols
    }

    pub fn row(&self, k: u32, method: Method) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.k == k && r.method == method)
    }
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (m, f64::NAN);
    }
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn group_mean(v: &[f64], g: &ParamGroup) -> f64 {
    g.indices.iter().map(|&i| v[i]).sum::<f64>() / g.indices.len() as f64
}

/// Per-(k, method) averages. Ranks are computed within each (k, replicate)
/// over the methods present and then averaged.
pub fn aggregate(records: &[MetricsRecord], groups: &[ParamGroup]) -> AggregateTable {
    let mut ranks: BTreeMap<(u32, usize, Method), (f64, f64)> = BTreeMap::new();
    let mut by_cell: BTreeMap<(u32, usize), Vec<&MetricsRecord>> = BTreeMap::new();
    for r in records {
        by_cell.entry((r.k, r.replicate)).or_default().push(r);
    }
    for ((k, rep), recs) in &by_cell {
        let c = rank_methods(&recs.iter().map(|r| r.clppd).collect::<Vec<_>>(), true);
        let l = rank_methods(&recs.iter().map(|r| r.loo).collect::<Vec<_>>(), true);
        for (i, r) in recs.iter().enumerate() {
            ranks.insert((*k, *rep, r.method), (c[i], l[i]));
        }
    }

    let mut by_group: BTreeMap<(u32, Method), Vec<&MetricsRecord>> = BTreeMap::new();
    for r in records {
        by_group.entry((r.k, r.method)).or_default().push(r);
    }
    let mut rows = Vec::new();
    for ((k, method), recs) in by_group {
        let mut cells = Vec::new();
        let mut push = |name: String, values: Vec<f64>| {
            let (mean, se) = mean_se(&values);
            cells.push(Cell { name, mean, se });
        };
        let metrics: [(&str, fn(&MetricsRecord) -> &Vec<f64>); 4] = [
            ("bias", |r| &r.bias),
            ("mse", |r| &r.mse),
            ("stdev", |r| &r.stdev),
            ("cov", |r| &r.coverage),
        ];
        for (name, field) in metrics {
            for g in groups {
                push(
                    format!("{name}_{}", g.name),
                    recs.iter().map(|r| group_mean(field(r), g)).collect(),
                );
            }
        }
        let rank_of = |r: &MetricsRecord| ranks[&(r.k, r.replicate, r.method)];
        push("clppd".into(), recs.iter().map(|r| r.clppd).collect());
        push("c_rank".into(), recs.iter().map(|r| rank_of(r).0).collect());
        push("loo".into(), recs.iter().map(|r| r.loo).collect());
        push("l_rank".into(), recs.iter().map(|r| rank_of(r).1).collect());
        rows.push(AggregateRow {
            k,
            method,
            replicates: recs.len(),
            cells,
        });
    }
    AggregateTable {
        groups: groups.to_vec(),
        rows,
    }
}
