//! Result tables and their CSV/JSON persistence.
//!
//! Every experiment writes `<experiment>.csv` in long format with the columns of
//! [`CSV_HEADER`]. `n`, `m`, `f` are empty where they do not apply; page rows put
//! `dA` in `m` and `dB` in `n`. Rows are sorted by `(n, m, quantity, label)`, so the
//! same config and seed give byte-identical files apart from the `timestamp` column.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 14] = [
    "schema_version",
    "experiment",
    "seed",
    "code_version",
    "timestamp",
    "n",
    "m",
    "f",
    "quantity",
    "label",
    "value",
    "std_error",
    "g",
    "h",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub timestamp: String,
    pub code_version: String,
}

impl Metadata {
    pub fn now(seed: u64) -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self { seed, timestamp: format!("unix:{secs}"), code_version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub f: Option<f64>,
    pub quantity: String,
    pub label: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub g: Option<f64>,
    pub h: Option<f64>,
}

impl ResultRow {
    pub fn new(quantity: impl Into<String>, value: f64) -> Self {
        Self {
            n: None,
            m: None,
            f: None,
            quantity: quantity.into(),
            label: String::new(),
            value,
            std_error: None,
            g: None,
            h: None,
        }
    }

    pub fn at(mut self, n: usize, m: usize) -> Self {
        self.n = Some(n);
        self.m = Some(m);
        self.f = Some(m as f64 / n as f64);
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_f(mut self, f: f64) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_error(mut self, std_error: f64) -> Self {
        self.std_error = Some(std_error);
        self
    }

    pub fn with_model(mut self, g: f64, h: f64) -> Self {
        self.g = Some(g);
        self.h = Some(h);
        self
    }

    fn floats(&self) -> impl Iterator<Item = f64> + '_ {
        [Some(self.value), self.f, self.std_error, self.g, self.h].into_iter().flatten()
    }

    fn sort_key(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.m.cmp(&other.m))
            .then(self.quantity.cmp(&other.quantity))
            .then(self.label.cmp(&other.label))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub schema_version: u32,
    pub experiment: String,
    pub metadata: Metadata,
    pub rows: Vec<ResultRow>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResultTable {
    pub fn new(experiment: impl Into<String>, metadata: Metadata) -> Self {
        Self { schema_version: SCHEMA_VERSION, experiment: experiment.into(), metadata, rows: Vec::new() }
    }

    pub fn push(&mut self, row: ResultRow) {
        self.rows.push(row);
    }

    /// Stable sort into the canonical row order.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.sort_key(b));
    }

    /// Rejects non-finite floats and rows without a quantity.
    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            if row.quantity.is_empty() {
                return Err(Error::Domain("row without quantity".into()));
            }
            if let Some(x) = row.floats().find(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("non-finite value {x} in row {:?}", row.quantity)));
            }
        }
        Ok(())
    }

    pub fn find(&self, quantity: &str) -> impl Iterator<Item = &ResultRow> {
        let quantity = quantity.to_string();
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(CSV_HEADER)?;
        for row in &self.rows {
            writer.write_record([
                self.schema_version.to_string(),
                self.experiment.clone(),
                self.metadata.seed.to_string(),
                self.metadata.code_version.clone(),
                self.metadata.timestamp.clone(),
                opt(row.n),
                opt(row.m),
                opt(row.f),
                row.quantity.clone(),
                row.label.clone(),
                row.value.to_string(),
                opt(row.std_error),
                opt(row.g),
                opt(row.h),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        self.validate()?;
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(Error::Domain(format!("unexpected CSV header {header:?}")));
        }
        let parse_f = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Domain(format!("bad float {s:?}")))
            }
        };
        let parse_u = |s: &str| -> Result<Option<usize>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Domain(format!("bad integer {s:?}")))
            }
        };
        let mut table: Option<ResultTable> = None;
        for record in reader.records() {
            let r = record?;
            let t = table.get_or_insert_with(|| ResultTable {
                schema_version: r[0].parse().unwrap_or(0),
                experiment: r[1].to_string(),
                metadata: Metadata {
                    seed: r[2].parse().unwrap_or(0),
                    code_version: r[3].to_string(),
                    timestamp: r[4].to_string(),
                },
                rows: Vec::new(),
            });
            t.rows.push(ResultRow {
                n: parse_u(&r[5])?,
                m: parse_u(&r[6])?,
                f: parse_f(&r[7])?,
                quantity: r[8].to_string(),
                label: r[9].to_string(),
                value: parse_f(&r[10])?.ok_or_else(|| Error::Domain("missing value".into()))?,
                std_error: parse_f(&r[11])?,
                g: parse_f(&r[12])?,
                h: parse_f(&r[13])?,
            });
        }
        table.ok_or_else(|| Error::Domain(format!("{} has no data rows", path.display())))
    }
}
