//! Result envelopes, JSON and CSV rendering, plot-data tables.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "twodsd",
    version: env!("CARGO_PKG_VERSION"),
};

/// Top-level JSON object of every successful run.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub schema_version: &'static str,
    pub tool: Tool,
    pub command: &'a str,
    pub seed: Option<u64>,
    pub config: &'a C,
    pub result: &'a R,
}

/// A flat table for CSV output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// One row holding every leaf of `value`, keyed by its dotted path.
    pub fn single_row(value: &Value) -> Self {
        let mut cells = Vec::new();
        flatten(value, String::new(), &mut cells);
        let (header, row) = cells.into_iter().unzip();
        Self {
            header,
            rows: vec![row],
        }
    }

    /// One row per element of `values`, with the union of their keys as
    /// columns in first-seen order.
    pub fn from_rows(values: &[Value]) -> Self {
        let flat: Vec<Vec<(String, String)>> = values
            .iter()
            .map(|v| {
                let mut cells = Vec::new();
                flatten(v, String::new(), &mut cells);
                cells
            })
            .collect();
        let mut header: Vec<String> = Vec::new();
        for row in &flat {
            for (k, _) in row {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        let rows = flat
            .iter()
            .map(|row| {
                header
                    .iter()
                    .map(|h| row.iter().find(|(k, _)| k == h).map(|(_, v)| v.clone()).unwrap_or_default())
                    .collect()
            })
            .collect();
        Self { header, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }
}

pub fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(value: &Value, prefix: String, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(v, join(k), out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(v, join(&i.to_string()), out);
            }
        }
        leaf => out.push((prefix, cell(leaf))),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialise to JSON");
    s.push('\n');
    s
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn write_text(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Side files of plot-data mode: `(x, y)`-style tables plus a metadata file
/// describing them.
#[derive(Debug, Serialize)]
pub struct PlotMeta {
    pub schema_version: &'static str,
    pub kind: &'static str,
    pub tables: Vec<PlotTable>,
}

#[derive(Debug, Serialize)]
pub struct PlotTable {
    pub file: String,
    pub x: &'static str,
    pub y: Vec<&'static str>,
    /// Suggests a logarithmic x axis for display. The data are never
    /// transformed.
    pub log_scale_x: bool,
}

pub fn write_plot_data(dir: &Path, meta: &PlotMeta, tables: &[(&str, Table)]) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    for (name, table) in tables {
        write_text(&table.to_csv(), Some(&dir.join(name)))?;
    }
    write_text(&to_json(meta), Some(&dir.join("plot_meta.json")))
}
