//! CSV/TSV ingestion of one numeric column per sample.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use twodsd::Sample;

use crate::error::{CliError, CliResult};

/// Column selector: a header name, or a 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSpec {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty column selector".into());
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSpec::Index(i),
            Err(_) => ColumnSpec::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSpec::Index(i) => write!(f, "{i}"),
            ColumnSpec::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HeaderMode {
    /// Treat the first row as a header when its selected field is not numeric.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub path: String,
    pub column: String,
    pub n: usize,
    pub skipped: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

const MISSING: [&str; 7] = ["", "na", "nan", "n/a", "null", "none", "."];

fn is_missing(field: &str) -> bool {
    let f = field.trim();
    MISSING.iter().any(|m| f.eq_ignore_ascii_case(m))
}

fn delimiter_for(path: &Path, text: &str) -> u8 {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    if matches!(ext.as_deref(), Some("tsv" | "tab")) {
        return b'\t';
    }
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains('\t') && !first.contains(',') {
        b'\t'
    } else {
        b','
    }
}

/// Reads the selected columns of one file. Each column yields its own
/// sample; a row missing a value in one column is skipped for that column
/// only.
pub fn ingest_columns(path: &Path, columns: &[ColumnSpec], header: HeaderMode) -> CliResult<Vec<(Sample, IngestReport)>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let blank_lines = text.lines().filter(|l| l.trim().is_empty()).count();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(delimiter_for(path, &text))
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::input(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(CliError::input(path, "file has no rows"));
    }

    let first = &records[0].1;
    let by_name = columns.iter().any(|c| matches!(c, ColumnSpec::Name(_)));
    let has_header = match header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => {
            by_name
                || columns.iter().any(|c| match c {
                    ColumnSpec::Index(i) => first
                        .get(*i)
                        .is_some_and(|f| !is_missing(f) && f.parse::<f64>().is_err()),
                    ColumnSpec::Name(_) => true,
                })
        }
    };
    if by_name && !has_header {
        return Err(CliError::input(path, "a column selected by name needs a header row"));
    }

    let mut out = Vec::with_capacity(columns.len());
    for col in columns {
        let (pos, label) = match col {
            ColumnSpec::Index(i) => {
                let label = if has_header {
                    first.get(*i).map(str::to_string).unwrap_or_else(|| i.to_string())
                } else {
                    i.to_string()
                };
                (*i, label)
            }
            ColumnSpec::Name(name) => {
                let pos = first
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| CliError::input(path, format!("no column named '{name}'")))?;
                (pos, name.clone())
            }
        };
        let body = if has_header { &records[1..] } else { &records[..] };
        let mut values = Vec::with_capacity(body.len());
        let mut skipped = blank_lines;
        for (line, rec) in body {
            match rec.get(pos) {
                Some(f) if !is_missing(f) => {
                    let v: f64 = f.parse().map_err(|_| {
                        CliError::input(path, format!("non-numeric value '{f}' in column '{label}' at line {line}"))
                    })?;
                    if !v.is_finite() {
                        return Err(CliError::input(
                            path,
                            format!("non-finite value '{f}' in column '{label}' at line {line}"),
                        ));
                    }
                    values.push(v);
                }
                _ => skipped += 1,
            }
        }
        if values.is_empty() {
            return Err(CliError::input(path, format!("column '{label}' has no usable rows")));
        }
        let sample = Sample::new(values)?;
        let report = IngestReport {
            path: path.display().to_string(),
            column: label,
            n: sample.len(),
            skipped,
            min: sample.min(),
            max: sample.max(),
            mean: sample.mean(),
        };
        out.push((sample, report));
    }
    Ok(out)
}

pub fn ingest(path: &Path, column: &ColumnSpec, header: HeaderMode) -> CliResult<(Sample, IngestReport)> {
    Ok(ingest_columns(path, std::slice::from_ref(column), header)?.remove(0))
}

/// Writes one column of values with a header row. Values are printed in
/// shortest round-trip form, so re-ingesting reproduces them exactly.
pub fn write_column_csv<W: std::io::Write>(writer: W, header: &str, values: &[f64]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([header])?;
    for v in values {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn bare_numbers() {
        let f = file("1\n3\n", ".csv");
        let (s, r) = ingest(f.path(), &ColumnSpec::Index(0), HeaderMode::Auto).unwrap();
        assert_eq!(s.values(), &[1.0, 3.0]);
        assert_eq!(r.skipped, 0);
    }

    #[test]
    fn header_and_blank_row_are_handled() {
        let f = file("wage\n10\n\n30\n20\n", ".csv");
        let (s, r) = ingest(f.path(), &ColumnSpec::Name("wage".into()), HeaderMode::Auto).unwrap();
        assert_eq!(s.values(), &[10.0, 20.0, 30.0]);
        assert_eq!((r.n, r.skipped), (3, 1));
        assert_eq!(r.column, "wage");
        let (s2, _) = ingest(f.path(), &ColumnSpec::Index(0), HeaderMode::Auto).unwrap();
        assert_eq!(s2, s);
    }

    #[test]
    fn two_named_columns_with_missing_cells() {
        let f = file("men\twomen\n1.5\t2\nNA\t4\n3\t\n", ".tsv");
        let cols = [ColumnSpec::Name("men".into()), ColumnSpec::Name("women".into())];
        let out = ingest_columns(f.path(), &cols, HeaderMode::Auto).unwrap();
        assert_eq!(out[0].0.values(), &[1.5, 3.0]);
        assert_eq!(out[0].1.skipped, 1);
        assert_eq!(out[1].0.values(), &[2.0, 4.0]);
        assert_eq!(out[1].1.skipped, 1);
    }

    #[test]
    fn errors_are_categorised() {
        let f = file("x\n1\nabc\n", ".csv");
        let e = ingest(f.path(), &ColumnSpec::Index(0), HeaderMode::Auto).unwrap_err();
        assert_eq!(e.category(), "input");
        assert!(e.to_string().contains("line 3"), "{e}");
        let f = file("x\nNA\n\n", ".csv");
        assert_eq!(ingest(f.path(), &ColumnSpec::Index(0), HeaderMode::Auto).unwrap_err().category(), "input");
        let e = ingest(Path::new("/nonexistent/file.csv"), &ColumnSpec::Index(0), HeaderMode::Auto).unwrap_err();
        assert_eq!(e.category(), "io_read");
        let f = file("1\n2\n", ".csv");
        assert!(ingest(f.path(), &ColumnSpec::Name("x".into()), HeaderMode::Auto).is_err());
    }

    #[test]
    fn written_samples_round_trip() {
        let sc = twodsd::ScenarioSpec::builtin("3").unwrap();
        let (x, _) = sc.draw_pair(500, 7, 0).unwrap();
        let mut buf = Vec::new();
        write_column_csv(&mut buf, "x", x.values()).unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap(), ".csv");
        let (y, _) = ingest(f.path(), &ColumnSpec::Index(0), HeaderMode::Auto).unwrap();
        assert_eq!(x.values(), y.values());
    }
}
