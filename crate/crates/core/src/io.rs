//! CSV and JSON writers. Floats use the shortest representation that parses
//! back to the same double; missing values are empty fields.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::{Metrics, METRICS_COLUMNS};
use crate::scan::ScanTable;

pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn format_optional(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    write_bytes(path, &csv_bytes(header, rows)?)
}

pub fn metrics_csv(metrics: &Metrics) -> Result<Vec<u8>> {
    let header: Vec<String> = METRICS_COLUMNS.iter().map(|s| s.to_string()).collect();
    csv_bytes(
        &header,
        metrics
            .rows
            .iter()
            .map(|r| r.values().into_iter().map(format_optional).collect()),
    )
}

pub fn scan_csv(table: &ScanTable) -> Result<Vec<u8>> {
    csv_bytes(
        &table.columns(),
        table.rows.iter().map(|r| {
            let mut fields: Vec<String> = r.point.iter().map(|&v| format_float(v)).collect();
            fields.push(r.status());
            fields.extend(r.metrics.iter().map(|&m| format_optional(m)));
            fields
        }),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_optional(None), "");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let bytes = csv_bytes(
            &["a".into(), "status".into()],
            [vec!["1.0".into(), "error: x, y".into()]],
        )
        .unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,status\r\n1.0,\"error: x, y\"\r\n");
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = write_bytes(&blocker.join("sub/out.csv"), b"").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
