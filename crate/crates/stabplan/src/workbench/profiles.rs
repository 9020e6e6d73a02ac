//! Hourly profile CSVs: one `hour` column followed by one column per entity.

use std::path::Path;

use crate::error::{Error, Result};

/// Read a profile table; returns `[hour][column]` and the column names
/// (excluding `hour`).
pub fn read_profile(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.get(0) != Some("hour") {
        return Err(Error::Parse {
            file: path.display().to_string(),
            location: "header".into(),
            message: "first column must be `hour`".into(),
        });
    }
    let names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(names.len());
        for v in record.iter().skip(1) {
            let parsed: f64 = v.trim().parse().map_err(|_| Error::Parse {
                file: path.display().to_string(),
                location: format!("row {}", i + 2),
                message: format!("bad number `{v}`"),
            })?;
            row.push(parsed);
        }
        if row.len() != names.len() {
            return Err(Error::Parse {
                file: path.display().to_string(),
                location: format!("row {}", i + 2),
                message: "column count mismatch".into(),
            });
        }
        rows.push(row);
    }
    Ok((rows, names))
}

/// Write a profile table.
pub fn write_profile(path: &Path, names: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["hour".to_string()];
    header.extend(names.iter().cloned());
    writer.write_record(&header)?;
    for (t, row) in rows.iter().enumerate() {
        let mut record = vec![t.to_string()];
        record.extend(row.iter().map(|v| format!("{v}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let names = vec!["a".to_string(), "b".to_string()];
        let rows = vec![vec![1.0, 2.0], vec![3.5, -0.25]];
        write_profile(&path, &names, &rows).unwrap();
        let (got, got_names) = read_profile(&path).unwrap();
        assert_eq!(got_names, names);
        assert_eq!(got, rows);
    }

    #[test]
    fn missing_hour_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,a\n0,1\n").unwrap();
        assert!(read_profile(&path).is_err());
    }
}
