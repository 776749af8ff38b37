//! CSV input and output.
//!
//! Design matrices and response vectors arrive as plain numeric CSV with an
//! optional header row. Parse failures name the offending data row and
//! column in 1-based coordinates. Floating point values are written in the
//! shortest decimal form that parses back to identical bits, so a write
//! then read round trip is lossless.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use moce::linalg::Mat;

use crate::error::{CliError, Result};

/// Shortest round-trip decimal form of a finite float.
pub fn fmt_f64(v: f64) -> String {
    debug_assert!(v.is_finite());
    format!("{v}")
}

/// Read a numeric matrix. Row numbers in errors count data rows only.
pub fn read_matrix(path: &Path, header: bool) -> Result<Mat> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Input(format!(
                    "{}: row {}, column {}: cannot parse {field:?} as a number",
                    path.display(),
                    i + 1,
                    j + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Input(format!(
                    "{}: row {}, column {}: non-finite value {field:?}",
                    path.display(),
                    i + 1,
                    j + 1
                )));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    Mat::from_rows(&rows).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Read a single-column numeric vector.
pub fn read_vector(path: &Path, header: bool) -> Result<Vec<f64>> {
    let m = read_matrix(path, header)?;
    if m.cols() != 1 {
        return Err(CliError::Input(format!(
            "{}: expected a single column, found {}",
            path.display(),
            m.cols()
        )));
    }
    Ok(m.col(0).to_vec())
}

/// Write a numeric matrix as CSV, with an optional header row.
pub fn write_matrix(path: &Path, m: &Mat, header: Option<&[String]>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if let Some(h) = header {
        writer.write_record(h)?;
    }
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| fmt_f64(m.get(i, j))).collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a single-column numeric vector as CSV.
pub fn write_vector(path: &Path, v: &[f64], header: Option<&str>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if let Some(h) = header {
        writer.write_record([h])?;
    }
    for &x in v {
        writer.write_record([fmt_f64(x)])?;
    }
    writer.flush()?;
    Ok(())
}

/// Write tabular records preceded by `#` comment lines naming the run.
pub fn write_records(
    path: &Path,
    comments: &[String],
    header: &[String],
    rows: &[Vec<String>],
) -> Result<()> {
    let file = File::create(path)?;
    let mut buf = BufWriter::new(file);
    for c in comments {
        writeln!(buf, "# {c}")?;
    }
    let mut writer = csv::Writer::from_writer(buf);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read records written by [`write_records`], skipping comment lines.
pub fn read_records(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for &v in &[0.1, -3.5e-300, 1.0 / 3.0, 2.0f64.powi(-53), 123456789.123456789] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn matrix_round_trip_and_errors() {
        let dir = std::env::temp_dir().join("moce_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.csv");
        let m = Mat::from_fn(3, 2, |i, j| (i * 2 + j) as f64 / 3.0);
        write_matrix(&path, &m, None).unwrap();
        let back = read_matrix(&path, false).unwrap();
        assert_eq!(back.rows(), 3);
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(back.get(i, j).to_bits(), m.get(i, j).to_bits());
            }
        }

        std::fs::write(&path, "1.0,2.0\n3.0,oops\n").unwrap();
        let err = read_matrix(&path, false).unwrap_err();
        assert!(err.to_string().contains("row 2, column 2"), "{err}");
        std::fs::remove_dir_all(&dir).ok();
    }
}
