//! CSV tables and metadata side-cars, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::sweep::SweepResult;

/// `x` in scientific notation with `digits` significant digits.
pub fn format_float(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.*e}", digits.saturating_sub(1), x)
    }
}

/// The CSV document for a result: header row, one line per row, status last.
pub fn to_csv(result: &SweepResult, digits: usize) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = result.columns.iter().map(String::as_str).collect();
    header.push("status");
    w.write_record(&header)?;
    for (row, status) in result.rows.iter().zip(&result.status) {
        let mut rec: Vec<String> = row.iter().map(|&x| format_float(x, digits)).collect();
        rec.push(status.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(w.into_inner().expect("flushed writer"))
}

/// Side-car path `<stem>.meta.json` next to `csv_path`.
pub fn metadata_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv_path.with_file_name(format!("{stem}.meta.json"))
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes the CSV and its metadata side-car; returns the side-car path.
pub fn write_result(result: &SweepResult, path: &Path, digits: usize) -> std::io::Result<PathBuf> {
    let csv = to_csv(result, digits).map_err(std::io::Error::other)?;
    let meta = serde_json::to_vec_pretty(&result.metadata).map_err(std::io::Error::other)?;
    write_atomic(path, &csv)?;
    let meta_path = metadata_path(path);
    write_atomic(&meta_path, &meta)?;
    Ok(meta_path)
}
