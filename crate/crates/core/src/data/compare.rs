use std::fs;
use std::io::Write;
use std::path::Path;

use super::{io_error, DataError};

/// Header names that carry metadata rather than features.
const META_COLUMNS: [&str; 6] = [
    "name",
    "filename",
    "file",
    "frametime",
    "frameindex",
    "class",
];

fn is_meta(column: &str) -> bool {
    let c = column.trim().trim_matches('\'').trim_matches('"');
    META_COLUMNS.iter().any(|m| c.eq_ignore_ascii_case(m))
}

/// Reads the first data row of a semicolon-delimited functional CSV, keeping
/// every column except name/frame/class metadata.
pub fn load_compare_csv(path: &Path, expected_dim: usize) -> Result<Vec<f64>, DataError> {
    let text = fs::read(path).map_err(io_error(path))?;
    parse_compare_csv(&text, expected_dim, path)
}

pub fn parse_compare_csv(
    bytes: &[u8],
    expected_dim: usize,
    path: &Path,
) -> Result<Vec<f64>, DataError> {
    let csv_err = |e: csv::Error| DataError::Csv {
        path: path.into(),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b';')
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let record = reader
        .records()
        .next()
        .ok_or_else(|| DataError::Csv {
            path: path.into(),
            message: "no data row".into(),
        })?
        .map_err(csv_err)?;

    let mut values = Vec::with_capacity(expected_dim);
    for (column, cell) in headers.iter().zip(record.iter()) {
        if is_meta(column) {
            continue;
        }
        let value = cell
            .trim()
            .parse::<f64>()
            .map_err(|_| DataError::NonNumericCell {
                path: path.into(),
                column: column.to_string(),
                value: cell.to_string(),
            })?;
        values.push(value);
    }
    if values.len() != expected_dim {
        return Err(DataError::WrongArity {
            path: path.into(),
            expected: expected_dim,
            got: values.len(),
        });
    }
    Ok(values)
}

/// Writes `name;frameTime;<features...>;class` with one data row, the layout
/// produced by the openSMILE ComParE functionals configuration.
pub fn write_compare_csv(path: &Path, name: &str, values: &[f64]) -> Result<(), DataError> {
    let mut out = String::with_capacity(values.len() * 24);
    out.push_str("name;frameTime");
    for i in 1..=values.len() {
        out.push_str(&format!(";feature_{i:04}"));
    }
    out.push_str(";class\n");
    out.push_str(&format!("'{name}';0.000000"));
    for v in values {
        out.push(';');
        out.push_str(&v.to_string());
    }
    out.push_str(";?\n");
    let mut f = fs::File::create(path).map_err(io_error(path))?;
    f.write_all(out.as_bytes()).map_err(io_error(path))
}
