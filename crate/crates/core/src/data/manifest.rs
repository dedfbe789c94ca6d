use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::{io_error, DataError};
use crate::models::{Label, MMSE_MAX};

pub const MANIFEST_COLUMNS: [&str; 8] = [
    "subject_id",
    "transcript_path",
    "audio_path",
    "duration_s",
    "acoustic_csv_path",
    "label",
    "mmse",
    "group_id",
];
const REQUIRED: [&str; 3] = ["subject_id", "transcript_path", "acoustic_csv_path"];

/// One subject. Paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub subject_id: String,
    pub transcript_path: PathBuf,
    pub audio_path: Option<PathBuf>,
    /// Takes precedence over the WAV header when present.
    pub duration_s: Option<f64>,
    pub acoustic_csv_path: PathBuf,
    pub label: Option<Label>,
    pub mmse: Option<f64>,
    pub group_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub rows: Vec<ManifestRow>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_labels(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.label.is_some())
    }

    pub fn has_mmse(&self) -> bool {
        self.rows.iter().any(|r| r.mmse.is_some())
    }

    /// True when some group holds more than one sample.
    pub fn has_repeated_groups(&self) -> bool {
        let distinct: HashSet<&str> = self.rows.iter().map(|r| r.group_id.as_str()).collect();
        distinct.len() < self.rows.len()
    }
}

fn is_null(cell: &str) -> bool {
    matches!(
        cell.trim().to_ascii_lowercase().as_str(),
        "" | "na" | "nan" | "null" | "none"
    )
}

fn parse_mmse(subject: &str, cell: &str) -> Result<Option<f64>, DataError> {
    if is_null(cell) {
        return Ok(None);
    }
    let invalid = || DataError::InvalidMmse {
        subject: subject.into(),
        value: cell.into(),
    };
    let v: f64 = cell.trim().parse().map_err(|_| invalid())?;
    if v.fract() != 0.0 || !(0.0..=MMSE_MAX).contains(&v) {
        return Err(invalid());
    }
    Ok(Some(v))
}

/// Loads and validates a manifest CSV. Every referenced file must exist.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest, DataError> {
    let bytes = fs::read(path).map_err(io_error(path))?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let csv_err = |e: csv::Error| DataError::Csv {
        path: path.into(),
        message: e.to_string(),
    };

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(&bytes[..]);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let col: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for name in REQUIRED {
        if !col.contains_key(name) {
            return Err(DataError::MissingColumn(name.into()));
        }
    }
    if !col.contains_key("audio_path") && !col.contains_key("duration_s") {
        return Err(DataError::MissingColumn("audio_path or duration_s".into()));
    }

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row_no = i + 2;
        let get = |name: &str| {
            col.get(name)
                .and_then(|&c| record.get(c))
                .filter(|s| !is_null(s))
        };
        let subject_id = get("subject_id").unwrap_or_default().to_string();
        let invalid = |detail: String| DataError::InvalidRow {
            row: row_no,
            subject: subject_id.clone(),
            detail,
        };
        if subject_id.is_empty() {
            return Err(invalid("empty subject_id".into()));
        }
        if !seen.insert(subject_id.clone()) {
            return Err(DataError::DuplicateSubject(subject_id));
        }

        let resolve = |p: &str| root.join(p);
        let transcript_path =
            resolve(get("transcript_path").ok_or_else(|| invalid("no transcript_path".into()))?);
        let acoustic_csv_path = resolve(
            get("acoustic_csv_path").ok_or_else(|| invalid("no acoustic_csv_path".into()))?,
        );
        let audio_path = get("audio_path").map(resolve);
        let duration_s = get("duration_s")
            .map(|d| match d.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
                _ => Err(invalid(format!(
                    "duration_s {d:?} is not a positive number"
                ))),
            })
            .transpose()?;
        if audio_path.is_none() && duration_s.is_none() {
            return Err(invalid("neither audio_path nor duration_s given".into()));
        }
        let label = get("label")
            .map(|l| l.parse::<Label>().map_err(invalid))
            .transpose()?;
        let mmse = match col.get("mmse").and_then(|&c| record.get(c)) {
            Some(cell) => parse_mmse(&subject_id, cell)?,
            None => None,
        };
        let group_id = get("group_id")
            .map(str::to_string)
            .unwrap_or_else(|| subject_id.clone());

        for p in [
            Some(&transcript_path),
            Some(&acoustic_csv_path),
            audio_path.as_ref().filter(|_| duration_s.is_none()),
        ]
        .into_iter()
        .flatten()
        {
            if !p.is_file() {
                return Err(DataError::FileNotFound(p.clone()));
            }
        }

        rows.push(ManifestRow {
            subject_id,
            transcript_path,
            audio_path,
            duration_s,
            acoustic_csv_path,
            label,
            mmse,
            group_id,
        });
    }
    Ok(DatasetManifest { root, rows })
}

fn relative(root: &Path, p: &Path) -> String {
    p.strip_prefix(root)
        .unwrap_or(p)
        .to_string_lossy()
        .into_owned()
}

/// Writes `manifest` to `path` with paths relative to `manifest.root`.
pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<(), DataError> {
    let csv_err = |e: csv::Error| DataError::Csv {
        path: path.into(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(MANIFEST_COLUMNS).map_err(csv_err)?;
    for r in &manifest.rows {
        w.write_record([
            r.subject_id.clone(),
            relative(&manifest.root, &r.transcript_path),
            r.audio_path
                .as_deref()
                .map(|p| relative(&manifest.root, p))
                .unwrap_or_default(),
            r.duration_s.map(|d| d.to_string()).unwrap_or_default(),
            relative(&manifest.root, &r.acoustic_csv_path),
            r.label.map(|l| l.code().to_string()).unwrap_or_default(),
            r.mmse.map(|m| m.to_string()).unwrap_or_default(),
            r.group_id.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_error(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(rows: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        for f in ["a.cha", "a.csv", "b.cha", "b.csv"] {
            fs::write(dir.path().join(f), "x").unwrap();
        }
        let path = dir.path().join("manifest.csv");
        fs::write(
            &path,
            format!("subject_id,transcript_path,duration_s,acoustic_csv_path,label,mmse\n{rows}"),
        )
        .unwrap();
        (dir, path)
    }

    #[test]
    fn two_valid_rows() {
        let (_d, p) = fixture("A,a.cha,60,a.csv,AD,18\nB,b.cha,45.5,b.csv,CN,\n");
        let m = load_manifest(&p).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.rows[0].mmse, Some(18.0));
        assert_eq!(m.rows[1].mmse, None);
        assert_eq!(m.rows[1].group_id, "B");
        assert!(m.rows[0].transcript_path.ends_with("a.cha"));
    }

    #[test]
    fn duplicate_subject() {
        let (_d, p) = fixture("A,a.cha,60,a.csv,AD,18\nA,b.cha,60,b.csv,CN,28\n");
        assert!(matches!(load_manifest(&p), Err(DataError::DuplicateSubject(s)) if s == "A"));
    }

    #[test]
    fn mmse_out_of_range() {
        let (_d, p) = fixture("A,a.cha,60,a.csv,AD,35\n");
        assert!(matches!(
            load_manifest(&p),
            Err(DataError::InvalidMmse { .. })
        ));
    }

    #[test]
    fn missing_file_is_named() {
        let (_d, p) = fixture("A,missing.cha,60,a.csv,AD,18\n");
        let err = load_manifest(&p).unwrap_err();
        assert!(err.to_string().contains("missing.cha"), "{err}");
    }

    #[test]
    fn missing_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "subject_id,duration_s\nA,3\n").unwrap();
        assert!(
            matches!(load_manifest(&p), Err(DataError::MissingColumn(c)) if c == "transcript_path")
        );
    }
}
