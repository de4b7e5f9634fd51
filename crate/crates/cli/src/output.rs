use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use tempfile::NamedTempFile;

use crate::config::Format;
use crate::error::CliError;
use crate::record::ExperimentRecord;

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let mut tmp = NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(e.error.to_string()))?;
    Ok(())
}

/// `out.csv` → `out.csv.<suffix>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

pub fn render(record: &ExperimentRecord, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => record.to_csv(),
        Format::Json => serde_json::to_string_pretty(&record.to_json())
            .map(|s| s + "\n")
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Data to `out` (or stdout), metadata and traces next to it.
pub fn write_record(
    record: &ExperimentRecord,
    out: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let data = render(record, format)?;
    let Some(path) = out else {
        print!("{data}");
        return Ok(());
    };
    if let Some(traces) = &record.traces {
        let text = serde_json::to_string_pretty(traces).map_err(|e| CliError::Io(e.to_string()))?;
        write_atomic(&sidecar(path, "traces.json"), text.as_bytes())?;
    }
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::to_string_pretty(&record.metadata(now))
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&sidecar(path, "meta.json"), meta.as_bytes())?;
    write_atomic(path, data.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.csv");
        write_atomic(&p, b"first\n").unwrap();
        write_atomic(&p, b"second\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "second\n");
        let names: Vec<_> = fs::read_dir(p.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
        assert_eq!(
            sidecar(&p, "meta.json").file_name().unwrap(),
            "a.csv.meta.json"
        );
    }
}
