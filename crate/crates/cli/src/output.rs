use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::{config_err, runtime, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

pub fn render<T: Serialize>(rows: &[T], format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(runtime)?;
            }
            w.into_inner().map_err(runtime)
        }
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(rows).map_err(runtime)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// Writes `bytes` to `path` via a sibling temp file and rename, or to stdout.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> CliResult<()> {
    match path {
        None => std::io::stdout().write_all(bytes).map_err(runtime),
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .map_err(|e| config_err(format!("cannot write to {}: {e}", dir.display())))?;
            tmp.write_all(bytes).map_err(runtime)?;
            tmp.persist(path)
                .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
            Ok(())
        }
    }
}
