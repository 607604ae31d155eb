//! Artifact writing: CSV with a single `#` metadata header line, or JSON
//! with the same metadata embedded. All floats carry 12+ significant digits.

use std::path::{Path, PathBuf};

use crate::config::{CliError, OutputFormat};

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn meta_line(config_hash: u64, seed: u64) -> String {
    format!("config_hash={config_hash:016x} seed={seed}")
}

pub fn format_value(v: f64) -> String {
    format!("{v:.12e}")
}

/// Writes a table either as CSV (`# meta` + header + rows) or as a JSON
/// object `{meta, columns, rows}`. Returns the file path written.
pub fn write_table(
    out_dir: &Path,
    name: &str,
    format: OutputFormat,
    meta: &str,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let path = match format {
        OutputFormat::Csv => {
            let mut text = String::new();
            text.push_str(&format!("# {meta}\n"));
            text.push_str(&columns.join(","));
            text.push('\n');
            for row in rows {
                text.push_str(&row.join(","));
                text.push('\n');
            }
            let path = out_dir.join(format!("{name}.csv"));
            std::fs::write(&path, text)?;
            path
        }
        OutputFormat::Json => {
            let obj = serde_json::json!({
                "meta": meta,
                "columns": columns,
                "rows": rows,
            });
            let path = out_dir.join(format!("{name}.json"));
            std::fs::write(&path, serde_json::to_string_pretty(&obj).unwrap())?;
            path
        }
    };
    Ok(path)
}

pub fn write_json(
    out_dir: &Path,
    name: &str,
    value: &serde_json::Value,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap())?;
    Ok(path)
}
