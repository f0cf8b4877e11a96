//! Artifact files and the hashed manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Environment variable overriding the output root.
pub const OUT_ENV: &str = "BILLIARD_LAB_OUT";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: impl Into<String>, text: String) -> Self {
        Artifact { name: name.into(), bytes: text.into_bytes() }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serialises");
        text.push('\n');
        Artifact::text(name, text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub schema_version: u32,
    pub artifacts: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(scenario: &str, artifacts: &[Artifact]) -> Self {
        let mut entries: Vec<ManifestEntry> = artifacts
            .iter()
            .map(|a| ManifestEntry { path: a.name.clone(), bytes: a.bytes.len(), sha256: sha256_hex(&a.bytes) })
            .collect();
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        Manifest { scenario: scenario.to_string(), schema_version: crate::config::SCHEMA_VERSION, artifacts: entries }
    }

    /// Digest of the manifest itself, as written to disk.
    pub fn digest(&self) -> String {
        sha256_hex(&Artifact::json("manifest.json", self).bytes)
    }
}

/// Where a scenario writes: `$BILLIARD_LAB_OUT/<name>`, else the configured directory, else
/// `out/<name>`.
pub fn output_dir(name: &str, configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(name),
        _ => configured.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out").join(name)),
    }
}

/// Write the artifacts and `manifest.json` into `dir`.
pub fn write_all(dir: &Path, scenario: &str, artifacts: &[Artifact]) -> Result<Manifest, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.bytes).map_err(|e| CliError::io(&path, e))?;
    }
    let manifest = Manifest::new(scenario, artifacts);
    let path = dir.join("manifest.json");
    fs::write(&path, Artifact::json("manifest.json", &manifest).bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

/// RFC 4180 CSV from a header and rows of already formatted fields.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    let line = |out: &mut String, fields: &[String]| {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            if f.contains([',', '"', '\n', '\r']) {
                let _ = write!(out, "\"{}\"", f.replace('"', "\"\""));
            } else {
                out.push_str(f);
            }
        }
        out.push_str("\r\n");
    };
    line(&mut out, &header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for row in rows {
        line(&mut out, &row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_special_fields() {
        let text = csv(&["a", "b"], [vec!["1".into(), "x,\"y\"".into()]]);
        assert_eq!(text, "a,b\r\n1,\"x,\"\"y\"\"\"\r\n");
    }

    #[test]
    fn manifest_is_sorted_and_hashed() {
        let arts = vec![Artifact::text("b.csv", "2".into()), Artifact::text("a.csv", "1".into())];
        let m = Manifest::new("demo", &arts);
        assert_eq!(m.artifacts[0].path, "a.csv");
        assert_eq!(m.artifacts[0].sha256, sha256_hex(b"1"));
        assert_eq!(m.digest(), Manifest::new("demo", &arts).digest());
    }
}
