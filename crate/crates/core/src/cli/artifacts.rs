//! Deterministic artifact files: names keyed by a config hash, fixed float formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::config::{Format, RunConfig};
use crate::error::{Error, Result};

/// Hex digits of the config hash used in file names.
pub const HASH_LEN: usize = 12;

/// Hash of the effective config. The output section is excluded so that
/// writing the same run elsewhere keeps its file names.
pub fn config_hash(config: &RunConfig) -> String {
    let mut keyed = config.clone();
    keyed.output = Default::default();
    let canonical = serde_json::to_string(&keyed).expect("config serialises");
    let digest = Sha256::digest(canonical.as_bytes());
    hex::encode(digest)[..HASH_LEN].to_string()
}

/// Round-trip exact float text.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub struct Artifact {
    pub name: String,
    pub format: Format,
    pub contents: String,
}

impl Artifact {
    pub fn csv(stem: &str, hash: &str, csv: Csv) -> Self {
        Self {
            name: format!("{stem}_{hash}.csv"),
            format: Format::Csv,
            contents: csv.into_string(),
        }
    }

    pub fn json(stem: &str, hash: &str, value: &serde_json::Value) -> Self {
        let mut contents = serde_json::to_string_pretty(value).expect("json value serialises");
        contents.push('\n');
        Self {
            name: format!("{stem}_{hash}.json"),
            format: Format::Json,
            contents,
        }
    }
}

/// Writes the artifacts whose format is enabled and returns their paths.
pub fn write_all(dir: &Path, formats: &[Format], artifacts: Vec<Artifact>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for a in artifacts.into_iter().filter(|a| formats.contains(&a.format)) {
        let path = dir.join(&a.name);
        std::fs::write(&path, a.contents).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 6.02e23, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn hash_ignores_output_section() {
        let doc = "[lattice]\nn = 12\nkappa = [1.0]\n[wave]\nm = 1\nomega = 4.0\n";
        let a: RunConfig = toml::from_str(doc).unwrap();
        let mut b = a.clone();
        b.output.directory = Some("elsewhere".into());
        assert_eq!(config_hash(&a), config_hash(&b));
        b.wave.omega = 4.5;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), HASH_LEN);
    }

    #[test]
    fn only_enabled_formats_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut csv = Csv::new(&["x"]);
        csv.row(&[fmt_f64(1.0)]);
        let arts = vec![
            Artifact::csv("a", "h", csv),
            Artifact::json("a", "h", &serde_json::json!({"x": 1})),
        ];
        let written = write_all(dir.path(), &[Format::Json], arts).unwrap();
        assert_eq!(written, vec![dir.path().join("a_h.json")]);
    }
}
