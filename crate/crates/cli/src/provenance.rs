//! Header lines written at the top of every output file.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a file, or of a directory's regular files in name order.
pub fn path_digest(path: &Path) -> CliResult<String> {
    let mut h = Sha256::new();
    if path.is_dir() {
        let mut names: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| CliError::io(path, e))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .map(|e| e.file_name())
            .collect();
        names.sort();
        for n in names {
            let p = path.join(&n);
            h.update(n.to_string_lossy().as_bytes());
            h.update([0]);
            h.update(std::fs::read(&p).map_err(|e| CliError::io(&p, e))?);
        }
    } else {
        h.update(std::fs::read(path).map_err(|e| CliError::io(path, e))?);
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub lines: Vec<String>,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig) -> CliResult<Self> {
        let mut lines = vec![
            format!("tool: trs {} (trs-core {})", env!("CARGO_PKG_VERSION"), trs_core::VERSION),
            format!("command: {command}"),
            format!("config_sha256: {}", sha256_hex(cfg.canonical().as_bytes())),
            format!("seed: {}", cfg.scenario.seed),
        ];
        let p = &cfg.paths;
        for (name, path) in [
            ("road_nodes", &p.road_nodes),
            ("road_links", &p.road_links),
            ("gtfs_dir", &p.gtfs_dir),
            ("graph", &p.graph),
            ("requests", &p.requests),
        ] {
            if let Some(path) = path {
                lines.push(format!("input {name}: sha256 {}", path_digest(path)?));
            }
        }
        Ok(Provenance { lines })
    }

    pub fn with(&self, extra: impl IntoIterator<Item = String>) -> Vec<String> {
        self.lines.iter().cloned().chain(extra).collect()
    }
}
