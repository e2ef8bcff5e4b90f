use std::path::{Path, PathBuf};

use creasim::society::GraphSpec;
use creasim::SocietyConfig;
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use crate::canonical;
use crate::error::CliError;

/// Deserialize JSON text, reporting the offending key path on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Schema { path: format!("{origin}: {path}"), msg: e.into_inner().to_string() }
    })
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(CliError::io(path))
}

/// Load and validate a society config. A relative graph file path is resolved
/// against the config file's directory.
pub fn load_config(path: &Path) -> Result<SocietyConfig, CliError> {
    let text = read_text(path)?;
    let mut cfg: SocietyConfig = parse_json(&text, &path.display().to_string())?;
    if let GraphSpec::File { path: graph_path } = &mut cfg.graph {
        if graph_path.is_relative() {
            let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
            *graph_path = base.join(&*graph_path);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// SHA-256 of the canonical encoding, hex encoded.
pub fn config_hash(cfg: &SocietyConfig) -> String {
    let text = canonical::to_string(cfg).expect("configs always serialize");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
