//! Reading and writing the JSON artifacts.

use std::fs;
use std::path::Path;

use causal_bounds::reduce::Observations;
use causal_bounds::tables::CptSet;
use causal_bounds::{CausalDiagram, JointTable};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_text(path, &text)
}

pub fn load_model(path: &Path) -> Result<CausalDiagram, CliError> {
    read_json(path)
}

/// Either a CPT set (`{"cpts": [...]}`) or a full joint table.
pub fn load_observations(path: &Path) -> Result<Observations<f64>, CliError> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
    if value.get("cpts").is_some() {
        let set: CptSet<f64> = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
        Ok(Observations::Cpts(set.cpts))
    } else {
        let joint: JointTable = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
        Ok(Observations::Joint(joint))
    }
}

/// Input of `bounds`: P(X, Y, W) with X and Y leading the scope, and
/// optionally the prior over the unobserved part of the adjustment set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsData {
    pub observed: JointTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<JointTable>,
    /// Names of the unobserved adjustment variables; defaults to the prior's scope.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unobserved: Vec<String>,
}
