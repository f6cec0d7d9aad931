//! Input and output documents exchanged between subcommands.

use std::path::Path;

use fockhtm::experiment::CountRecord;
use fockhtm::linalg::CMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// A density matrix on the `photons`-photon, `modes`-mode Fock space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub photons: usize,
    pub modes: usize,
    #[serde(with = "fockhtm::json::complex_matrix")]
    pub rho: CMatrix,
}

/// Simulated counts together with the state that produced them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountsFile {
    pub record: CountRecord,
    #[serde(default)]
    pub state: Option<StateFile>,
}

#[derive(Deserialize)]
struct Wrapped<T> {
    data: T,
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses `text` either as a bare document or as the `data` member of an
/// emitted artifact. Errors carry line and column.
pub fn parse_document<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("{origin}: parse error: {e}")))?;
    let wrapped = value.get("data").is_some() && value.get("manifest").is_some();
    let parsed = if wrapped {
        serde_json::from_str::<Wrapped<T>>(text).map(|w| w.data)
    } else {
        serde_json::from_str::<T>(text)
    };
    parsed.map_err(|e| CliError::Input(format!("{origin}: schema error: {e}")))
}

/// Reads a record either as a [`CountsFile`] or as a bare [`CountRecord`].
pub fn parse_counts(text: &str, origin: &str) -> Result<CountsFile, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("{origin}: parse error: {e}")))?;
    let inner = value.get("data").unwrap_or(&value);
    if inner.get("record").is_some() {
        parse_document::<CountsFile>(text, origin)
    } else {
        parse_document::<CountRecord>(text, origin).map(|record| CountsFile { record, state: None })
    }
}

/// Two-column `x,y` samples; a non-numeric first line is taken as a header.
pub fn parse_samples(text: &str, origin: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
        if record.len() < 2 {
            return Err(CliError::Input(format!("{origin}: line {line}: expected two columns")));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => out.push((x, y)),
            _ if i == 0 => continue,
            _ => return Err(CliError::Input(format!("{origin}: line {line}: non-numeric sample"))),
        }
    }
    Ok(out)
}
