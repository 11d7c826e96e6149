//! Resolves command settings from defaults, an optional JSON file and flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

fn read_object(path: &Path, command: &str) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |message: String| CliError::Config {
        path: path.to_path_buf(),
        message,
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(bad("expected a JSON object".into()));
    };
    // a run manifest can be fed back in to repeat the run
    if let Some(echo) = obj.remove("config_echo") {
        match obj.get("command").and_then(Value::as_str) {
            Some(c) if c != command => {
                return Err(bad(format!("manifest is for `{c}`, not `{command}`")));
            }
            _ => {}
        }
        let Value::Object(echo) = echo else {
            return Err(bad("config_echo is not an object".into()));
        };
        return Ok(echo);
    }
    Ok(obj)
}

/// Flags that were given (non-null after serialization) override keys from
/// the file; missing keys take the settings type's defaults.
pub fn resolve<S, F>(file: Option<&Path>, command: &str, flags: &F) -> Result<S>
where
    S: DeserializeOwned,
    F: Serialize,
{
    let mut merged = match file {
        Some(path) => read_object(path, command)?,
        None => Map::new(),
    };
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))? else {
        return Err(CliError::Usage("flags did not serialize to an object".into()));
    };
    for (k, v) in given {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| match file {
        Some(path) => CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        None => CliError::Usage(e.to_string()),
    })
}
