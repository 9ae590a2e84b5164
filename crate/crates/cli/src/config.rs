//! Config files. Every command reads an optional TOML or JSON file into its
//! config struct; flags then override individual fields.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OLU_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "olu-out";

/// Parses a config file by extension (`.toml`, anything else as JSON).
///
/// A run manifest is accepted as well; its `config` object is used, so a
/// finished run can be replayed with `--config <out>/manifest.json`.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let value: Value = if is_toml {
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
    };
    config_from_value(value).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn config_from_value<T: DeserializeOwned>(value: Value) -> Result<T, serde_json::Error> {
    let inner = match value {
        Value::Object(mut map) if map.contains_key("command") && map.contains_key("config") => {
            map.remove("config").unwrap_or(Value::Null)
        }
        other => other,
    };
    serde_json::from_value(inner)
}

pub fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    path.map_or_else(|| Ok(T::default()), load_config)
}

/// Flag, then config file, then `$OLU_OUT_DIR`, then [`DEFAULT_OUT_DIR`].
pub fn resolve_out_dir(flag: Option<PathBuf>, from_file: Option<PathBuf>) -> PathBuf {
    flag.or(from_file)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, Deserialize, PartialEq)]
    #[serde(default, deny_unknown_fields)]
    struct Demo {
        trials: usize,
        beta: f64,
    }

    #[test]
    fn manifest_config_is_unwrapped() {
        let v: Value = serde_json::json!({"command": "x", "config": {"trials": 3, "beta": 0.5}, "artifacts": []});
        assert_eq!(config_from_value::<Demo>(v).unwrap(), Demo { trials: 3, beta: 0.5 });
        let v: Value = serde_json::json!({"trials": 4});
        assert_eq!(config_from_value::<Demo>(v).unwrap().trials, 4);
        assert!(config_from_value::<Demo>(serde_json::json!({"bogus": 1})).is_err());
    }

    #[test]
    fn flags_win() {
        let mut x = 1;
        set(&mut x, None);
        assert_eq!(x, 1);
        set(&mut x, Some(5));
        assert_eq!(x, 5);
        assert_eq!(resolve_out_dir(Some("a".into()), Some("b".into())), PathBuf::from("a"));
        assert_eq!(resolve_out_dir(None, Some("b".into())), PathBuf::from("b"));
    }
}
