//! Merging a JSON config file over the values given as flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{validation, CliError, CliResult};

fn merge(base: &mut Value, overlay: Value, path: &str) -> CliResult<()> {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let here = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &here)?,
                    None => return validation(format!("unknown config key '{here}'")),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

/// Returns `flags` with every key present in the config file replaced.
pub fn resolve<T: Serialize + DeserializeOwned>(flags: T, config: Option<&Path>) -> CliResult<T> {
    let Some(path) = config else { return Ok(flags) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let overlay: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !overlay.is_object() {
        return validation("config file must hold a JSON object");
    }
    let mut base = serde_json::to_value(flags).map_err(|e| CliError::Runtime(e.to_string()))?;
    merge(&mut base, overlay, "")?;
    serde_json::from_value(base).map_err(|e| CliError::Validation(format!("invalid config: {e}")))
}

/// Parses `5`, `0..3` (inclusive) or `0,2,7`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let lo: u64 = a.trim().parse().map_err(|_| format!("bad seed range '{s}'"))?;
        let hi: u64 = b.trim_start_matches('=').trim().parse().map_err(|_| format!("bad seed range '{s}'"))?;
        if hi < lo {
            return Err(format!("empty seed range '{s}'"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| format!("bad seed '{p}'"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, serde::Deserialize)]
    struct Demo {
        a: u32,
        inner: Inner,
    }

    #[derive(Debug, PartialEq, Serialize, serde::Deserialize)]
    struct Inner {
        b: f64,
        c: String,
    }

    #[test]
    fn config_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"inner": {"b": 2.5}}"#).unwrap();
        let flags = Demo { a: 1, inner: Inner { b: 0.0, c: "x".into() } };
        let out = resolve(flags, Some(&p)).unwrap();
        assert_eq!(out, Demo { a: 1, inner: Inner { b: 2.5, c: "x".into() } });

        std::fs::write(&p, r#"{"typo": 1}"#).unwrap();
        let flags = Demo { a: 1, inner: Inner { b: 0.0, c: "x".into() } };
        assert!(matches!(resolve(flags, Some(&p)), Err(CliError::Validation(_))));
    }

    #[test]
    fn seed_forms() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seeds("4").unwrap(), vec![4]);
        assert_eq!(parse_seeds("1,5").unwrap(), vec![1, 5]);
        assert!(parse_seeds("3..1").is_err());
    }
}
