//! JSON configuration files supplying flag values.
//!
//! A config file is a JSON object whose keys are long flag names without
//! the leading dashes, e.g. `{"model": "mgv", "max-graph": 8, "p": "max"}`.
//! `true` turns a switch on, `false` or `null` leaves it off, and arrays
//! repeat the flag. Config values are placed before the command-line
//! flags, so flags given on the command line win.

use std::path::Path;

use serde_json::Value;
use situ_core::{Error, Result};

use crate::args::SUBCOMMANDS;

/// Flags taking a value that may precede the subcommand name.
const GLOBAL_VALUE_FLAGS: [&str; 2] = ["--config", "--threads"];

/// Expand `--config FILE` (anywhere on the command line) into flags.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut i = 1;
    while i < argv.len() {
        if argv[i] == "--config" {
            config = argv.get(i + 1).cloned();
            i += 2;
        } else if let Some(p) = argv[i].strip_prefix("--config=") {
            config = Some(p.to_string());
            i += 1;
        } else {
            i += 1;
        }
    }
    let Some(path) = config else { return Ok(argv) };
    let flags = config_flags(Path::new(&path))?;
    let at = subcommand_position(&argv).map_or(argv.len(), |p| p + 1);
    let mut out = argv[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

fn subcommand_position(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].as_str();
        if GLOBAL_VALUE_FLAGS.contains(&a) {
            i += 2;
        } else if SUBCOMMANDS.contains(&a) {
            return Some(i);
        } else {
            i += 1;
        }
    }
    None
}

fn config_flags(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: Value = serde_json::from_str(&text)?;
    let Value::Object(map) = doc else {
        return Err(Error::Config("a config file must hold a JSON object".into()));
    };
    let mut flags = Vec::new();
    for (key, value) in map {
        if key == "config" {
            continue;
        }
        let flag = format!("--{key}");
        let values = match value {
            Value::Array(items) => items,
            v => vec![v],
        };
        for v in values {
            match v {
                Value::Bool(true) => flags.push(flag.clone()),
                Value::Bool(false) | Value::Null => {}
                Value::String(s) => flags.extend([flag.clone(), s]),
                Value::Number(n) => flags.extend([flag.clone(), n.to_string()]),
                other => {
                    return Err(Error::Config(format!(
                        "config value for {key:?} must be a scalar or an array of scalars, got {other}"
                    )))
                }
            }
        }
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_flags_go_after_the_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"model":"mgv","max-graph":8,"flag":true,"off":false}"#).unwrap();
        let argv: Vec<String> = ["situ", "--threads", "2", "detect-groups", "--config", cfg.to_str().unwrap(), "--s", "3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = merge_config(argv).unwrap();
        assert_eq!(out[3], "detect-groups");
        assert_eq!(&out[4..9], ["--flag", "--max-graph", "8", "--model", "mgv"]);
        assert_eq!(out.last().unwrap(), "3");
    }
}
