//! JSON run configurations, translated into the equivalent argument list so
//! that files and flags share one parser and one set of checks.

use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    command: String,
    #[serde(default)]
    parameters: Map<String, Value>,
    output_dir: Option<String>,
    seed: Option<u64>,
}

pub fn load(path: &Path) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation(vec![format!("cannot read {}: {e}", path.display())]))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::validation(vec![format!("invalid run configuration {}: {e}", path.display())]))?;
    to_args(cfg)
}

fn to_args(cfg: RunConfig) -> Result<Vec<String>, Failure> {
    let mut argv = vec!["plaplace".to_string()];
    if let Some(dir) = cfg.output_dir {
        argv.extend(["--output-dir".into(), dir]);
    }
    if let Some(seed) = cfg.seed {
        argv.extend(["--seed".into(), seed.to_string()]);
    }
    argv.push(cfg.command);
    let mut errors = Vec::new();
    for (key, value) in cfg.parameters {
        let flag = format!("--{key}");
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => argv.push(flag),
            Value::Number(n) => argv.extend([flag, n.to_string()]),
            Value::String(s) => argv.extend([flag, s]),
            Value::Array(items) => {
                let mut parts = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::Number(n) => parts.push(n.to_string()),
                        Value::String(s) => parts.push(s),
                        other => errors.push(format!("parameter {key}: unsupported list item {other}")),
                    }
                }
                argv.extend([flag, parts.join(",")]);
            }
            Value::Object(_) => errors.push(format!("parameter {key}: nested objects are not supported")),
        }
    }
    if errors.is_empty() {
        Ok(argv)
    } else {
        Err(Failure::validation(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_become_flags() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"command": "curve", "parameters": {"N": 4, "p": 2.5, "radii": [0.5, 0.1], "quick": true, "off": false},
                "output_dir": "out", "seed": 9}"#,
        )
        .unwrap();
        let argv = to_args(cfg).unwrap();
        assert_eq!(
            argv,
            ["plaplace", "--output-dir", "out", "--seed", "9", "curve", "--N", "4", "--p", "2.5", "--quick", "--radii", "0.5,0.1"]
        );
    }

    #[test]
    fn rejects_nested_values() {
        let cfg: RunConfig = serde_json::from_str(r#"{"command": "orbit", "parameters": {"group": {"dim": 2}}}"#).unwrap();
        assert!(to_args(cfg).is_err());
    }
}
