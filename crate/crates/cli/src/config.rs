//! Configuration files: a JSON object, or `key = value` lines.
//!
//! In the line format, values are read as JSON when they parse as JSON;
//! otherwise a comma-separated value becomes a list and anything else a
//! string. `#` starts a comment line.

use std::path::Path;

use serde_json::{Map, Value};
use zonalflow::experiments::{find, registry, Params};

use crate::error::{CliError, Result};

pub fn read_file(path: &Path) -> Result<Params> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|message| CliError::Config { path: path.into(), message })
}

pub fn parse(text: &str) -> std::result::Result<Params, String> {
    if text.trim_start().starts_with('{') {
        return match serde_json::from_str(text) {
            Ok(Value::Object(map)) => Ok(map),
            Ok(_) => Err("expected a JSON object".into()),
            Err(e) => Err(e.to_string()),
        };
    }
    let mut out = Map::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        if out.insert(key.to_string(), scalar_or_list(value.trim())).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", i + 1));
        }
    }
    Ok(out)
}

fn scalar_or_list(value: &str) -> Value {
    if value.is_empty() {
        return Value::Array(Vec::new());
    }
    if let Ok(v) = serde_json::from_str(value) {
        return v;
    }
    if value.contains(',') {
        return Value::Array(value.split(',').map(|item| scalar_or_list(item.trim())).collect());
    }
    Value::String(value.to_string())
}

/// One experiment of a suite with its overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteItem {
    pub id: String,
    pub overrides: Params,
}

/// Reads a suite description. `experiments` lists ids in run order (all
/// of the registry when absent). Overrides for an experiment go under its
/// id: a nested object in JSON, `id.key = value` lines otherwise.
pub fn suite_items(config: &Params) -> std::result::Result<Vec<SuiteItem>, String> {
    let mut nested: Map<String, Value> = Map::new();
    for (key, value) in config {
        if key == "experiments" {
            continue;
        }
        match (key.split_once('.'), value) {
            (Some((id, field)), _) => {
                let slot = nested.entry(id.to_string()).or_insert_with(|| Value::Object(Map::new()));
                match slot {
                    Value::Object(m) => {
                        m.insert(field.to_string(), value.clone());
                    }
                    _ => return Err(format!("`{id}` is given both as an object and with dotted keys")),
                }
            }
            (None, Value::Object(_)) => {
                if nested.insert(key.clone(), value.clone()).is_some() {
                    return Err(format!("`{key}` is given both as an object and with dotted keys"));
                }
            }
            (None, _) => return Err(format!("unexpected suite key `{key}`")),
        }
    }
    let ids: Vec<String> = match config.get("experiments") {
        None => registry().iter().map(|e| e.id.to_string()).collect(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| format!("experiment ids must be strings, got {v}")))
            .collect::<std::result::Result<_, _>>()?,
        Some(Value::String(one)) => vec![one.clone()],
        Some(other) => return Err(format!("`experiments` must be a list, got {other}")),
    };
    for id in nested.keys() {
        if !ids.contains(id) {
            return Err(format!("overrides given for `{id}`, which is not in the suite"));
        }
    }
    ids.into_iter()
        .map(|id| {
            find(&id).map_err(|e| e.to_string())?;
            let overrides = match nested.remove(&id) {
                Some(Value::Object(m)) => m,
                _ => Map::new(),
            };
            Ok(SuiteItem { id, overrides })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn line_format_values() {
        let p = parse("# sizes\nk_values = 16, 32,64\ntrials=4\nlaw = ones\nflag = true\nempty =\n").unwrap();
        assert_eq!(p["k_values"], json!([16, 32, 64]));
        assert_eq!(p["trials"], json!(4));
        assert_eq!(p["law"], json!("ones"));
        assert_eq!(p["flag"], json!(true));
        assert_eq!(p["empty"], json!([]));
    }

    #[test]
    fn json_format_and_errors() {
        assert_eq!(parse(r#"{"k_values": [8]}"#).unwrap()["k_values"], json!([8]));
        assert!(parse("[1, 2]").is_err());
        assert!(parse("k_values 16").is_err());
        assert!(parse("a = 1\na = 2").is_err());
    }

    #[test]
    fn suite_overrides_both_formats() {
        let dotted = parse("experiments = check_kadec_gap, exp_riesz_gram\ncheck_kadec_gap.k_max = 100").unwrap();
        let nested =
            parse(r#"{"experiments": ["check_kadec_gap", "exp_riesz_gram"], "check_kadec_gap": {"k_max": 100}}"#)
                .unwrap();
        let a = suite_items(&dotted).unwrap();
        assert_eq!(a, suite_items(&nested).unwrap());
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].overrides["k_max"], json!(100));
        assert!(a[1].overrides.is_empty());
    }

    #[test]
    fn suite_rejects_bad_input() {
        assert!(suite_items(&parse("experiments = nope").unwrap()).is_err());
        assert!(suite_items(&parse("experiments = check_kadec_gap\nexp_riesz_gram.k_values = [16]").unwrap()).is_err());
        assert!(suite_items(&parse("stray = 1").unwrap()).is_err());
        assert!(suite_items(&parse("experiments =").unwrap()).unwrap().is_empty());
        assert_eq!(suite_items(&Map::new()).unwrap().len(), registry().len());
    }
}
