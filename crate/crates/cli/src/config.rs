//! `--config FILE` support: values from a JSON file are spliced into the
//! argument list as ordinary flags, after the subcommand, unless the same
//! flag was given on the command line.

use std::fs;

use serde_json::{Map, Value};

/// Keys never taken from a config file.
const IGNORED: [&str; 2] = ["config", "out"];

fn flag_name(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

fn present(args: &[String], flag: &str) -> bool {
    let with_eq = format!("{flag}=");
    args.iter().any(|a| a == flag || a.starts_with(&with_eq))
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Flat map of flag values; a run manifest is accepted too, in which case
/// its `parameters` object is used.
fn parameters(doc: Value) -> Result<Map<String, Value>, String> {
    let Value::Object(mut map) = doc else {
        return Err("config file must hold a JSON object".into());
    };
    if let Some(Value::Object(params)) = map.remove("parameters") {
        return Ok(params);
    }
    Ok(map)
}

fn render(value: &Value) -> Option<Result<String, String>> {
    match value {
        Value::Null => None,
        Value::Bool(_) => None,
        Value::Number(n) => Some(Ok(n.to_string())),
        Value::String(s) => Some(Ok(s.clone())),
        Value::Array(items) => Some(
            items
                .iter()
                .map(|v| match v {
                    Value::Number(n) => Ok(n.to_string()),
                    Value::String(s) => Ok(s.clone()),
                    other => Err(format!("unsupported list element {other}")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(|v| v.join(",")),
        ),
        Value::Object(_) => Some(Err("nested objects are not supported".into())),
    }
}

/// Returns `args` with config-file values inserted after the subcommand.
pub fn merge(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| format!("cannot parse config {path}: {e}"))?;
    let params = parameters(doc)?;

    let mut extra = Vec::new();
    for (key, value) in &params {
        if IGNORED.contains(&key.as_str()) {
            continue;
        }
        let flag = flag_name(key);
        if present(&args, &flag) {
            continue;
        }
        if let Value::Bool(b) = value {
            if *b {
                extra.push(flag);
            }
            continue;
        }
        if let Some(rendered) = render(value) {
            extra.push(flag);
            extra.push(rendered.map_err(|e| format!("config key `{key}`: {e}"))?);
        }
    }
    // args[0] is the binary, args[1] the subcommand
    let split = args.len().min(2);
    let mut merged = args[..split].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[split..]);
    Ok(merged)
}
