//! `--config <file>` support: a JSON object whose keys are long flag names of
//! the chosen subcommand. Its entries are spliced into the argument list
//! unless the same flag is already given on the command line.

use std::path::Path;

use serde_json::Value;

/// Global options that consume a value; they may precede the subcommand.
const GLOBAL_WITH_VALUE: [&str; 2] = ["--config", "--jobs"];

/// Index of the subcommand token in `argv` (which includes the program name).
fn subcommand_index(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if GLOBAL_WITH_VALUE.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if !a.starts_with('-') {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
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

fn flag_present(argv: &[String], flag: &str) -> bool {
    argv.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")))
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(format!("unsupported config value {other}")),
    }
}

/// Tokens for one config entry. Booleans become bare switches, arrays of
/// scalars a comma list, arrays of arrays one flag per inner list.
fn tokens(key: &str, v: &Value) -> Result<Vec<String>, String> {
    let flag = format!("--{key}");
    match v {
        Value::Bool(true) => Ok(vec![flag]),
        Value::Bool(false) | Value::Null => Ok(Vec::new()),
        Value::Array(items) if items.iter().all(Value::is_array) => {
            let mut out = Vec::new();
            for inner in items {
                let parts: Result<Vec<String>, String> = inner.as_array().unwrap().iter().map(scalar).collect();
                out.push(flag.clone());
                out.push(parts?.join(","));
            }
            Ok(out)
        }
        Value::Array(items) => {
            let parts: Result<Vec<String>, String> = items.iter().map(scalar).collect();
            Ok(vec![flag, parts?.join(",")])
        }
        other => Ok(vec![flag, scalar(other)?]),
    }
}

/// Returns `argv` with the config file's entries inserted right after the
/// subcommand.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let obj: serde_json::Map<String, Value> =
        serde_json::from_str(&text).map_err(|e| format!("config {path} is not a JSON object: {e}"))?;
    let Some(sub) = subcommand_index(&argv) else {
        return Ok(argv);
    };
    let mut extra = Vec::new();
    for (key, v) in &obj {
        if flag_present(&argv, &format!("--{key}")) {
            continue;
        }
        extra.extend(tokens(key, v).map_err(|e| format!("config key '{key}': {e}"))?);
    }
    let mut out = argv[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn finds_subcommand_after_globals() {
        assert_eq!(subcommand_index(&argv("tspqa --jobs 4 --config c.json gen --n 5")), Some(5));
        assert_eq!(subcommand_index(&argv("tspqa gen")), Some(1));
        assert_eq!(subcommand_index(&argv("tspqa --version")), None);
    }

    #[test]
    fn flags_win_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"n": 7, "seed": 3, "mcs": [100, 1000], "full": true, "subset": [[0,1],[2,3]]}"#).unwrap();
        let args = argv(&format!("tspqa --config {} gen --n 9", path.display()));
        let out = expand(args).unwrap();
        let joined = out.join(" ");
        assert!(joined.contains("--n 9"));
        assert!(!joined.contains("--n 7"));
        assert!(joined.contains("--seed 3"));
        assert!(joined.contains("--mcs 100,1000"));
        assert!(joined.contains("--full"));
        assert!(joined.contains("--subset 0,1 --subset 2,3"));
    }
}
