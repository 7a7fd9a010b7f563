//! Flat `key = value` configuration files. Keys are long flag names; a value
//! only fills in a flag that is absent from the command line.

use std::collections::BTreeMap;
use std::fs;

use anyhow::{Context, Result};

use crate::args::UsageError;

#[derive(Clone, Debug, Default)]
pub struct Argv {
    /// Arguments as typed.
    pub raw: Vec<String>,
    /// Arguments actually parsed: `--config` removed, config values appended.
    pub effective: Vec<String>,
    pub config_path: Option<String>,
    pub config: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(UsageError(format!("config line {}: invalid key `{}`", i + 1, k.trim())).into());
        }
        out.insert(key, v.trim().to_owned());
    }
    Ok(out)
}

fn flag_present(args: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    let prefixed = format!("--{key}=");
    args.iter().any(|a| *a == long || a.starts_with(&prefixed))
}

/// Removes `--config PATH` / `--config=PATH` and appends config entries.
pub fn merge_config(raw: &[String]) -> Result<Argv> {
    let mut effective = Vec::with_capacity(raw.len());
    let mut config_path = None;
    let mut it = raw.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it
                .next()
                .ok_or_else(|| UsageError("--config needs a path".into()))?;
            config_path = Some(p.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(p.to_owned());
        } else {
            effective.push(a.clone());
        }
    }
    let mut config = BTreeMap::new();
    if let Some(path) = &config_path {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {path}"))
            .map_err(|e| UsageError(format!("{e:#}")))?;
        config = parse_config(&text)?;
        let explicit = effective.clone();
        for (k, v) in &config {
            if flag_present(&explicit, k) {
                continue;
            }
            match v.as_str() {
                "true" => effective.push(format!("--{k}")),
                "false" => {}
                _ => effective.push(format!("--{k}={v}")),
            }
        }
    }
    Ok(Argv {
        raw: raw.to_vec(),
        effective,
        config_path,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_flat_pairs() {
        let c = parse_config("# grid\nalpha = 0.4\nsteps_count=10\n\n").unwrap();
        assert_eq!(c["alpha"], "0.4");
        assert_eq!(c["steps-count"], "10");
        assert!(parse_config("alpha 0.4").is_err());
    }

    #[test]
    fn flags_take_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "alpha = 0.4\ngamma = 2\ndump-fmx = true\nverbose = false\n").unwrap();
        let raw = s(&["firmnet", "cascade", "--alpha", "0.8", "--config", path.to_str().unwrap()]);
        let a = merge_config(&raw).unwrap();
        assert_eq!(
            a.effective,
            s(&["firmnet", "cascade", "--alpha", "0.8", "--dump-fmx", "--gamma=2"])
        );
        assert_eq!(a.config.len(), 4);
    }

    #[test]
    fn missing_config_is_a_usage_error() {
        let raw = s(&["firmnet", "--config=/nonexistent/x.cfg", "report"]);
        let e = merge_config(&raw).unwrap_err();
        assert!(e.downcast_ref::<UsageError>().is_some());
    }
}
