//! `key = value` config files and the effective-config echo.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Flags that exclude each other. A config value is dropped when the
/// command line already sets any flag of its group.
const EXCLUSIVE: &[&[&str]] = &[&["scripted", "endpoint", "symbolic-only"]];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// `_` in keys is read as `-`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, got `{line}`", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        out.push((key, v.to_string()));
    }
    Ok(out)
}

fn has_flag(args: &[String], name: &str) -> bool {
    let flag = format!("--{name}");
    args.iter()
        .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// Removes `--config <path>` from `args` and appends the file's settings as
/// flags, skipping any the command line already gives.
pub fn expand_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                bail!("--config needs a path");
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .with_context(|| format!("cannot read config file {path}"))?;
    let settings = parse_config(&text).with_context(|| format!("config file {path}"))?;
    let given = args.clone();
    for (key, value) in settings {
        let group = EXCLUSIVE
            .iter()
            .find(|g| g.contains(&key.as_str()))
            .copied()
            .unwrap_or(&[]);
        if has_flag(&given, &key) || group.iter().any(|k| has_flag(&given, k)) {
            continue;
        }
        match value.as_str() {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value);
            }
        }
    }
    Ok(args)
}

/// The settings a command runs with, printed in config-file syntax so the
/// block can be fed back through `--config`.
#[derive(Default)]
pub struct Echo(Vec<(String, String)>);

impl Echo {
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl Display>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn render(&self, command: &str) -> String {
        let mut s = format!("# effective config ({command})\n");
        for (k, v) in &self.0 {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}
