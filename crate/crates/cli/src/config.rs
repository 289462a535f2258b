//! `--config <file.toml>`: a flat table of subcommand options, spliced in
//! front of the command-line flags so explicit flags win.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Command};

fn line_of(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let k = l.split('=').next().unwrap_or("").trim().trim_matches('"');
            l.contains('=') && k == key
        })
        .map_or(0, |i| i + 1)
}

fn render(key: &str, v: &toml::Value, path: &Path, line: usize) -> Result<String> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(x) => format!("{x:e}"),
        toml::Value::Array(items) => items
            .iter()
            .map(|x| render(key, x, path, line))
            .collect::<Result<Vec<_>>>()?
            .join(","),
        _ => bail!("{}:{line}: key '{key}' must be a string, number or array", path.display()),
    })
}

/// Returns `args` with `--config <path>` replaced by the file's options.
pub fn expand(args: Vec<String>, root: &Command) -> Result<(Vec<String>, Option<String>)> {
    let pos = args.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else {
        return Ok((args, None));
    };
    let mut args = args;
    let path = if let Some(p) = args[pos].strip_prefix("--config=") {
        let p = p.to_string();
        args.remove(pos);
        p
    } else {
        if pos + 1 >= args.len() {
            bail!("--config needs a file path");
        }
        args.remove(pos);
        args.remove(pos)
    };
    let sub_name = args
        .get(1)
        .filter(|a| !a.starts_with('-'))
        .cloned()
        .context("--config needs a subcommand")?;
    let Some(sub) = root.find_subcommand(&sub_name) else {
        // let clap report the unknown subcommand
        return Ok((args, Some(path)));
    };
    let file = Path::new(&path);
    let text = std::fs::read_to_string(file).with_context(|| format!("reading config {}", file.display()))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", file.display()))?;
    let mut spliced = Vec::new();
    for (key, value) in &table {
        let line = line_of(&text, key);
        let long = key.replace('_', "-");
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(long.as_str()))
            .ok_or_else(|| anyhow::anyhow!("{}:{line}: unknown key '{key}' for '{sub_name}'", file.display()))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value {
                toml::Value::Boolean(true) => spliced.push(format!("--{long}")),
                toml::Value::Boolean(false) => {}
                _ => bail!("{}:{line}: key '{key}' must be true or false", file.display()),
            }
            continue;
        }
        spliced.push(format!("--{long}={}", render(key, value, file, line)?));
    }
    args.splice(2..2, spliced);
    Ok((args, Some(path)))
}
