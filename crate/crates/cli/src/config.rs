//! Flat `key=value` config files, merged into the argument list so that
//! explicit flags take precedence.

use std::ffi::OsString;
use std::path::Path;

use crate::error::CliError;

pub const SUBCOMMANDS: [&str; 8] = [
    "lyapunov", "bigf", "phase", "critical", "meanfield", "simulate", "exponent", "appendixb",
];

const GLOBAL_KEYS: [&str; 4] = ["out", "format", "seed", "threads"];

/// Parses `key = value` lines into long-flag arguments. Blank lines and
/// lines starting with `#` are ignored; `true`/`false` switch boolean flags.
pub fn parse(text: &str) -> Result<Vec<(String, Option<String>)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(CliError::Usage(format!("config line {}: invalid key {key:?}", lineno + 1)));
        }
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        match value.trim() {
            "true" => out.push((key, None)),
            "false" => {}
            v => out.push((key, Some(v.to_string()))),
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter().skip(1);
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Inserts config entries ahead of the explicit flags: global keys right
/// after the program name, the rest right after the subcommand.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let entries = parse(&text)?;
    let to_args = |(k, v): &(String, Option<String>)| {
        let mut a = vec![OsString::from(format!("--{k}"))];
        if let Some(v) = v {
            a.push(v.into());
        }
        a
    };
    let globals: Vec<OsString> = entries.iter().filter(|(k, _)| GLOBAL_KEYS.contains(&k.as_str())).flat_map(to_args).collect();
    let locals: Vec<OsString> = entries.iter().filter(|(k, _)| !GLOBAL_KEYS.contains(&k.as_str())).flat_map(to_args).collect();
    let sub = args.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let mut out = Vec::with_capacity(args.len() + globals.len() + locals.len());
    out.push(args[0].clone());
    out.extend(globals);
    match sub {
        Some(i) => {
            out.extend_from_slice(&args[1..=i]);
            out.extend(locals);
            out.extend_from_slice(&args[i + 1..]);
        }
        None => {
            out.extend(locals);
            out.extend_from_slice(&args[1..]);
        }
    }
    Ok(out)
}
