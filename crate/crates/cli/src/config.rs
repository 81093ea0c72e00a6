//! `key = value` configuration files.
//!
//! Each line mirrors a command-line flag (`omega = 1.0` stands for
//! `--omega 1.0`; underscores may replace dashes). The flags are spliced in
//! right after the subcommand, ahead of the explicit ones, so that explicit
//! flags win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

/// Flags that take no value; `key = true` enables them, `key = false` is ignored.
const SWITCHES: &[&str] = &["seedless"];

pub fn parse(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`, got `{raw}`", no + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{key}`", no + 1));
        }
        if SWITCHES.contains(&key.as_str()) {
            match value {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(format!("config line {}: `{key}` takes true or false", no + 1)),
            }
            continue;
        }
        out.push(format!("--{key}={value}").into());
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<OsString>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse(&text)
}

/// Removes `--config PATH` / `--config=PATH` from `argv` and splices the file's
/// flags in after the subcommand (the first argument after the program name).
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path: Option<OsString> = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            path = Some(it.next().ok_or("--config requires a path")?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let injected = load(Path::new(&path))?;
    let at = rest.len().min(2);
    rest.splice(at..at, injected);
    Ok(rest)
}
