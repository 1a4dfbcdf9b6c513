//! `key=value` configuration files.
//!
//! Each entry becomes `--key=value` inserted ahead of the command-line
//! flags, so flags given on the command line win.

use std::path::Path;

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn read(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse(&text).map_err(|(line, msg)| format!("{}:{line}: {msg}", path.display()))
}

pub fn parse(text: &str) -> Result<Vec<(String, String)>, (usize, String)> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| (idx + 1, format!("expected key=value, found `{line}`")))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err((idx + 1, format!("invalid key `{key}`")));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Splices the entries of the file named by `--config` into `args` right
/// after the subcommand and removes the `--config` flag itself.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            path = Some(iter.next().ok_or("--config needs a path")?);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let entries = read(Path::new(&path))?;
    // rest[0] is the program name and rest[1] the subcommand.
    let at = rest.len().min(2);
    let injected = entries.into_iter().map(|(k, v)| format!("--{k}={v}"));
    rest.splice(at..at, injected);
    Ok(rest)
}
