//! `--config FILE` support: each `key=value` line becomes `--key value`
//! right after the subcommand, ahead of the user's own flags, so flags given
//! on the command line override the file.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Flags from a config file, in file order. Blank lines and `#` comments are
/// skipped; `_` in keys is read as `-`.
pub fn config_flags(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected `key=value`", path.display(), i + 1);
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') || key == "config" {
            bail!("{}:{}: invalid key `{key}`", path.display(), i + 1);
        }
        flags.push(format!("--{key}").into());
        flags.push(value.trim().into());
    }
    Ok(flags)
}

pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut config = None;
    let mut subcommand = None;
    let mut i = 1;
    while i < args.len() {
        let arg = args[i].to_string_lossy();
        if arg == "--config" {
            config = args.get(i + 1).map(|p| Path::new(p).to_path_buf());
            i += 2;
            continue;
        }
        if let Some(p) = arg.strip_prefix("--config=") {
            config = Some(Path::new(p).to_path_buf());
        } else if subcommand.is_none() && !arg.starts_with('-') {
            subcommand = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (config, subcommand) else {
        return Ok(args);
    };
    let flags = config_flags(&path)?;
    let mut out = args[..=sub].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}
