//! `key = value` config files, merged into the argument list ahead of the
//! command-line flags so that flags win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;

const SUBCOMMANDS: [&str; 5] = ["point", "curve", "converge", "time", "check"];

/// Parsed `(key, value)` pairs in file order.
pub fn parse_file(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("{}: line {}: expected key = value", path.display(), i + 1));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("{}: line {}: empty key", path.display(), i + 1));
        }
        pairs.push((key, value.trim().to_owned()));
    }
    Ok(pairs)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Returns `args` with the file's settings inserted directly after the
/// subcommand. A `seed` from the file is dropped when `PREINT_SEED` is set.
pub fn merge(args: Vec<OsString>, seed_env: bool) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let pairs = parse_file(Path::new(&path))?;
    let Some(pos) = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let cli = Cli::command();
    let sub = cli
        .find_subcommand(args[pos].to_string_lossy().as_ref())
        .expect("listed subcommand");
    let known = |cmd: &clap::Command, key: &str| {
        cmd.get_arguments().any(|a| a.get_long() == Some(key))
    };

    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            return Err("config files cannot include other config files".into());
        }
        if key == "seed" && seed_env {
            continue;
        }
        if known(sub, &key) {
            injected.push(OsString::from(format!("--{key}={value}")));
        } else if !cli.get_subcommands().any(|c| known(c, &key)) {
            return Err(format!("{}: unknown key '{key}'", Path::new(&path).display()));
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}
