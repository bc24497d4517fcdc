//! Flat `key = value` configuration. Keys are long flag names (`_` and `-`
//! are interchangeable); flags given on the command line take precedence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{ArgAction, Command};

/// Keys that only make sense on the command line.
const RESERVED: [&str; 2] = ["config", "workdir"];

pub fn parse_config(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        let value = v.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(value);
        if out.insert(key.clone(), value.to_string()).is_some() {
            bail!("line {}: duplicate key {key:?}", i + 1);
        }
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("config {}", path.display()))
}

/// Subcommand names and config path as far as they can be read from argv,
/// ignoring anything else that is wrong with it.
pub struct Prescan {
    pub path: Vec<String>,
    pub workdir: PathBuf,
    pub config: Option<PathBuf>,
}

pub fn prescan(cmd: &Command, argv: &[OsString]) -> Prescan {
    let m = cmd.clone().ignore_errors(true).get_matches_from(argv.iter().cloned());
    let workdir = m
        .get_one::<PathBuf>("workdir")
        .cloned()
        .unwrap_or_else(|| PathBuf::from("."));
    let mut config = m.get_one::<PathBuf>("config").cloned();
    let mut path = Vec::new();
    let mut cur = &m;
    while let Some((name, sub)) = cur.subcommand() {
        path.push(name.to_string());
        if let Ok(Some(c)) = sub.try_get_one::<PathBuf>("config") {
            config = Some(c.clone());
        }
        cur = sub;
    }
    Prescan { path, workdir, config }
}

fn leaf<'a>(cmd: &'a Command, path: &[String]) -> Option<&'a Command> {
    path.iter().try_fold(cmd, |c, name| c.find_subcommand(name))
}

fn all_long_flags(cmd: &Command, out: &mut std::collections::BTreeSet<String>) {
    for a in cmd.get_arguments() {
        if let Some(l) = a.get_long() {
            out.insert(l.to_string());
        }
    }
    for s in cmd.get_subcommands() {
        all_long_flags(s, out);
    }
}

fn given(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_eq = format!("--{long}=");
    argv.iter()
        .filter_map(|a| a.to_str())
        .any(|a| a == flag || a.starts_with(&with_eq))
}

/// Appends config entries as flags of the selected subcommand unless the
/// flag is already on the command line. Keys no subcommand knows are errors;
/// keys meant for other subcommands are skipped.
pub fn inject(
    cmd: &Command,
    path: &[String],
    argv: &[OsString],
    config: &BTreeMap<String, String>,
) -> anyhow::Result<Vec<OsString>> {
    let mut built = cmd.clone();
    built.build();
    let mut known = Default::default();
    all_long_flags(&built, &mut known);
    let Some(leaf) = leaf(&built, path) else {
        return Ok(argv.to_vec());
    };

    let mut out = argv.to_vec();
    for (key, value) in config {
        if RESERVED.contains(&key.as_str()) {
            bail!("config key {key:?} can only be given on the command line");
        }
        if !known.contains(key) {
            bail!("unknown config key {key:?}");
        }
        let Some(arg) = leaf.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            log::debug!(target: "config", "key {key:?} does not apply to this command");
            continue;
        };
        if given(argv, key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "yes" | "1" => out.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                other => bail!("config key {key:?}: expected true or false, got {other:?}"),
            },
            _ => out.push(format!("--{key}={value}").into()),
        }
    }
    Ok(out)
}
