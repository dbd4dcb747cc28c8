//! `key = value` config files merged underneath command-line flags.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgMatches, Command};

#[derive(Debug)]
pub struct ConfigError(pub String);

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value, got '{raw}'", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError(format!("line {}: empty key", k + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn is_flag(cmd: &Command, id: &str) -> bool {
    cmd.get_arguments()
        .find(|a| a.get_id() == id)
        .is_some_and(|a| matches!(a.get_action(), clap::ArgAction::SetTrue))
}

/// Extend `argv` with config values for flags the user did not pass.
///
/// Keys must name a long flag of the root command or of `sub`; anything else
/// is rejected with the list of valid keys.
pub fn merge(
    path: &Path,
    root: &Command,
    sub: &str,
    matches: &ArgMatches,
    argv: &[OsString],
) -> Result<Vec<OsString>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let pairs = parse_pairs(&text)?;
    let sub_cmd = root
        .find_subcommand(sub)
        .ok_or_else(|| ConfigError(format!("unknown subcommand {sub}")))?;
    let sub_matches = matches.subcommand_matches(sub).expect("subcommand was parsed");

    let long_names = |c: &Command| -> Vec<String> {
        c.get_arguments()
            .filter_map(|a| a.get_long().map(str::to_owned))
            .filter(|l| l != "help" && l != "version" && l != "config")
            .collect()
    };
    let root_keys = long_names(root);
    let sub_keys = long_names(sub_cmd);

    let mut global = Vec::new();
    let mut local = Vec::new();
    for (key, value) in pairs {
        let (cmd, m, bucket) = if sub_keys.contains(&key) {
            (sub_cmd, sub_matches, &mut local)
        } else if root_keys.contains(&key) {
            (root, matches, &mut global)
        } else {
            let mut valid: Vec<_> = root_keys.iter().chain(&sub_keys).cloned().collect();
            valid.sort();
            return Err(ConfigError(format!(
                "unknown config key '{key}' for '{sub}'; valid keys: {}",
                valid.join(", ")
            )));
        };
        let id = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .map(|a| a.get_id().to_string())
            .expect("key matched a long flag");
        if m.value_source(&id) == Some(clap::parser::ValueSource::CommandLine) {
            continue;
        }
        if is_flag(cmd, &id) {
            match value.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => bucket.push(OsString::from(format!("--{key}"))),
                "false" | "0" | "no" => {}
                _ => return Err(ConfigError(format!("key '{key}' expects true or false, got '{value}'"))),
            }
        } else {
            bucket.push(OsString::from(format!("--{key}={value}")));
        }
    }

    // Globals go before the subcommand name, locals after everything else.
    let pos = argv
        .iter()
        .position(|a| a == sub)
        .ok_or_else(|| ConfigError("subcommand not found in arguments".into()))?;
    let mut out: Vec<OsString> = argv[..pos].to_vec();
    out.extend(global);
    out.extend(argv[pos..].iter().cloned());
    out.extend(local);
    Ok(out)
}
