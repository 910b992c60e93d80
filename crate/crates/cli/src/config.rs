//! Merging a JSON config file into the command line.
//!
//! Config keys are long option names (`max-iter` or `max_iter`). A key is
//! applied only when the option was not given on the command line.
//! The effective option values of a run come back in the same flat form,
//! so a manifest's config can be passed to `--config` to repeat the run.

use std::ffi::OsString;
use std::fs;

use clap::error::ErrorKind;
use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command, CommandFactory, FromArgMatches};
use serde_json::{Map, Value};

use crate::args::Cli;

/// Parsed command line with its effective options.
#[derive(Debug)]
pub struct Invocation {
    pub cli: Cli,
    /// Subcommand path, e.g. `render fates`.
    pub command: String,
    /// Every option of the subcommand and the global seed and thread count,
    /// keyed by long name, with values as given or defaulted.
    pub config: Map<String, Value>,
}

pub fn parse_with_config(argv: &[String]) -> Result<Invocation, clap::Error> {
    let root = Cli::command();
    let strict = root.clone().try_get_matches_from(argv);
    // Options required by a subcommand may come from the config, so the
    // config path is looked up in a lenient parse.
    let matches = match &strict {
        Ok(m) => m.clone(),
        Err(_) => root
            .clone()
            .ignore_errors(true)
            .try_get_matches_from(argv)?,
    };
    let path = matches
        .try_get_one::<std::path::PathBuf>("config")
        .ok()
        .flatten();
    let Some(path) = path else {
        return invocation(&root, strict?);
    };
    let mut cmd = root.clone();
    let text = fs::read_to_string(path).map_err(|e| {
        cmd.error(
            ErrorKind::Io,
            format!("cannot read config {}: {e}", path.display()),
        )
    })?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| {
        cmd.error(
            ErrorKind::InvalidValue,
            format!("config {} is not JSON: {e}", path.display()),
        )
    })?;
    let Value::Object(fields) = doc else {
        return Err(cmd.error(ErrorKind::InvalidValue, "config must be a JSON object"));
    };

    let (leaf, leaf_matches) = leaf_command(&root, &matches);
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in &fields {
        let name = key.replace('_', "-");
        let owner = [(&leaf, leaf_matches), (&root, &matches)]
            .into_iter()
            .find_map(|(c, m)| {
                c.get_arguments()
                    .find(|a| a.get_long() == Some(name.as_str()))
                    .map(|a| (a.get_id().clone(), m))
            });
        let Some((id, m)) = owner else {
            return Err(cmd.error(
                ErrorKind::UnknownArgument,
                format!("config key `{key}` is not an option of this command"),
            ));
        };
        if id == "config" {
            return Err(cmd.error(ErrorKind::InvalidValue, "config files cannot nest"));
        }
        if m.value_source(id.as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => extra.push(format!("--{name}").into()),
            v => {
                let text = scalar_text(v).ok_or_else(|| {
                    cmd.error(
                        ErrorKind::InvalidValue,
                        format!("config key `{key}` has an unsupported value"),
                    )
                })?;
                extra.push(format!("--{name}={text}").into());
            }
        }
    }

    let mut full: Vec<OsString> = argv.iter().map(OsString::from).collect();
    full.extend(extra);
    invocation(&root, root.clone().try_get_matches_from(full)?)
}

fn invocation(root: &Command, matches: ArgMatches) -> Result<Invocation, clap::Error> {
    let cli = Cli::from_arg_matches(&matches)?;
    let (leaf, leaf_matches) = leaf_command(root, &matches);
    let mut names = Vec::new();
    let mut m = &matches;
    while let Some((name, sub)) = m.subcommand() {
        names.push(name.to_string());
        m = sub;
    }
    let mut config = Map::new();
    let sources = [(&leaf, leaf_matches), (root, &matches)];
    for (cmd, m) in sources {
        for arg in cmd.get_arguments() {
            let Some(long) = arg.get_long() else { continue };
            if matches!(long, "config" | "out" | "help" | "version") {
                continue;
            }
            let id = arg.get_id().as_str();
            let value = match arg.get_action() {
                ArgAction::SetTrue => Value::Bool(m.get_flag(id)),
                _ => match m.get_raw(id) {
                    Some(mut raw) => match raw.next() {
                        Some(v) => Value::String(v.to_string_lossy().into_owned()),
                        None => continue,
                    },
                    None => continue,
                },
            };
            config.insert(long.to_string(), value);
        }
    }
    Ok(Invocation {
        cli,
        command: names.join(" "),
        config,
    })
}

/// Deepest subcommand selected in `matches`, with its matches.
fn leaf_command<'a>(root: &Command, matches: &'a ArgMatches) -> (Command, &'a ArgMatches) {
    let mut cmd = root.clone();
    let mut m = matches;
    while let Some((name, sub)) = m.subcommand() {
        cmd = cmd
            .find_subcommand(name)
            .expect("matched subcommand exists")
            .clone();
        m = sub;
    }
    (cmd, m)
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items.iter().map(scalar_text).collect();
            parts.map(|p| p.join(","))
        }
        _ => None,
    }
}
