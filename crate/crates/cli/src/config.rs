//! `--config` files: TOML mirroring the command-line flags.
//!
//! Top-level keys apply to every subcommand; a table named after the subcommand
//! applies to that subcommand only and is read second. Each key becomes the
//! flag `--key` (underscores read as dashes), arrays are joined with commas and
//! a `true` boolean becomes a bare switch. The resulting tokens are placed
//! ahead of the user's own flags, so the command line wins.

use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid TOML: {0}")]
    Syntax(String),
    #[error("config key {key:?}: {reason}")]
    Value { key: String, reason: String },
}

/// The flag tokens a config file contributes to `subcommand`.
pub fn config_tokens(text: &str, subcommand: &str) -> Result<Vec<String>, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_owned()))?;
    let mut tokens = Vec::new();
    for (key, value) in &table {
        if !value.is_table() {
            push_flag(&mut tokens, key, value)?;
        }
    }
    if let Some(section) = table.get(subcommand) {
        let section = section.as_table().ok_or_else(|| ConfigError::Value {
            key: subcommand.to_owned(),
            reason: "a subcommand section must be a table".into(),
        })?;
        for (key, value) in section {
            push_flag(&mut tokens, key, value)?;
        }
    }
    Ok(tokens)
}

fn push_flag(tokens: &mut Vec<String>, key: &str, value: &Value) -> Result<(), ConfigError> {
    let bad = |reason: &str| ConfigError::Value {
        key: key.to_owned(),
        reason: reason.to_owned(),
    };
    if key == "config" {
        return Err(bad("config files cannot include other config files"));
    }
    if key.is_empty() || key.starts_with('-') || key.chars().any(char::is_whitespace) {
        return Err(bad("not a flag name"));
    }
    let flag = format!("--{}", key.replace('_', "-"));
    match value {
        Value::Boolean(true) => tokens.push(flag),
        Value::Boolean(false) => {}
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|v| scalar(v).ok_or_else(|| bad("arrays may hold only strings and numbers")))
                .collect::<Result<Vec<_>, _>>()?;
            tokens.push(flag);
            tokens.push(parts.join(","));
        }
        other => {
            let s = scalar(other).ok_or_else(|| bad("unsupported value type"))?;
            tokens.push(flag);
            tokens.push(s);
        }
    }
    Ok(())
}

fn scalar(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Integer(i) => Some(i.to_string()),
        Value::Float(f) => Some(f.to_string()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattens_scalars_lists_and_switches() {
        let text = "L = 100\nN = 16384\n[clt]\nradii = [1, 2.5]\nkind = \"infinite_variance\"\nmax_terms = 10\nquiet = true\noff = false\n";
        let t = config_tokens(text, "clt").unwrap();
        assert_eq!(
            t,
            [
                "--L",
                "100",
                "--N",
                "16384",
                "--kind",
                "infinite_variance",
                "--max-terms",
                "10",
                "--quiet",
                "--radii",
                "1,2.5"
            ]
        );
        // other sections are skipped
        assert_eq!(
            config_tokens(text, "verify").unwrap(),
            ["--L", "100", "--N", "16384"]
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            config_tokens("a = ", "verify"),
            Err(ConfigError::Syntax(_))
        ));
        assert!(config_tokens("config = \"x.toml\"", "verify").is_err());
        assert!(config_tokens("verify = 3", "verify").is_err());
        assert!(config_tokens("a = [[1]]", "verify").is_err());
        assert!(config_tokens("\"-x\" = 1", "verify").is_err());
    }
}
