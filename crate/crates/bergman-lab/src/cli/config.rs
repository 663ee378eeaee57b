//! Line-oriented `key = value` configuration with `[section]` headers, plus
//! the resolved experiment configuration that round-trips losslessly
//! through its text form.

use std::collections::BTreeMap;

use super::CliError;

/// Parsed config file: section name -> ordered key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub sections: BTreeMap<String, Vec<(String, String)>>,
}

/// Parse the `key = value` format. Keys outside any section go to the
/// section named by the empty string.
pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    let mut sections: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut current = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| CliError::Parse {
                line: lineno + 1,
                field: line.to_string(),
                reason: "unterminated section header".to_string(),
            })?;
            current = name.trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Parse {
            line: lineno + 1,
            field: line.to_string(),
            reason: "expected key = value".to_string(),
        })?;
        sections
            .entry(current.clone())
            .or_default()
            .push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(ConfigFile { sections })
}

/// Fully resolved configuration of one experiment: subcommand name plus the
/// complete key set (defaults materialized, overrides applied).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Resolve from defaults, then the matching config-file section, then
    /// command-line overrides. Unknown keys are rejected with the offending
    /// field named.
    pub fn resolve(
        subcommand: &str,
        defaults: &[(&str, &str)],
        file: Option<&ConfigFile>,
        overrides: &[(String, String)],
    ) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, String> = defaults
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let Some(cfg) = file {
            if let Some(section) = cfg.sections.get(subcommand) {
                for (k, v) in section {
                    if !entries.contains_key(k) {
                        return Err(CliError::UnknownKey {
                            subcommand: subcommand.to_string(),
                            key: k.clone(),
                        });
                    }
                    entries.insert(k.clone(), v.clone());
                }
            }
        }
        for (k, v) in overrides {
            if !entries.contains_key(k) {
                return Err(CliError::UnknownKey {
                    subcommand: subcommand.to_string(),
                    key: k.clone(),
                });
            }
            entries.insert(k.clone(), v.clone());
        }
        Ok(ExperimentConfig {
            subcommand: subcommand.to_string(),
            entries,
        })
    }

    /// Canonical text form; parsing it back yields the same configuration.
    pub fn to_text(&self) -> String {
        let mut out = format!("[{}]\n", self.subcommand);
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Re-resolve from the canonical text form.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let cfg = parse_config(text)?;
        let (subcommand, pairs) = cfg
            .sections
            .iter()
            .find(|(name, _)| !name.is_empty())
            .ok_or_else(|| CliError::Parse {
                line: 0,
                field: String::new(),
                reason: "no section header".to_string(),
            })?;
        Ok(ExperimentConfig {
            subcommand: subcommand.clone(),
            entries: pairs.iter().cloned().collect(),
        })
    }

    pub fn get(&self, key: &str) -> Result<&str, CliError> {
        self.entries
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| CliError::UnknownKey {
                subcommand: self.subcommand.clone(),
                key: key.to_string(),
            })
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, CliError> {
        let raw = self.get(key)?;
        raw.parse().map_err(|_| CliError::Parse {
            line: 0,
            field: key.to_string(),
            reason: format!("expected a number, got '{raw}'"),
        })
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, CliError> {
        let raw = self.get(key)?;
        raw.parse().map_err(|_| CliError::Parse {
            line: 0,
            field: key.to_string(),
            reason: format!("expected an integer, got '{raw}'"),
        })
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(CliError::Parse {
                line: 0,
                field: key.to_string(),
                reason: format!("expected true/false, got '{other}'"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_sections_and_comments() {
        let cfg = parse_config("# top\n[lct]\nweight = log-abs:c=1\ntol = 1e-3\n").unwrap();
        let section = &cfg.sections["lct"];
        assert_eq!(section[0], ("weight".into(), "log-abs:c=1".into()));
        assert_eq!(section[1], ("tol".into(), "1e-3".into()));
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(parse_config("key value\n").is_err());
        assert!(parse_config("[oops\n").is_err());
    }

    #[test]
    fn resolution_precedence_and_unknown_keys() {
        let defaults = [("tol", "1e-3"), ("weight", "log-abs:c=1")];
        let file = parse_config("[lct]\ntol = 5e-4\n").unwrap();
        let cfg = ExperimentConfig::resolve(
            "lct",
            &defaults,
            Some(&file),
            &[("weight".into(), "log-abs:c=2".into())],
        )
        .unwrap();
        assert_eq!(cfg.get("tol").unwrap(), "5e-4");
        assert_eq!(cfg.get("weight").unwrap(), "log-abs:c=2");
        let bad = ExperimentConfig::resolve(
            "lct",
            &defaults,
            None,
            &[("wat".into(), "1".into())],
        );
        assert!(matches!(bad, Err(CliError::UnknownKey { .. })));
    }

    #[test]
    fn config_round_trips_losslessly() {
        let defaults = [("tol", "1e-3"), ("weight", "log-abs:c=1"), ("k-max", "24")];
        let cfg = ExperimentConfig::resolve("lct", &defaults, None, &[]).unwrap();
        let text = cfg.to_text();
        let back = ExperimentConfig::from_text(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(back.to_text(), text);
    }
}
