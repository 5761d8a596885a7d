//! Flat `key = value` run configuration. Flags given on the command line
//! win over the file.

use std::collections::BTreeMap;

use crate::report::CliError;

const KEYS: &[&str] = &[
    "seed",
    "out",
    "timing",
    "trials",
    "grid",
    "samples",
    "budget",
    "covers",
    "complexes",
    "witness_grid",
    "probe_trials",
    "rokhlin_systems",
    "distinct_cases",
    "patterns",
    "pattern_trials",
    "sphere_samples",
    "n1_sequences",
    "descriptors",
];

#[derive(Debug, Default, Clone)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str, path: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::config(path, format!("line {}: expected key=value", i + 1)));
            };
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(CliError::config(path, format!("line {}: unknown key {k:?}", i + 1)));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value, else config value, else default.
    pub fn num<T: std::str::FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::usage(format!("config value for {key:?} is not a valid number: {s:?}"))),
            None => Ok(default),
        }
    }

    pub fn flag(&self, key: &str, flag: bool) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        match self.get(key) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(s) => Err(CliError::usage(format!("config value for {key:?} is not a boolean: {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let c = RunConfig::parse("# budgets\nseed = 9\n\ntrials=5\ntiming=true\n", "x").unwrap();
        assert_eq!(c.num::<u64>("seed", None, 0).unwrap(), 9);
        assert_eq!(c.num::<u64>("seed", Some(3), 0).unwrap(), 3);
        assert_eq!(c.num::<usize>("grid", None, 64).unwrap(), 64);
        assert!(c.flag("timing", false).unwrap());
        assert!(RunConfig::parse("seed 9", "x").is_err());
        assert!(RunConfig::parse("sead=9", "x").is_err());
        assert!(RunConfig::parse("seed=x", "x").unwrap().num::<u64>("seed", None, 0).is_err());
    }
}
