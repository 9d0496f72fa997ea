//! Run configuration: a flat `key = value` file overlaid by command-line
//! flags of the same name (flags win). Keys may be written with `-` or `_`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::csv_io::read_text;
use crate::error::{CliError, CliResult};

pub const KEYS: &[&str] = &[
    "curves",
    "responses",
    "validation_curves",
    "validation_responses",
    "predictions",
    "model",
    "out",
    "plot_out",
    "method",
    "k",
    "degree",
    "domain_min",
    "domain_max",
    "alpha",
    "beta",
    "alpha_grid",
    "beta_grid",
    "seed",
    "n",
    "sigma_eps",
    "decay",
    "points",
];

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

#[derive(Debug, Default, Clone)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .or_else(|| line.split_once(char::is_whitespace))
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "{}: line {}: expected `key = value`",
                        origin.display(),
                        i + 1
                    ))
                })?;
            let key = normalize(k);
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "{}: line {}: unknown key `{key}`",
                    origin.display(),
                    i + 1
                )));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_text(path)?, path)
    }

    /// Flags override file values.
    pub fn overlay<'a>(&mut self, flags: impl IntoIterator<Item = (&'a str, Option<String>)>) {
        for (k, v) in flags {
            if let Some(v) = v {
                self.values.insert(normalize(k), v);
            }
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("`{key}` has invalid value `{v}`"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?
            .ok_or_else(|| CliError::Config(format!("missing required setting `{key}`")))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    /// A path that must exist.
    pub fn input_path(&self, key: &str) -> CliResult<PathBuf> {
        let p = self
            .path(key)
            .ok_or_else(|| CliError::Config(format!("missing required path `{key}`")))?;
        if !p.exists() {
            return Err(CliError::Config(format!(
                "`{key}` path {} does not exist",
                p.display()
            )));
        }
        Ok(p)
    }

    pub fn grid(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        let values = raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| *v > 0.0 && v.is_finite())
                    .ok_or_else(|| {
                        CliError::Config(format!("`{key}` entry `{}` is not a positive number", s.trim()))
                    })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        Ok(Some(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut c = RunConfig::parse("# basis\nk = 100\ndegree 3\nalpha-grid = 0.1, 0.2\n", Path::new("c")).unwrap();
        c.overlay([("k", Some("12".to_string())), ("beta", None)]);
        assert_eq!(c.require::<usize>("k").unwrap(), 12);
        assert_eq!(c.require::<usize>("degree").unwrap(), 3);
        assert_eq!(c.grid("alpha_grid").unwrap(), Some(vec![0.1, 0.2]));
        assert!(c.get::<f64>("beta").unwrap().is_none());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::parse("colour = red\n", Path::new("c")).is_err());
        let c = RunConfig::parse("k = many\nalpha_grid = 1,-2\n", Path::new("c")).unwrap();
        assert_eq!(c.require::<usize>("k").unwrap_err().kind(), "config");
        assert!(c.grid("alpha_grid").is_err());
    }
}
