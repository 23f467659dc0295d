//! Line-based `key = value` run configuration.
//!
//! ```text
//! # isolated fixed point in dimension 4
//! suite  = density-even
//! n      = 4
//! k      = 2
//! angles = 0.9, 2.3
//! ```
//!
//! Lists are comma separated. Matrices are row-major with rows separated by
//! `;`. `angles = random` draws angles from `seed`. Every error carries the
//! 1-based line number it was found on.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Keys accepted in a config file.
pub const KEYS: &[&str] = &[
    "suite", "n", "a", "k", "trials", "seed", "mode", "tol", "angles", "curvature", "theta", "time", "coupling",
    "spacings", "output",
];

/// Angle specification.
#[derive(Clone, Debug, PartialEq)]
pub enum Angles {
    Random,
    Given(Vec<f64>),
}

/// A parsed file: raw values with their line numbers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

fn config_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Config { line, msg: msg.into() })
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return config_err(line, format!("expected `key = value`, found `{content}`"));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return config_err(line, "missing key before `=`");
            }
            if !KEYS.contains(&key) {
                return config_err(line, format!("unknown key `{key}`"));
            }
            if value.is_empty() {
                return config_err(line, format!("missing value for `{key}`"));
            }
            if let Some((first, _)) = entries.get(key) {
                return config_err(line, format!("duplicate key `{key}` (first set on line {first})"));
            }
            entries.insert(key.to_string(), (line, value.to_string()));
        }
        Ok(ConfigFile { entries })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Line a key was set on.
    pub fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(l, _)| *l)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .or_else(|_| config_err(*line, format!("cannot parse `{v}` as a value for `{key}`"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => parse_list(v).map(Some).map_err(|msg| Error::Config { line: *line, msg }),
        }
    }

    pub fn matrix(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => {
                let rows: Vec<Vec<f64>> = v
                    .split(';')
                    .map(parse_list)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|msg| Error::Config { line: *line, msg })?;
                if rows.iter().any(|r| r.len() != rows[0].len()) {
                    return config_err(*line, format!("rows of `{key}` have different lengths"));
                }
                Ok(Some(rows))
            }
        }
    }

    pub fn angles(&self) -> Result<Option<Angles>> {
        match self.raw("angles") {
            None => Ok(None),
            Some(v) if v.eq_ignore_ascii_case("random") => Ok(Some(Angles::Random)),
            Some(_) => Ok(self.list("angles")?.map(Angles::Given)),
        }
    }

    /// A config error pinned to the line of `key` (or line 0 if absent).
    pub fn error(&self, key: &str, msg: impl Into<String>) -> Error {
        Error::Config { line: self.line(key).unwrap_or(0), msg: msg.into() }
    }
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    let v = v.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("`{s}` is not a finite number"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_lists_and_matrices() {
        let c = ConfigFile::parse("# head\nn = 4\n\nangles = 0.5, 1.5 # trailing\ncoupling = 0, -1; 1, 0\n").unwrap();
        assert_eq!(c.get::<usize>("n").unwrap(), Some(4));
        assert_eq!(c.angles().unwrap(), Some(Angles::Given(vec![0.5, 1.5])));
        assert_eq!(c.matrix("coupling").unwrap(), Some(vec![vec![0.0, -1.0], vec![1.0, 0.0]]));
        assert_eq!(c.line("coupling"), Some(5));
        assert_eq!(c.get::<usize>("k").unwrap(), None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line = |text: &str| match ConfigFile::parse(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("n = 4\nno equals sign\n"), 2);
        assert_eq!(line("n = 4\n\nbogus = 1\n"), 3);
        assert_eq!(line("n = 4\nn = 6\n"), 2);
        assert_eq!(line("n =\n"), 1);
        let c = ConfigFile::parse("\nangles = 1, x\n").unwrap();
        assert!(matches!(c.angles(), Err(Error::Config { line: 2, .. })));
        let c = ConfigFile::parse("n = four\n").unwrap();
        assert!(matches!(c.get::<usize>("n"), Err(Error::Config { line: 1, .. })));
        let c = ConfigFile::parse("coupling = 0, 1; 2\n").unwrap();
        assert!(matches!(c.matrix("coupling"), Err(Error::Config { line: 1, .. })));
    }

    #[test]
    fn random_angles() {
        let c = ConfigFile::parse("angles = random\nseed = 3").unwrap();
        assert_eq!(c.angles().unwrap(), Some(Angles::Random));
    }
}
