//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use spindyn::Vec3;

/// Configuration problem; always exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl From<spindyn::Error> for ConfigError {
    fn from(e: spindyn::Error) -> Self {
        ConfigError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

/// Keys accepted by every command.
pub const COMMON_KEYS: &[&str] = &["seed", "output"];

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected 'key = value'", n + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return err(format!("line {}: empty key", n + 1));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return err(format!("line {}: key '{k}' set twice", n + 1));
        }
    }
    Ok(map)
}

/// Merged configuration for one command: file entries overridden by flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(
        command: &'static str,
        allowed: &[&str],
        file: Option<&Path>,
        overrides: Vec<(&'static str, Option<String>)>,
    ) -> Result<Self> {
        let mut values = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        for key in values.keys() {
            if !allowed.contains(&key.as_str()) && !COMMON_KEYS.contains(&key.as_str()) {
                return err(format!("unknown key '{key}' for command '{command}'"));
            }
        }
        for (k, v) in overrides {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Self { command, values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.optional(key)?.unwrap_or(default))
    }

    pub fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| ConfigError(format!("{}: {key} = '{v}': {e}", self.command))),
        }
    }

    pub fn finite(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.parse(key, default)?;
        if !v.is_finite() {
            return err(format!("{key} must be finite, got {v}"));
        }
        Ok(v)
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.finite(key, default)?;
        if !(v > 0.0) {
            return err(format!("{key} must be positive, got {v}"));
        }
        Ok(v)
    }

    pub fn count(&self, key: &str, default: usize) -> Result<usize> {
        let v: usize = self.parse(key, default)?;
        if v == 0 {
            return err(format!("{key} must be at least 1"));
        }
        Ok(v)
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        self.parse(key, false)
    }

    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|c| {
                    let x: f64 = c.trim().parse().map_err(|e| ConfigError(format!("{key}: '{c}': {e}")))?;
                    if x.is_finite() { Ok(x) } else { err(format!("{key}: components must be finite")) }
                })
                .collect(),
        }
    }

    pub fn vec3(&self, key: &str, default: Vec3) -> Result<Vec3> {
        let v = self.list(key, default.as_slice())?;
        match v.as_slice() {
            [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
            _ => err(format!("{key} needs three comma-separated components")),
        }
    }

    pub fn output(&self) -> Option<PathBuf> {
        self.raw("output").map(PathBuf::from)
    }

    pub fn seed(&self) -> Result<u64> {
        let explicit = self.optional::<u64>("seed")?;
        Ok(spindyn::rng::resolve_seed(explicit)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_rejects_garbage() {
        let m = parse_file("# header\ngamma = 1.5\n\nB = 0, 0, 1  # field\n").unwrap();
        assert_eq!(m["gamma"], "1.5");
        assert_eq!(m["B"], "0, 0, 1");
        assert!(parse_file("gamma 1").is_err());
        assert!(parse_file("a = 1\na = 2").is_err());
        assert!(parse_file(" = 2").is_err());
    }

    #[test]
    fn overrides_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "dt = 0.5\nsteps = 10\n").unwrap();
        let c = RunConfig::new("precess", &["dt", "steps"], Some(&path), vec![("dt", Some("0.25".into()))]).unwrap();
        assert_eq!(c.positive("dt", 1.0).unwrap(), 0.25);
        assert_eq!(c.count("steps", 1).unwrap(), 10);
        assert_eq!(c.optional::<f64>("missing").unwrap(), None);
        std::fs::write(&path, "dtt = 0.5\n").unwrap();
        assert!(RunConfig::new("precess", &["dt"], Some(&path), vec![]).is_err());
    }

    #[test]
    fn typed_validation() {
        let c = RunConfig::new(
            "x",
            &["a", "b", "v", "n"],
            None,
            vec![("a", Some("-1".into())), ("b", Some("nan".into())), ("v", Some("1,2".into())), ("n", Some("0".into()))],
        )
        .unwrap();
        assert!(c.positive("a", 1.0).is_err());
        assert!(c.finite("b", 1.0).is_err());
        assert!(c.vec3("v", Vec3::zeros()).is_err());
        assert!(c.count("n", 1).is_err());
        assert_eq!(c.vec3("w", Vec3::x()).unwrap(), Vec3::x());
    }
}
