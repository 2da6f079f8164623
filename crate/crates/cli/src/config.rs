//! `key = value` configuration files and small argument types.

use crate::CliError;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Settings read from a config file. Keys match the long flag names.
#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected 'key = value'", no + 1)))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", no + 1)));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The flag value if given, otherwise the config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key '{key}': {e}"))),
        }
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }
}

/// Integer lags given as `a..b` (inclusive), `a` or `a,b,c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lags(pub Vec<i64>);

impl FromStr for Lags {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let int = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("bad lag '{t}'"));
        if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty lag range {s}"));
            }
            return Ok(Lags((a..=b).collect()));
        }
        let v = s.split(',').map(int).collect::<Result<Vec<_>, _>>()?;
        Ok(Lags(v))
    }
}

/// Seed default: `DTNOISE_SEED` when set, else 0.
pub fn env_seed() -> Result<u64, CliError> {
    match std::env::var("DTNOISE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("DTNOISE_SEED is not an unsigned integer: '{v}'"))),
        Err(_) => Ok(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values() {
        let c = Config::parse("# run\nfamily = meyer\nM=3 # bands\nsignal_length = 64\n").unwrap();
        assert_eq!(c.pick::<String>(None, "family").unwrap().as_deref(), Some("meyer"));
        assert_eq!(c.or::<usize>(None, "M", 2).unwrap(), 3);
        assert_eq!(c.or::<usize>(Some(5), "M", 2).unwrap(), 5);
        assert_eq!(c.or::<usize>(None, "signal-length", 1).unwrap(), 64);
        assert!(c.required::<f64>(None, "eps").is_err());
        assert!(Config::parse("novalue\n").is_err());
        assert!(c.or::<usize>(None, "family", 0).is_err());
    }

    #[test]
    fn lag_specs() {
        assert_eq!("-2..1".parse::<Lags>().unwrap().0, vec![-2, -1, 0, 1]);
        assert_eq!("0..=2".parse::<Lags>().unwrap().0, vec![0, 1, 2]);
        assert_eq!("3".parse::<Lags>().unwrap().0, vec![3]);
        assert_eq!("1,4".parse::<Lags>().unwrap().0, vec![1, 4]);
        assert!("2..1".parse::<Lags>().is_err());
        assert!("x".parse::<Lags>().is_err());
    }
}
