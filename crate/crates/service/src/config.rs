//! Service configuration: a TOML file, then `DCLAB_*` environment
//! variables on top.

use std::path::{Path, PathBuf};

use chrono::FixedOffset;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub listen: String,
    pub store_path: PathBuf,
    pub blob_dir: PathBuf,
    /// Offset used for the hour-of-day histogram.
    pub course_timezone: FixedOffset,
    pub max_horizon_ns: u64,
    pub max_deltas_per_instant: u32,
    /// Instructor account created when the store has no users.
    pub bootstrap: Option<Bootstrap>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bootstrap {
    pub name: String,
    pub password: String,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: "127.0.0.1:8080".into(),
            store_path: "data/store.json".into(),
            blob_dir: "data/blobs".into(),
            course_timezone: FixedOffset::east_opt(0).expect("zero offset"),
            max_horizon_ns: 10_000_000_000,
            max_deltas_per_instant: dclab::sim::DEFAULT_MAX_DELTAS,
            bootstrap: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    listen: Option<String>,
    store_path: Option<PathBuf>,
    blob_dir: Option<PathBuf>,
    course_timezone: Option<String>,
    max_horizon_ns: Option<u64>,
    max_deltas_per_instant: Option<u32>,
    bootstrap: Option<Bootstrap>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {reason}")]
    File { path: String, reason: String },
    #[error("{key}: {reason}")]
    Value { key: String, reason: String },
}

/// Parses `+08:00`, `-0530`, `UTC` or `Z`.
pub fn parse_offset(s: &str) -> Option<FixedOffset> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("utc") || s == "Z" {
        return FixedOffset::east_opt(0);
    }
    let (sign, rest) = match s.as_bytes().first()? {
        b'+' => (1, &s[1..]),
        b'-' => (-1, &s[1..]),
        _ => return None,
    };
    let digits: String = rest.chars().filter(|c| *c != ':').collect();
    if digits.len() != 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let h: i32 = digits[..2].parse().ok()?;
    let m: i32 = digits[2..].parse().ok()?;
    if m >= 60 {
        return None;
    }
    FixedOffset::east_opt(sign * (h * 3600 + m * 60))
}

impl Config {
    /// Reads `path` if given, then applies overrides from `env`. Relative
    /// paths in the file are taken relative to the file's directory.
    pub fn load(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut base = PathBuf::new();
        let mut file = FileConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| ConfigError::File { path: p.display().to_string(), reason: e.to_string() })?;
            file = toml::from_str(&text).map_err(|e| ConfigError::File { path: p.display().to_string(), reason: e.to_string() })?;
            base = p.parent().map(Path::to_path_buf).unwrap_or_default();
        }
        let var = |key: &str| env(&format!("DCLAB_{}", key.to_ascii_uppercase()));
        let num = |key: &str, v: String| {
            v.parse::<u64>().map_err(|e| ConfigError::Value { key: format!("DCLAB_{}", key.to_ascii_uppercase()), reason: e.to_string() })
        };

        if let Some(v) = var("listen").or(file.listen) {
            cfg.listen = v;
        }
        if let Some(v) = var("store_path").map(PathBuf::from).or(file.store_path.map(|p| base.join(p))) {
            cfg.store_path = v;
        } else {
            cfg.store_path = base.join(&cfg.store_path);
        }
        if let Some(v) = var("blob_dir").map(PathBuf::from).or(file.blob_dir.map(|p| base.join(p))) {
            cfg.blob_dir = v;
        } else {
            cfg.blob_dir = base.join(&cfg.blob_dir);
        }
        if let Some(v) = var("course_timezone").or(file.course_timezone) {
            cfg.course_timezone = parse_offset(&v)
                .ok_or_else(|| ConfigError::Value { key: "course_timezone".into(), reason: format!("{v:?} is not an offset like +08:00") })?;
        }
        if let Some(v) = var("max_horizon_ns") {
            cfg.max_horizon_ns = num("max_horizon_ns", v)?;
        } else if let Some(v) = file.max_horizon_ns {
            cfg.max_horizon_ns = v;
        }
        if let Some(v) = var("max_deltas_per_instant") {
            cfg.max_deltas_per_instant = num("max_deltas_per_instant", v)?.try_into().map_err(|_| ConfigError::Value {
                key: "DCLAB_MAX_DELTAS_PER_INSTANT".into(),
                reason: "too large".into(),
            })?;
        } else if let Some(v) = file.max_deltas_per_instant {
            cfg.max_deltas_per_instant = v;
        }
        if cfg.max_deltas_per_instant == 0 {
            return Err(ConfigError::Value { key: "max_deltas_per_instant".into(), reason: "must be at least 1".into() });
        }
        cfg.bootstrap = file.bootstrap;
        Ok(cfg)
    }

    /// [`Config::load`] with the process environment.
    pub fn from_env(path: Option<&Path>) -> Result<Config, ConfigError> {
        Config::load(path, |k| std::env::var(k).ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn offsets() {
        assert_eq!(parse_offset("+08:00").unwrap().local_minus_utc(), 8 * 3600);
        assert_eq!(parse_offset("-0530").unwrap().local_minus_utc(), -(5 * 3600 + 30 * 60));
        assert_eq!(parse_offset("UTC").unwrap().local_minus_utc(), 0);
        assert!(parse_offset("Asia/Shanghai").is_none());
        assert!(parse_offset("+08:75").is_none());
    }

    #[test]
    fn file_then_environment() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("dclab.toml");
        std::fs::write(&p, "listen = \"0.0.0.0:9000\"\nstore_path = \"s.json\"\ncourse_timezone = \"+08:00\"\nmax_horizon_ns = 5\n").unwrap();
        let env: HashMap<&str, &str> = [("DCLAB_MAX_HORIZON_NS", "7"), ("DCLAB_BLOB_DIR", "/tmp/b")].into();
        let cfg = Config::load(Some(&p), |k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.listen, "0.0.0.0:9000");
        assert_eq!(cfg.store_path, dir.path().join("s.json"));
        assert_eq!(cfg.blob_dir, PathBuf::from("/tmp/b"));
        assert_eq!(cfg.max_horizon_ns, 7);
        assert_eq!(cfg.course_timezone.local_minus_utc(), 8 * 3600);

        std::fs::write(&p, "lisen = 1\n").unwrap();
        assert!(matches!(Config::load(Some(&p), |_| None), Err(ConfigError::File { .. })));
        assert!(matches!(Config::load(None, |k| (k == "DCLAB_MAX_HORIZON_NS").then(|| "x".into())), Err(ConfigError::Value { .. })));
    }
}
