//! Run configuration: defaults, then an optional TOML file, then flags.
//!
//! The file is a flat table. Recognized keys are `radius`, `mass`, `seed`,
//! `grid` (array or `"a,b,c"` string), `format`, `out` and one
//! `tol_<name>` key per tolerance override:
//!
//! ```toml
//! radius = 2.0
//! seed = 7
//! grid = [32, 16, 32]
//! tol_gram = 1e-10
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use su2sigma::quadrature::DEFAULT_ORDERS;
use su2sigma::tolerances::Tolerances;
use su2sigma::SpaceConfig;

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Bad input from the command line or the config file (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub radius: f64,
    pub mass: f64,
    pub tolerances: Tolerances,
    pub grid: [usize; 3],
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let (a, b, c) = DEFAULT_ORDERS;
        Self {
            radius: 1.0,
            mass: 1.0,
            tolerances: Tolerances::default(),
            grid: [a, b, c],
            out: None,
            format: Format::Json,
            seed: DEFAULT_SEED,
        }
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub radius: Option<f64>,
    pub mass: Option<f64>,
    pub tol: Vec<String>,
    pub grid: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn parse_grid(s: &str) -> anyhow::Result<[usize; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(usage(format!("grid must be nchi,ntheta,nphi, got {s:?}")));
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| usage(format!("bad grid order {p:?}")))?;
    }
    Ok(out)
}

/// Comma-separated list of floats.
pub fn parse_list(s: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| usage(format!("bad {what} entry {p:?}"))))
        .collect()
}

pub fn parse_vec3(s: &str, what: &str) -> anyhow::Result<[f64; 3]> {
    let v = parse_list(s, what)?;
    <[f64; 3]>::try_from(v).map_err(|_| usage(format!("{what} needs three components, got {s:?}")))
}

fn apply_file(cfg: &mut RunConfig, path: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    let num = |key: &str, v: &toml::Value| -> anyhow::Result<f64> {
        match v {
            toml::Value::Float(f) => Ok(*f),
            toml::Value::Integer(i) => Ok(*i as f64),
            _ => Err(usage(format!("config key {key} must be a number"))),
        }
    };
    for (key, value) in &table {
        match key.as_str() {
            "radius" => cfg.radius = num(key, value)?,
            "mass" => cfg.mass = num(key, value)?,
            "seed" => {
                cfg.seed = value
                    .as_integer()
                    .and_then(|i| u64::try_from(i).ok())
                    .ok_or_else(|| usage("config key seed must be a non-negative integer"))?
            }
            "grid" => {
                cfg.grid = match value {
                    toml::Value::String(s) => parse_grid(s)?,
                    toml::Value::Array(a) => {
                        let v: Vec<usize> = a
                            .iter()
                            .map(|x| x.as_integer().and_then(|i| usize::try_from(i).ok()))
                            .collect::<Option<_>>()
                            .ok_or_else(|| usage("config grid entries must be non-negative integers"))?;
                        <[usize; 3]>::try_from(v).map_err(|_| usage("config grid needs three orders"))?
                    }
                    _ => return Err(usage("config grid must be an array or a string")),
                }
            }
            "format" => {
                let s = value.as_str().ok_or_else(|| usage("config format must be a string"))?;
                cfg.format = Format::from_str(s, true).map_err(|_| usage(format!("unknown format {s:?}")))?;
            }
            "out" => cfg.out = Some(PathBuf::from(value.as_str().ok_or_else(|| usage("config out must be a string"))?)),
            other => match other.strip_prefix("tol_") {
                Some(name) => cfg.tolerances.set(name, num(key, value)?).map_err(|e| usage(e.to_string()))?,
                None => return Err(usage(format!("unknown config key {other:?}"))),
            },
        }
    }
    Ok(())
}

impl RunConfig {
    /// Defaults, then `file`, then `flags`; validates the result.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> anyhow::Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            apply_file(&mut cfg, path)?;
        }
        if let Some(r) = flags.radius {
            cfg.radius = r;
        }
        if let Some(m) = flags.mass {
            cfg.mass = m;
        }
        for pair in &flags.tol {
            cfg.tolerances.set_pair(pair).map_err(|e| usage(e.to_string()))?;
        }
        if let Some(g) = &flags.grid {
            cfg.grid = parse_grid(g)?;
        }
        if let Some(s) = flags.seed {
            cfg.seed = s;
        }
        if flags.out.is_some() {
            cfg.out = flags.out.clone();
        }
        if let Some(f) = flags.format {
            cfg.format = f;
        }
        cfg.space()?;
        let [a, b, c] = cfg.grid;
        if a < 2 || b < 2 || c < 4 {
            return Err(usage(format!("grid orders ({a}, {b}, {c}) too small; need at least (2, 2, 4)")));
        }
        Ok(cfg)
    }

    pub fn space(&self) -> anyhow::Result<SpaceConfig> {
        SpaceConfig::new(self.radius, self.mass).map_err(|e| usage(e.to_string()))
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_lists() {
        assert_eq!(parse_grid("24, 16,32").unwrap(), [24, 16, 32]);
        assert!(parse_grid("24,16").is_err());
        assert_eq!(parse_vec3("1,2.5,-3", "v").unwrap(), [1.0, 2.5, -3.0]);
        assert!(parse_vec3("1,2", "v").is_err());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "radius = 2.0\nmass = 3\nseed = 5\ngrid = \"8,8,8\"\ntol_gram = 1e-6\n").unwrap();
        let flags = Overrides { radius: Some(4.0), tol: vec!["gram=1e-5".into()], ..Default::default() };
        let cfg = RunConfig::resolve(Some(&path), &flags).unwrap();
        assert_eq!(cfg.radius, 4.0);
        assert_eq!(cfg.mass, 3.0);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.grid, [8, 8, 8]);
        assert_eq!(cfg.tol("gram"), 1e-5);
        assert_eq!(cfg.tol("volume"), 1e-12);
    }

    #[test]
    fn bad_inputs_are_usage_errors() {
        let bad = [
            Overrides { radius: Some(-1.0), ..Default::default() },
            Overrides { tol: vec!["nonsense=1".into()], ..Default::default() },
            Overrides { tol: vec!["gram=0".into()], ..Default::default() },
            Overrides { grid: Some("1,2,4".into()), ..Default::default() },
        ];
        for o in bad {
            let err = RunConfig::resolve(None, &o).unwrap_err();
            assert!(err.downcast_ref::<UsageError>().is_some(), "{err}");
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "colour = 1\n").unwrap();
        assert!(RunConfig::resolve(Some(&path), &Overrides::default()).is_err());
    }
}
