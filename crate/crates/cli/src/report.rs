//! Report envelope, pass/fail checks and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use su2sigma::SUITE_VERSION;

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Holds,
}

/// One checked quantity. NaN values never pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: Relation::AtMost, passed: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: Relation::AtLeast, passed: value >= bound }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: 1.0, relation: Relation::Holds, passed: ok }
    }
}

/// What a command produces before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
    /// Tabular export written in CSV mode; the checks table otherwise.
    pub table: Option<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn report(&self, cfg: &RunConfig) -> Report {
        Report {
            suite_version: SUITE_VERSION,
            command: self.command.clone(),
            config: cfg.clone(),
            passed: self.passed(),
            checks: self.checks.clone(),
            data: self.data.clone(),
        }
    }

    pub fn checks_csv(&self) -> String {
        checks_csv(&self.command, &self.checks)
    }
}

pub fn checks_csv(command: &str, checks: &[Check]) -> String {
    let mut s = String::from("suite,check,value,bound,relation,passed\n");
    for c in checks {
        let rel = match c.relation {
            Relation::AtMost => "at_most",
            Relation::AtLeast => "at_least",
            Relation::Holds => "holds",
        };
        s.push_str(&format!("{command},{},{:e},{:e},{rel},{}\n", c.name, c.value, c.bound, c.passed));
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite_version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes via a temporary file in the target directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `<out>.json` next to a CSV output.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Emits the outcome per the configured format and destination.
pub fn emit(outcome: &Outcome, cfg: &RunConfig) -> std::io::Result<()> {
    let report = outcome.report(cfg);
    match (cfg.format, &cfg.out) {
        (Format::Json, Some(path)) => write_atomic(path, report.to_json().as_bytes()),
        (Format::Json, None) => std::io::stdout().write_all(report.to_json().as_bytes()),
        (Format::Csv, out) => {
            let table = outcome.table.clone().unwrap_or_else(|| outcome.checks_csv());
            match out {
                Some(path) => {
                    write_atomic(path, table.as_bytes())?;
                    write_atomic(&sidecar_path(path), report.to_json().as_bytes())
                }
                None => std::io::stdout().write_all(table.as_bytes()),
            }
        }
    }
}

/// One line per check on stderr, failing ones marked.
pub fn summarize(outcome: &Outcome) -> String {
    let mut s = format!("{}: {}\n", outcome.command, if outcome.passed() { "PASS" } else { "FAIL" });
    for c in &outcome.checks {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Holds => "holds",
        };
        let mark = if c.passed { "ok  " } else { "FAIL" };
        if c.relation == Relation::Holds {
            s.push_str(&format!("  {mark} {}\n", c.name));
        } else {
            s.push_str(&format!("  {mark} {} = {:.3e} ({rel} {:.1e})\n", c.name, c.value, c.bound));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Check::at_least("x", f64::NAN, 1.0).passed);
        assert!(Check::at_most("x", 1.0, 1.0).passed);
    }

    #[test]
    fn atomic_write_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, b"x\n").unwrap();
        write_atomic(&p, b"y\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "y\n");
        assert_eq!(sidecar_path(&p), dir.path().join("a.csv.json"));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn checks_table() {
        let o = Outcome {
            command: "t".into(),
            checks: vec![Check::at_most("a", 0.5, 1.0), Check::holds("b", false)],
            data: serde_json::Value::Null,
            table: None,
        };
        assert!(!o.passed());
        let csv = o.checks_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("t,b,0e0,1e0,holds,false"));
        assert!(summarize(&o).starts_with("t: FAIL\n"));
    }
}
