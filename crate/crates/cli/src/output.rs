use std::io::Write;
use std::path::Path;

use floquet_chopper::single_photon::ScatterParams;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Quantities derived from the configuration, echoed for reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derived {
    pub gamma0: f64,
    pub omega: f64,
    pub beta: f64,
    pub period: f64,
}

impl Derived {
    pub fn of(params: &ScatterParams) -> Self {
        let omega = params.protocol().omega();
        Self { gamma0: params.gamma0(), omega, beta: omega / params.gamma0(), period: params.period() }
    }
}

/// Column-major description, row-major data. NaN marks undefined entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub config: RunConfig,
    pub derived: Derived,
    pub table: Table,
}

#[derive(Serialize)]
struct JsonArtifact<'a> {
    config: &'a RunConfig,
    derived: &'a Derived,
    columns: &'a [&'static str],
    rows: Vec<Vec<Option<f64>>>,
}

fn csv_field(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

impl Artifact {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let config = serde_json::to_string(&self.config).map_err(|e| CliError::Config(e.to_string()))?;
        let derived = serde_json::to_string(&self.derived).map_err(|e| CliError::Config(e.to_string()))?;
        match format {
            Format::Csv => {
                let mut out = String::new();
                out.push_str(&format!("# {config}\n# {derived}\n"));
                out.push_str(&self.table.columns.join(","));
                out.push('\n');
                for row in &self.table.rows {
                    let fields: Vec<String> = row.iter().map(|v| csv_field(*v)).collect();
                    out.push_str(&fields.join(","));
                    out.push('\n');
                }
                Ok(out)
            }
            Format::Json => {
                let doc = JsonArtifact {
                    config: &self.config,
                    derived: &self.derived,
                    columns: self.table.columns,
                    rows: self
                        .table
                        .rows
                        .iter()
                        .map(|r| r.iter().map(|v| if v.is_nan() { None } else { Some(*v) }).collect())
                        .collect(),
                };
                let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
                text.push('\n');
                Ok(text)
            }
        }
    }
}

/// Reads back the configuration echoed in the first line of a CSV artifact.
pub fn config_from_csv(text: &str) -> Result<RunConfig, CliError> {
    let first = text.lines().next().unwrap_or_default();
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| CliError::Config("missing configuration header".into()))?;
    RunConfig::from_json(json)
}

pub fn write_text(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn artifact() -> Artifact {
        let cfg = RunConfig::new("constant", 1.0);
        let params = cfg.scatter_params().unwrap();
        Artifact {
            config: cfg.resolved(&params),
            derived: Derived::of(&params),
            table: Table { columns: &["a", "b"], rows: vec![vec![1.0, f64::NAN], vec![-0.25, 3e-20]] },
        }
    }

    #[test]
    fn csv_layout() {
        let text = artifact().render(Format::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# {"));
        assert!(lines[1].starts_with("# {\"gamma0\""));
        assert_eq!(lines[2], "a,b");
        assert_eq!(lines[3], "1.0000000000000000e0,");
        assert_eq!(lines[4], "-2.5000000000000000e-1,3.0000000000000003e-20");
        assert!(!text.contains('\r'));
        assert_eq!(config_from_csv(&text).unwrap(), artifact().config);
    }

    #[test]
    fn json_uses_null_for_undefined() {
        let text = artifact().render(Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["rows"][0][1].is_null());
        assert_eq!(v["columns"][1], "b");
    }
}
