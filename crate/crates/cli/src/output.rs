//! Reports, CSV tables and plots written by an experiment.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::Kind;
use crate::error::CliError;
use crate::plot::line_chart_svg;

/// A named pass/fail verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A CSV file written to `data/<name>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

/// A single-series line chart written to `plots/<name>.svg`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

/// Everything an experiment produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub kind: Kind,
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub plots: Vec<Series>,
    /// Scalar results merged into sweep tables.
    pub summary: Vec<(String, f64)>,
}

impl Outcome {
    pub fn new(kind: Kind) -> Self {
        Outcome { kind, lines: Vec::new(), checks: Vec::new(), tables: Vec::new(), plots: Vec::new(), summary: Vec::new() }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn table(&mut self, name: impl Into<String>, csv: String) {
        self.tables.push(Table { name: name.into(), csv });
    }

    pub fn plot(&mut self, name: &str, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) {
        self.plots.push(Series { name: name.into(), x_label: x_label.into(), y_label: y_label.into(), points });
    }

    pub fn summary(&mut self, key: &str, value: f64) {
        self.summary.push((key.to_string(), value));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn report_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.kind);
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        let _ = writeln!(s, "checks:");
        for c in &self.checks {
            let _ = writeln!(s, "  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "status: {}", if self.passed() { "all checks passed" } else { "check failure" });
        s
    }

    /// Write `report.txt`, `data/*.csv` and `plots/*.svg` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_atomic(&dir.join("report.txt"), &self.report_text())?;
        for t in &self.tables {
            write_atomic(&dir.join("data").join(format!("{}.csv", t.name)), &t.csv)?;
        }
        for p in &self.plots {
            write_atomic(&dir.join("plots").join(format!("{}.svg", p.name)), &line_chart_svg(p))?;
        }
        Ok(())
    }
}

/// Write through a temporary file and rename, so readers never see partial files.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Render a float for CSV output with full precision.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
