use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Size,
    Power,
}

/// Rejection rate for one (n, p, level).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub exponent: String,
    pub h: f64,
    pub rho_n: f64,
    pub level: f64,
    pub rejections: usize,
    /// Replications that produced a statistic; the rate's denominator.
    pub valid: usize,
    pub failed: usize,
    pub rate: f64,
    /// √(rate (1 − rate) / valid)
    pub se: f64,
}

impl Cell {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        exponent: String,
        h: f64,
        rho_n: f64,
        level: f64,
        rejections: usize,
        valid: usize,
        failed: usize,
    ) -> Self {
        let (rate, se) = if valid == 0 {
            (0.0, 0.0)
        } else {
            let p = rejections as f64 / valid as f64;
            (p, (p * (1.0 - p) / valid as f64).sqrt())
        };
        Self {
            n,
            exponent,
            h,
            rho_n,
            level,
            rejections,
            valid,
            failed,
            rate,
            se,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: ReportKind,
    pub config: ExperimentConfig,
    pub cells: Vec<Cell>,
    /// Wall-clock seconds; the only field that depends on the machine.
    pub runtime_seconds: Option<f64>,
}

impl Report {
    pub fn cell(&self, n: usize, exponent: &str, level: f64) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.exponent == exponent && c.level == level)
    }

    pub fn without_timing(&self) -> Report {
        Report {
            runtime_seconds: None,
            ..self.clone()
        }
    }

    pub fn failed_total(&self) -> usize {
        let per_level = self.config.levels.len().max(1);
        self.cells.iter().map(|c| c.failed).sum::<usize>() / per_level
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(Error::InvalidSpec(format!("unknown format '{s}'"))),
        }
    }
}

pub fn level_label(level: f64) -> String {
    format!("{}%", (level * 1000.0).round() / 10.0)
}

fn render_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n", "exponent", "h", "rho_n", "level", "rate", "se", "rejections", "valid", "failed",
    ])?;
    for c in &report.cells {
        w.write_record([
            c.n.to_string(),
            c.exponent.clone(),
            c.h.to_string(),
            c.rho_n.to_string(),
            c.level.to_string(),
            c.rate.to_string(),
            c.se.to_string(),
            c.rejections.to_string(),
            c.valid.to_string(),
            c.failed.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn describe(cfg: &ExperimentConfig) -> String {
    let eta = match &cfg.eta {
        crate::dgp::EtaSpec::Iid => "iid".to_string(),
        crate::dgp::EtaSpec::Ar { lambda } => format!("ar(lambda={lambda})"),
        crate::dgp::EtaSpec::Ma { lambda } => format!("ma(lambda={lambda})"),
        crate::dgp::EtaSpec::Linear { phi } => format!("linear({} weights)", phi.len()),
    };
    let mut s = format!(
        "r = {}, eta = {eta}, kappa = {}, model = {}, kernel = {}, reps = {}, seed = {}",
        cfg.r, cfg.kappa, cfg.model, cfg.kernel, cfg.reps, cfg.base_seed
    );
    if let Some(alt) = cfg.alt {
        let _ = write!(s, ", nu = {}", alt.nu);
    }
    s
}

/// Rows n, columns bandwidth exponents, one block per level.
fn render_markdown(report: &Report) -> String {
    let cfg = &report.config;
    let title = match report.kind {
        ReportKind::Size => "Size",
        ReportKind::Power => "Power",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{}\n", describe(cfg));
    for &level in &cfg.levels {
        let _ = writeln!(out, "### {title}, nominal level {}\n", level_label(level));
        let mut header = String::from("| n |");
        let mut rule = String::from("|---|");
        for p in &cfg.p_list {
            let _ = write!(header, " h = n^-{} |", p.label);
            rule.push_str("---|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for &n in &cfg.n_list {
            let mut row = format!("| {n} |");
            for p in &cfg.p_list {
                match report.cell(n, &p.label, level) {
                    Some(c) => {
                        let _ = write!(row, " {:.3} |", c.rate);
                    }
                    None => row.push_str(" - |"),
                }
            }
            let _ = writeln!(out, "{row}");
        }
        out.push('\n');
    }
    let failed = report.failed_total();
    if failed > 0 {
        let _ = writeln!(out, "Failed replications (excluded): {failed}");
    }
    if let Some(t) = report.runtime_seconds {
        let _ = writeln!(out, "Runtime: {t:.1} s");
    }
    out
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Csv => render_csv(report),
        Format::Markdown => Ok(render_markdown(report)),
    }
}

/// Write `text` to `out`, or to stdout when `out` is `None`.
pub fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn emit_report(report: &Report, format: Format, out: Option<&Path>) -> Result<()> {
    write_output(&render(report, format)?, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    fn fake() -> Report {
        let cfg = ExperimentConfig::default();
        let mut cells = Vec::new();
        for &n in &cfg.n_list {
            for p in &cfg.p_list {
                for &level in &cfg.levels {
                    cells.push(Cell::new(n, p.label.clone(), 0.1, 0.0, level, n / 10, 5000, 0));
                }
            }
        }
        Report {
            kind: ReportKind::Size,
            config: cfg,
            cells,
            runtime_seconds: Some(1.5),
        }
    }

    #[test]
    fn json_round_trip() {
        let r = fake();
        let text = render(&r, Format::Json).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn markdown_layout() {
        let text = render(&fake(), Format::Markdown).unwrap();
        assert_eq!(text.matches("### Size").count(), 2);
        let rows = text.lines().filter(|l| l.starts_with("| 1") || l.starts_with("| 2") || l.starts_with("| 5")).count();
        assert_eq!(rows, 6);
        assert!(text.contains("| n | h = n^-1/4 | h = n^-1/3 | h = n^-1/2.5 |"));
        assert!(text.contains("| 500 | 0.010 | 0.010 | 0.010 |"));
    }

    #[test]
    fn csv_rows_per_cell() {
        let text = render(&fake(), Format::Csv).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let headers = rd.headers().unwrap().clone();
        assert!(headers.iter().any(|h| h == "rate") && headers.iter().any(|h| h == "se"));
        assert_eq!(rd.records().count(), 18);
    }

    #[test]
    fn se_from_same_denominator() {
        let c = Cell::new(100, "1/3".into(), 0.2, 0.0, 0.05, 50, 1000, 3);
        assert_eq!(c.rate, 0.05);
        assert!((c.se - (0.05f64 * 0.95 / 1000.0).sqrt()).abs() < 1e-15);
        let empty = Cell::new(100, "1/3".into(), 0.2, 0.0, 0.05, 0, 0, 10);
        assert_eq!((empty.rate, empty.se), (0.0, 0.0));
    }

    #[test]
    fn format_names() {
        assert_eq!("markdown".parse::<Format>().unwrap(), Format::Markdown);
        assert!("xml".parse::<Format>().is_err());
        assert_eq!(level_label(0.05), "5%");
        assert_eq!(level_label(0.01), "1%");
    }
}
