//! Output formatting for the CLI.
//!
//! Human-readable numbers carry 12 significant digits in degrees; the
//! machine-readable formats (json-lines, csv) carry the shortest
//! round-trippable decimals. All output ordering is deterministic.

use std::fmt;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;

use trisect::verifier::SweepReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    #[value(name = "json-lines")]
    JsonLines,
    Csv,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputFormat::Text => write!(f, "text"),
            OutputFormat::JsonLines => write!(f, "json-lines"),
            OutputFormat::Csv => write!(f, "csv"),
        }
    }
}

/// 12 significant digits, trailing zeros trimmed; plain decimal notation.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).clamp(0, 17) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Writes to the path when given, stdout otherwise.
pub fn write_out(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())
        }
    }
}

pub fn render_sweep(report: &SweepReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => sweep_text(report),
        OutputFormat::JsonLines => sweep_json_lines(report),
        OutputFormat::Csv => sweep_csv(report),
    }
}

fn sweep_text(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "sweep {} on {} grid [{}, {}] step {}{}\n",
        report.method,
        report.backend_name,
        fmt_sig(report.grid.start_deg),
        fmt_sig(report.grid.stop_deg),
        fmt_sig(report.grid.step_deg),
        if report.exterior { " (exterior)" } else { "" },
    ));
    let id_width = report
        .summaries
        .iter()
        .map(|s| s.claim_id.len())
        .max()
        .unwrap_or(8)
        .max(8);
    out.push_str(&format!(
        "{:<id_width$}  {:>6} {:>6} {:>6}  {:>13}  statement\n",
        "claim", "eval", "pass", "fail", "max|residual|"
    ));
    for s in &report.summaries {
        out.push_str(&format!(
            "{:<id_width$}  {:>6} {:>6} {:>6}  {:>13.4e}  {}\n",
            s.claim_id, s.evaluated, s.passed, s.failed, s.max_abs_residual, s.statement
        ));
    }
    if !report.excluded.is_empty() {
        out.push_str("excluded (degenerate construction):\n");
        for (theta, why) in &report.excluded {
            out.push_str(&format!("  theta={}: {}\n", fmt_sig(*theta), why));
        }
    }
    if report.fixed_points.is_empty() {
        out.push_str("fixed points: none\n");
    } else {
        let pts: Vec<String> = report.fixed_points.iter().map(|t| fmt_sig(*t)).collect();
        out.push_str(&format!("fixed points: {}\n", pts.join(", ")));
    }
    out.push_str(if report.all_pass {
        "result: PASS\n"
    } else {
        "result: FAIL\n"
    });
    out
}

fn sweep_json_lines(report: &SweepReport) -> String {
    let mut out = String::new();
    for r in &report.results {
        out.push_str(&format!(
            "{{\"method\":\"{}\",\"theta_deg\":{},\"claim_id\":\"{}\",\"residual_deg\":{},\"pass\":{}}}\n",
            r.method, r.theta_deg, r.claim_id, r.residual_deg, r.pass
        ));
    }
    out
}

fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("method,theta_deg,claim_id,residual_deg,pass\n");
    for r in &report.results {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.method, r.theta_deg, r.claim_id, r.residual_deg, r.pass
        ));
    }
    out
}
