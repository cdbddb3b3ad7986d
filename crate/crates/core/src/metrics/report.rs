//! Report files: `report.json`, `matrix.csv` and `heatmap.svg`.
//!
//! `report.json` fields, in order:
//! - `schema_version`: integer, currently 1
//! - `sessions`: number of sessions k
//! - `ap`, `ap_percent`: average performance as a fraction and ×100 (two decimals)
//! - `af`, `af_percent`: average forgetting, or the string `"n/a"` for a single session
//! - `timings_seconds`: `base_training`, `alignment`, `incremental` (per session),
//!   `evaluation`, `training`, `total`
//! - `config`: the resolved configuration as sorted `key: "value"` pairs
//! - `matrix`: the lower-triangular rows of the performance matrix
//!
//! Every writer here is a pure function of the report, so the bytes depend
//! only on the report value.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::{average_forgetting, average_performance, PerformanceMatrix, Timings};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub ap: f64,
    /// `None` when fewer than two sessions make forgetting undefined.
    pub af: Option<f64>,
    pub timings: Timings,
    /// Resolved configuration as `(key, value)` pairs.
    pub config: Vec<(String, String)>,
    pub matrix: PerformanceMatrix,
}

impl RunReport {
    pub fn new(
        matrix: PerformanceMatrix,
        timings: Timings,
        config: Vec<(String, String)>,
    ) -> Result<Self> {
        let ap = average_performance(&matrix)?;
        let af = match average_forgetting(&matrix) {
            Ok(v) => Some(v),
            Err(Error::Undefined(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            ap,
            af,
            timings,
            config,
            matrix,
        })
    }

    pub fn to_json(&self) -> String {
        let percent = |v: f64| Value::from((v * 10_000.0).round() / 100.0);
        let na = || Value::from("n/a");
        let config: Map<String, Value> = {
            let mut pairs = self.config.clone();
            pairs.sort();
            pairs
                .into_iter()
                .map(|(k, v)| (k, Value::from(v)))
                .collect()
        };
        let doc = JsonReport {
            schema_version: REPORT_SCHEMA_VERSION,
            sessions: self.matrix.num_sessions(),
            ap: Value::from(self.ap),
            ap_percent: percent(self.ap),
            af: self.af.map_or_else(na, Value::from),
            af_percent: self.af.map_or_else(na, percent),
            timings_seconds: JsonTimings {
                base_training: self.timings.base_training,
                alignment: self.timings.alignment,
                incremental: &self.timings.incremental,
                evaluation: self.timings.evaluation,
                training: self.timings.training(),
                total: self.timings.total,
            },
            config,
            matrix: self.matrix.rows(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: u32,
    sessions: usize,
    ap: Value,
    ap_percent: Value,
    af: Value,
    af_percent: Value,
    timings_seconds: JsonTimings<'a>,
    config: Map<String, Value>,
    matrix: &'a [Vec<f64>],
}

#[derive(Serialize)]
struct JsonTimings<'a> {
    base_training: f64,
    alignment: f64,
    incremental: &'a [f64],
    evaluation: f64,
    training: f64,
    total: f64,
}

/// Header `session,task_0,...`, then one line per session with empty cells above the diagonal.
pub fn matrix_csv(m: &PerformanceMatrix) -> String {
    let k = m.num_sessions();
    let mut out = String::from("session");
    for i in 0..k {
        let _ = write!(out, ",task_{i}");
    }
    out.push('\n');
    for (s, row) in m.rows().iter().enumerate() {
        let _ = write!(out, "{s}");
        for i in 0..k {
            match row.get(i) {
                Some(v) => {
                    let _ = write!(out, ",{v:?}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`matrix_csv`].
pub fn parse_matrix_csv(text: &str) -> Result<PerformanceMatrix> {
    let bad = |line: usize, message: String| Error::Parse {
        path: PathBuf::from("matrix.csv"),
        line,
        message,
    };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "missing header".into()))?;
    let width = header.split(',').count();
    let mut m = PerformanceMatrix::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(bad(
                lineno,
                format!("expected {width} cells, got {}", cells.len()),
            ));
        }
        let row = cells[1..]
            .iter()
            .take_while(|c| !c.is_empty())
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(lineno, format!("{c:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        m.push_row(row).map_err(|e| bad(lineno, e.to_string()))?;
    }
    Ok(m)
}

// Dark to bright, sampled from the viridis ramp.
const RAMP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

/// Hex colour for `v` in `[0, 1]`.
pub(crate) fn ramp_color(v: f64) -> String {
    let t = v.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

pub(crate) fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Task-wise performance matrix heatmap; cells show accuracy ×100.
pub fn heatmap_svg(m: &PerformanceMatrix) -> String {
    const CELL: usize = 56;
    const LEFT: usize = 96;
    const TOP: usize = 56;
    let k = m.num_sessions();
    let width = LEFT + k * CELL + 24;
    let height = TOP + k * CELL + 48;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(
        s,
        r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">Task-wise performance matrix</text>"#,
        width / 2
    );
    for (row, values) in m.rows().iter().enumerate() {
        let y = TOP + row * CELL;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">Session {row}</text>"#,
            LEFT - 8,
            y + CELL / 2 + 5
        );
        for (col, &v) in values.iter().enumerate() {
            let x = LEFT + col * CELL;
            let text_fill = if v < 0.6 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                ramp_color(v)
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" fill="{text_fill}">{:.1}</text>"#,
                x + CELL / 2,
                y + CELL / 2 + 5,
                v * 100.0
            );
        }
    }
    for col in 0..k {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">Task {col}</text>"#,
            LEFT + col * CELL + CELL / 2,
            TOP + k * CELL + 20
        );
    }
    s.push_str("</svg>\n");
    s
}

pub(crate) fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `report.json`, `matrix.csv` and `heatmap.svg` into `out_dir`, creating it if needed.
pub fn emit_report(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    Ok(vec![
        write(out_dir, "report.json", &report.to_json())?,
        write(out_dir, "matrix.csv", &matrix_csv(&report.matrix))?,
        write(out_dir, "heatmap.svg", &heatmap_svg(&report.matrix))?,
    ])
}
