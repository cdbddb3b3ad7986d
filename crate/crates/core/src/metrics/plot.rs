//! Sweep curves: `sweep.csv` and a line plot of AP and AF against the swept value.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::report::{escape_xml, write};

/// One point of a sweep curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub value: f64,
    pub ap: f64,
    pub af: Option<f64>,
    /// Training seconds (base training plus analytic stages).
    pub seconds: f64,
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Header `value,ap,af,training_seconds`; AF is `n/a` when undefined.
pub fn sweep_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("value,ap,af,training_seconds\n");
    for p in points {
        let af = p.af.map_or_else(|| "n/a".to_string(), |v| format!("{v:?}"));
        let _ = writeln!(
            out,
            "{},{:?},{af},{:?}",
            format_value(p.value),
            p.ap,
            p.seconds
        );
    }
    out
}

/// Line plot of AP and AF (×100) over the swept values, in the given order.
///
/// The x axis is logarithmic when every value is positive and they span at
/// least two decades.
pub fn sweep_svg(axis: &str, points: &[CurvePoint]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 64.0;
    const RIGHT: f64 = 24.0;
    const TOP: f64 = 48.0;
    const BOTTOM: f64 = 56.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;

    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.value), b.max(p.value))
        });
    let log = lo > 0.0 && hi / lo >= 100.0;
    let tx = |v: f64| if log { v.log10() } else { v };
    let (a, b) = (tx(lo), tx(hi));
    let x_of = |v: f64| {
        if points.len() < 2 || b == a {
            LEFT + plot_w / 2.0
        } else {
            LEFT + (tx(v) - a) / (b - a) * plot_w
        }
    };
    let y_of = |pct: f64| TOP + (1.0 - pct.clamp(0.0, 100.0) / 100.0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r##"<rect width="{W}" height="{H}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">Sweep over {}</text>"#,
        W / 2.0,
        escape_xml(axis)
    );
    for tick in (0..=100).step_by(20) {
        let y = y_of(tick as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{tick}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>"##
    );
    for p in points {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x_of(p.value),
            TOP + plot_h + 18.0,
            format_value(p.value)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}{}</text>"#,
        LEFT + plot_w / 2.0,
        H - 12.0,
        escape_xml(axis),
        if log { " (log scale)" } else { "" }
    );

    type Series<'a> = (&'a str, &'a str, Vec<(f64, f64)>);
    let series: [Series; 2] = [
        (
            "AP (%)",
            "#1f77b4",
            points.iter().map(|p| (p.value, p.ap * 100.0)).collect(),
        ),
        (
            "AF (%)",
            "#d62728",
            points
                .iter()
                .filter_map(|p| p.af.map(|af| (p.value, af * 100.0)))
                .collect(),
        ),
    ];
    for (i, (label, color, pts)) in series.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(v, pct)| format!("{:.1},{:.1}", x_of(v), y_of(pct)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for c in &coords {
            let (x, y) = c.split_once(',').expect("coordinate pair");
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + plot_w - 90.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{label}</text>"#,
            lx + 24.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `sweep.csv` and `sweep.svg` into `out_dir`, creating it if needed.
pub fn emit_curve(axis: &str, points: &[CurvePoint], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| crate::Error::io(out_dir, e))?;
    Ok(vec![
        write(out_dir, "sweep.csv", &sweep_csv(points))?,
        write(out_dir, "sweep.svg", &sweep_svg(axis, points))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points() -> Vec<CurvePoint> {
        [1e-4, 1e-2, 1.0, 1e2]
            .iter()
            .zip([0.7, 0.8, 0.85, 0.5])
            .map(|(&value, ap)| CurvePoint {
                value,
                ap,
                af: Some(0.05),
                seconds: 1.5,
            })
            .collect()
    }

    #[test]
    fn csv_rows() {
        let csv = sweep_csv(&points());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "value,ap,af,training_seconds");
        assert_eq!(lines[1], "0.0001,0.7,0.05,1.5");
        assert_eq!(lines[4], "100,0.5,0.05,1.5");
    }

    #[test]
    fn undefined_af_is_marked() {
        let p = CurvePoint {
            value: 2048.0,
            ap: 0.9,
            af: None,
            seconds: 0.25,
        };
        assert_eq!(sweep_csv(&[p]).lines().nth(1), Some("2048,0.9,n/a,0.25"));
        let svg = sweep_svg("feg_dim", &[p]);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn wide_ranges_use_log_axis() {
        let svg = sweep_svg("gamma", &points());
        assert!(svg.contains("(log scale)"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg, sweep_svg("gamma", &points()));
    }
}
