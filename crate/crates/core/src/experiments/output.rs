//! Artifact writers. Every file carries the resolved configuration and the
//! library version: JSON in an envelope, CSV in a leading `#` line, SVG in
//! a `<metadata>` element.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::canonical::{canonicalize_json, to_canonical_json};
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where artifacts go and the provenance stamped on each of them.
#[derive(Debug, Clone)]
pub struct ArtifactWriter {
    dir: PathBuf,
    command: String,
    config: serde_json::Value,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a serde_json::Value,
    result: &'a T,
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl ArtifactWriter {
    pub fn new(dir: &Path, command: &str, config: &impl Serialize) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut config = serde_json::to_value(config)?;
        canonicalize_json(&mut config);
        Ok(Self { dir: dir.to_path_buf(), command: command.to_string(), config })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn stamp(&self) -> String {
        format!("fourier-head {VERSION} {} config={}", self.command, self.config)
    }

    pub fn write_json(&self, name: &str, result: &impl Serialize) -> Result<PathBuf> {
        let env = Envelope { tool: "fourier-head", version: VERSION, command: &self.command, config: &self.config, result };
        let path = self.path(name);
        std::fs::write(&path, to_canonical_json(&env)? + "\n")?;
        Ok(path)
    }

    /// Writes `body` (header row included) after the provenance line.
    pub fn write_csv(&self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, format!("# {}\n{body}", self.stamp()))?;
        Ok(path)
    }

    pub fn write_svg(&self, name: &str, chart: &LineChart) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, chart.render(&self.stamp()))?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#9467bd", "#2ca02c", "#ff7f0e", "#8c564b"];

impl LineChart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn with_series(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push((name.into(), points));
        self
    }

    pub fn render(&self, metadata: &str) -> String {
        let (w, h, left, right, top, bottom) = (640.0, 400.0, 70.0, 150.0, 40.0, 50.0);
        let pts = self.series.iter().flat_map(|s| s.1.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in pts {
            x0 = x0.min(p.0);
            x1 = x1.max(p.0);
            y0 = y0.min(p.1);
            y1 = y1.max(p.1);
        }
        if !(x1 > x0) {
            x0 -= 0.5;
            x1 = x0 + 1.0;
        }
        if !(y1 > y0) {
            y0 = if y0.is_finite() { y0 - 0.5 } else { 0.0 };
            y1 = y0 + 1.0;
        }
        let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
        let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, "<metadata>{}</metadata>", escape_xml(metadata));
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape_xml(&self.title));
        let _ = writeln!(
            s,
            r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#,
            h - bottom,
            w - right,
            h - bottom,
            h - bottom
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(xv), h - bottom + 16.0, fmt_tick(xv));
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 6.0, py(yv) + 4.0, fmt_tick(yv));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (left + w - right) / 2.0, h - 12.0, escape_xml(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            escape_xml(&self.y_label)
        );
        for (i, (name, points)) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1)))
                .collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
            let ly = top + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                w - right + 10.0,
                w - right + 30.0,
                w - right + 35.0,
                ly + 4.0,
                escape_xml(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{}", (v * 1e4).round() / 1e4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_carry_provenance_and_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let w = ArtifactWriter::new(dir.path(), "demo", &serde_json::json!({"seed": 3, "x": 0.1 + 0.2})).unwrap();
        let p = w.write_json("r.json", &serde_json::json!({"v": 1.0 / 3.0})).unwrap();
        let first = std::fs::read(&p).unwrap();
        w.write_json("r.json", &serde_json::json!({"v": 1.0 / 3.0})).unwrap();
        assert_eq!(first, std::fs::read(&p).unwrap());
        let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["config"]["x"], 0.3);

        let c = w.write_csv("t.csv", "a,b\n1,2\n").unwrap();
        let text = std::fs::read_to_string(c).unwrap();
        assert!(text.starts_with("# fourier-head ") && text.contains("\"seed\":3"));

        let chart = LineChart::new("t", "x", "y").with_series("s", vec![(0.0, 1.0), (1.0, 2.0)]);
        let svg = std::fs::read_to_string(w.write_svg("c.svg", &chart).unwrap()).unwrap();
        assert!(svg.contains("<polyline") && svg.contains("<metadata>"));
    }
}
