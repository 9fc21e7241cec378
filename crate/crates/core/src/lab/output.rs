//! Experiment artifacts: CSV tables, SVG line plots and the MANIFEST.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// A CSV table. The first line is `# config_hash=<hash>`, the second the column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values are written with Rust's shortest round-trip formatting.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut s = format!("# config_hash={config_hash}\n{}\n", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Line plot of every column against the first, one polyline per series.
pub fn svg_plot(table: &Table, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let finite = |v: &f64| v.is_finite();
    let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let ys: Vec<f64> = table
        .rows
        .iter()
        .flat_map(|r| r[1..].iter().copied())
        .filter(finite)
        .collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}">{x0:.4}</text>"#, H - PAD + 15.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{x1:.4}</text>"#,
        W - PAD,
        H - PAD + 15.0
    );
    let _ = writeln!(s, r#"<text x="5" y="{}">{y0:.4e}</text>"#, H - PAD);
    let _ = writeln!(s, r#"<text x="5" y="{}">{y1:.4e}</text>"#, PAD - 5.0);
    for (j, name) in table.columns.iter().enumerate().skip(1) {
        let color = COLORS[(j - 1) % COLORS.len()];
        let pts: Vec<String> = table
            .rows
            .iter()
            .filter(|r| r[j].is_finite())
            .map(|r| format!("{:.2},{:.2}", sx(r[0]), sy(r[j])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - PAD + 5.0,
            PAD + 15.0 * j as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 {
        let w = lo.abs().max(1.0) * 1e-9;
        return (lo - w, hi + w);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes artifacts into one directory and remembers what was written.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    config_hash: String,
    written: Vec<String>,
}

impl ArtifactWriter {
    pub fn create(dir: impl AsRef<Path>, config_hash: &str) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(ArtifactWriter {
            dir,
            config_hash: config_hash.to_string(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let csv = table.to_csv(&self.config_hash);
        self.text(name, &csv)
    }

    pub fn record(&mut self, name: &str) {
        self.written.push(name.to_string());
    }

    /// MANIFEST: status line, config hash, optional truncation note, then one file per line.
    pub fn manifest(&mut self, status: &str, note: Option<&str>) -> Result<()> {
        let mut s = format!("status={status}\nconfig_hash={}\n", self.config_hash);
        if let Some(n) = note {
            let _ = writeln!(s, "note={}", n.replace('\n', " "));
        }
        for f in &self.written {
            let _ = writeln!(s, "file={f}");
        }
        let path = self.path("MANIFEST");
        std::fs::write(&path, s).map_err(|e| Error::io(&path, e))
    }
}
