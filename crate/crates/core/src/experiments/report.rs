//! Study reports and their CSV, JSON and SVG renderings.

use super::config::{ExperimentConfig, StudyKind, Tolerances};
use crate::error::Result;
use crate::stats::LinearFit;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Version of the JSON summary layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// A named check with the measured value and the threshold it was held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub verdict: Verdict,
    pub detail: String,
}

/// Rows of preformatted cells under a fixed header.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(std::io::Error::from)?;
        for r in &self.rows {
            w.write_record(r).map_err(std::io::Error::from)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// One line of an SVG chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema: u32,
    pub study: StudyKind,
    pub version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub tolerances: Tolerances,
    pub flags: BTreeMap<String, Flag>,
    pub fits: BTreeMap<String, LinearFit>,
    pub summary: BTreeMap<String, f64>,
    #[serde(skip)]
    pub table: Table,
    #[serde(skip)]
    pub series: Vec<Series>,
    #[serde(skip)]
    pub chart: ChartLabels,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChartLabels {
    pub x: String,
    pub y: String,
    pub note: String,
}

impl StudyReport {
    pub fn new(config: &ExperimentConfig, table: Table) -> StudyReport {
        let mut echoed = config.clone();
        echoed.out = PathBuf::new();
        echoed.cache = None;
        echoed.serial = false;
        StudyReport {
            schema: SCHEMA_VERSION,
            study: config.study,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            config: echoed,
            tolerances: config.tolerances.clone(),
            flags: BTreeMap::new(),
            fits: BTreeMap::new(),
            summary: BTreeMap::new(),
            table,
            series: Vec::new(),
            chart: ChartLabels::default(),
        }
    }

    pub fn flag(&mut self, name: &str, verdict: Verdict, detail: String) {
        self.flags.insert(name.to_string(), Flag { verdict, detail });
    }

    /// Pass only when every flag passes.
    pub fn passed(&self) -> bool {
        self.flags.values().all(|f| f.verdict == Verdict::Pass)
    }

    /// File stem shared by all outputs: study kind plus a config-hash prefix.
    pub fn stem(&self) -> String {
        format!("{}-{}", self.study, &self.config_hash[..12])
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(std::io::Error::from)?;
        s.push('\n');
        Ok(s)
    }
}

/// Run information kept out of the reproducible outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub config_hash: String,
    pub unix_time: u64,
    pub elapsed_seconds: f64,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub serial: bool,
}

/// Paths written by [`emit_report`].
#[derive(Clone, Debug)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: PathBuf,
    pub meta: PathBuf,
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes `<stem>.csv`, `<stem>.json`, `<stem>.svg` and `<stem>.meta.json` into `outdir`.
pub fn emit_report(report: &StudyReport, meta: &RunMeta, outdir: &Path) -> Result<EmittedFiles> {
    std::fs::create_dir_all(outdir)?;
    let stem = report.stem();
    let files = EmittedFiles {
        csv: outdir.join(format!("{stem}.csv")),
        json: outdir.join(format!("{stem}.json")),
        svg: outdir.join(format!("{stem}.svg")),
        meta: outdir.join(format!("{stem}.meta.json")),
    };
    write_atomic(&files.csv, &report.table.to_csv()?)?;
    write_atomic(&files.json, &report.to_json()?)?;
    write_atomic(&files.svg, &render_svg(report))?;
    write_atomic(&files.meta, &(serde_json::to_string_pretty(meta).map_err(std::io::Error::from)? + "\n"))?;
    Ok(files)
}

/// Formats a float for tables: shortest round-trip decimal, `nan` for missing values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Log-log line chart of every series; an empty chart when nothing is plottable.
pub fn render_svg(report: &StudyReport) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 70.0, 170.0, 30.0, 50.0);
    let pts: Vec<(f64, f64)> = report
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{left}" y="18">{} ({})</text>"#, report.study, &report.config_hash[..12]);
    if pts.is_empty() {
        let _ = writeln!(out, r#"<text x="{left}" y="{}">no data</text>"#, h / 2.0);
        out.push_str("</svg>\n");
        return out;
    }
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = span(&mut pts.iter().map(|p| p.1));
    let (pw, ph) = (w - left - right, h - top - bottom);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;
    let _ = writeln!(out, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in (x0.floor() as i32)..=(x1.ceil() as i32) {
        for m in 1..10 {
            let v = k as f64 + (m as f64).log10();
            if v < x0 || v > x1 {
                continue;
            }
            let x = sx(v);
            let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, top + ph, top + ph + 4.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, top + ph + 18.0, trim(10f64.powf(v)));
        }
    }
    for k in (y0.floor() as i32)..=(y1.ceil() as i32) {
        let v = k as f64;
        if v < y0 || v > y1 {
            continue;
        }
        let y = sy(v);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/>"#, left - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{k}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 10.0, report.chart.x);
    let _ = writeln!(out, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#, top + ph / 2.0, top + ph / 2.0, report.chart.y);
    for (i, s) in report.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", sx(x.log10()), sy(y.log10())))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
            for p in &path {
                let (x, y) = p.split_once(',').expect("formatted pair");
                let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#);
            }
        }
        let ly = top + 14.0 + 16.0 * i as f64;
        let _ = writeln!(out, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - right + 10.0, w - right + 28.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, w - right + 32.0, ly + 4.0, escape(&s.name));
    }
    if !report.chart.note.is_empty() {
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, left + 8.0, top + 16.0, escape(&report.chart.note));
    }
    out.push_str("</svg>\n");
    out
}

fn trim(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format!("{r}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::BundleConfig;
    use crate::manifold::ManifoldKind;

    fn empty() -> StudyReport {
        let c = ExperimentConfig::new(StudyKind::Dimension, ManifoldKind::P1, vec![BundleConfig { degree: vec![1], h: crate::bundle::MetricDescriptor::FubiniStudy, g: None }], vec![4]);
        StudyReport::new(&c, Table::new(&["p", "dim", "d_p", "ratio"]))
    }

    #[test]
    fn empty_report_has_header_only() {
        let r = empty();
        assert_eq!(r.table.to_csv().unwrap(), "p,dim,d_p,ratio\n");
        assert!(render_svg(&r).contains("no data"));
        let dir = tempfile::tempdir().unwrap();
        let meta = RunMeta { config_hash: r.config_hash.clone(), unix_time: 0, elapsed_seconds: 0.0, cache_hits: 0, cache_misses: 0, serial: true };
        let files = emit_report(&r, &meta, dir.path()).unwrap();
        assert!(files.csv.file_name().unwrap().to_str().unwrap().starts_with("dimension-"));
        let back: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(files.json).unwrap()).unwrap();
        assert_eq!(back["schema"], SCHEMA_VERSION);
        assert_eq!(back["config_hash"], r.config_hash);
    }

    #[test]
    fn chart_has_one_line_per_series() {
        let mut r = empty();
        r.series = vec![
            Series { name: "a".into(), points: vec![(8.0, 0.1), (16.0, 0.05)] },
            Series { name: "b<c".into(), points: vec![(8.0, 0.2), (16.0, 0.1), (32.0, 0.0)] },
        ];
        let svg = render_svg(&r);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
    }
}
