//! Accuracy tables and SVG charts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::probe::ProbeResults;
use crate::tasks::TaskKind;

pub const MISSING_CELL: &str = "-";

/// Which layer's accuracy fills a table cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellPolicy {
    #[default]
    BestLayer,
    LastLayer,
}

impl CellPolicy {
    pub fn name(self) -> &'static str {
        match self {
            CellPolicy::BestLayer => "best-layer",
            CellPolicy::LastLayer => "last-layer",
        }
    }
}

impl FromStr for CellPolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "best-layer" => Ok(CellPolicy::BestLayer),
            "last-layer" => Ok(CellPolicy::LastLayer),
            _ => Err(format!("unknown cell policy {s:?} (expected best-layer or last-layer)")),
        }
    }
}

/// A rendered accuracy table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub markdown: String,
    pub csv: String,
}

/// The cell value for one run and task: test accuracy at the largest train
/// size, taken from the best or the last layer.
pub fn table_cell(results: &ProbeResults, task: TaskKind, policy: CellPolicy) -> Option<f64> {
    let size = *results.sizes(task).last()?;
    let curve = results.layer_curve(task, size);
    match policy {
        CellPolicy::BestLayer => curve.iter().map(|p| p.1).reduce(f64::max),
        CellPolicy::LastLayer => curve.last().map(|p| p.1),
    }
}

pub fn format_cell(accuracy: Option<f64>) -> String {
    match accuracy {
        Some(a) => format!("{:.2}", a * 100.0),
        None => MISSING_CELL.to_string(),
    }
}

pub fn emit_table(runs: &[ProbeResults], labels: &[String], policy: CellPolicy) -> Result<Table> {
    if runs.len() != labels.len() {
        return Err(Error::Report(format!(
            "{} result sets but {} labels",
            runs.len(),
            labels.len()
        )));
    }
    let mut rows: Vec<(String, Vec<String>)> = vec![(
        "Naive".to_string(),
        TaskKind::ALL.iter().map(|t| format_cell(Some(t.naive_baseline()))).collect(),
    )];
    for (run, label) in runs.iter().zip(labels) {
        rows.push((
            label.clone(),
            TaskKind::ALL.iter().map(|&t| format_cell(table_cell(run, t, policy))).collect(),
        ));
    }

    let mut md = String::from("| Model | LEN | AST | CPX | TYP |\n|---|---:|---:|---:|---:|\n");
    let mut csv = String::from("model,LEN,AST,CPX,TYP\n");
    for (label, cells) in &rows {
        let _ = writeln!(md, "| {} | {} |", label, cells.join(" | "));
        let _ = writeln!(csv, "{},{}", csv_field(label), cells.join(","));
    }
    let _ = write!(
        md,
        "\nTest accuracy (%) at the largest train size; cell policy: {}.\n",
        policy.name()
    );
    Ok(Table { markdown: md, csv })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ---- charts -------------------------------------------------------------------

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// A named sequence of (layer, accuracy) points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(usize, f64)>,
}

/// A line chart with layers on the x axis and accuracy in [0, 1] on the y
/// axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub series: Vec<Series>,
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let max_layer = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .max()
            .unwrap_or(0)
            .max(1);
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let x = |layer: usize| LEFT + plot_w * layer as f64 / max_layer as f64;
        let y = |acc: f64| TOP + plot_h * (1.0 - acc);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(&self.title)
        );

        for i in 0..=4 {
            let acc = i as f64 / 4.0;
            let yy = y(acc);
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#dddddd"/>"##,
                LEFT + plot_w
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{acc:.2}</text>"#,
                LEFT - 6.0,
                yy + 4.0
            );
        }
        for layer in 0..=max_layer {
            let xx = x(layer);
            let _ = writeln!(
                svg,
                r#"<line x1="{xx:.2}" y1="{:.2}" x2="{xx:.2}" y2="{:.2}" stroke="black"/>"#,
                TOP + plot_h,
                TOP + plot_h + 4.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{xx:.2}" y="{:.2}" text-anchor="middle">{layer}</text>"#,
                TOP + plot_h + 18.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{LEFT:.2},{TOP:.2} {LEFT:.2},{:.2} {:.2},{:.2}" fill="none" stroke="black"/>"#,
            TOP + plot_h,
            LEFT + plot_w,
            TOP + plot_h
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Layer</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 10.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">Accuracy</text>"#,
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0
        );

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let points: Vec<String> =
                s.points.iter().map(|&(l, a)| format!("{:.2},{:.2}", x(l), y(a))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                points.join(" ")
            );
            let ly = TOP + 10.0 + 20.0 * i as f64;
            let lx = WIDTH - RIGHT + 15.0;
            let _ = writeln!(
                svg,
                r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Accuracy by layer for one task, one series per run (largest train size of
/// each run).
pub fn layer_chart(runs: &[ProbeResults], labels: &[String], task: TaskKind) -> Result<Chart> {
    let mut series = Vec::new();
    for (run, label) in runs.iter().zip(labels) {
        if let Some(&size) = run.sizes(task).last() {
            series.push(Series { label: label.clone(), points: run.layer_curve(task, size) });
        }
    }
    if series.is_empty() {
        return Err(Error::Report(format!("no {task} results to plot")));
    }
    if series.iter().all(|s| s.points.len() < 2) {
        return Err(Error::Report(format!("{task}: a layer plot needs at least two layers")));
    }
    Ok(Chart { title: format!("{task}: accuracy by layer"), series })
}

pub fn emit_layer_plot(runs: &[ProbeResults], labels: &[String], task: TaskKind) -> Result<String> {
    Ok(layer_chart(runs, labels, task)?.to_svg())
}

/// Accuracy by layer for one task, one series per train size.
pub fn curve_chart(results: &ProbeResults, task: TaskKind) -> Result<Chart> {
    let sizes = results.sizes(task);
    if sizes.is_empty() {
        return Err(Error::Report(format!("no {task} results to plot")));
    }
    if sizes.len() == 1 {
        warn!("{task}: only one train size ({}); the sample-size plot has a single series", sizes[0]);
    }
    let series = sizes
        .iter()
        .map(|&n| Series { label: format!("n={n}"), points: results.layer_curve(task, n) })
        .collect();
    Ok(Chart { title: format!("{task}: accuracy by sample size"), series })
}

pub fn emit_curve_plot(results: &ProbeResults, task: TaskKind) -> Result<String> {
    Ok(curve_chart(results, task)?.to_svg())
}

/// Write `table.md`, `table.csv` and the per-task charts into `out_dir`.
/// Sample-size charts use the first run that has results for the task.
/// Returns the written paths in order.
pub fn write_report(
    out_dir: &Path,
    runs: &[ProbeResults],
    labels: &[String],
    policy: CellPolicy,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let table = emit_table(runs, labels, policy)?;
    let mut written = Vec::new();
    let mut put = |name: String, content: &str| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    put("table.md".into(), &table.markdown)?;
    put("table.csv".into(), &table.csv)?;
    for task in TaskKind::ALL {
        let lower = task.name().to_ascii_lowercase();
        if runs.iter().any(|r| r.layer_curve(task, r.sizes(task).last().copied().unwrap_or(0)).len() >= 2) {
            put(format!("layers_{lower}.svg"), &emit_layer_plot(runs, labels, task)?)?;
        }
        if let Some(run) = runs.iter().find(|r| r.for_task(task).next().is_some()) {
            put(format!("curves_{lower}.svg"), &emit_curve_plot(run, task)?)?;
        }
    }
    Ok(written)
}
