//! CSV and static SVG emission for metric reports and training histories.

use std::path::Path;

use stgan::metrics::MetricReport;

use crate::{CliError, Result};

const CHART_W: f64 = 720.0;
const CHART_H: f64 = 360.0;
const MARGIN: f64 = 48.0;

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W}\" height=\"{CHART_H}\" \
         viewBox=\"0 0 {CHART_W} {CHART_H}\" font-family=\"monospace\" font-size=\"12\">\n\
         <rect width=\"{CHART_W}\" height=\"{CHART_H}\" fill=\"white\"/>\n\
         <text x=\"{MARGIN}\" y=\"20\" font-size=\"14\">{title}</text>\n"
    )
}

fn axis_lines() -> String {
    format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = CHART_H - MARGIN,
        r = CHART_W - MARGIN / 2.0,
        t = MARGIN / 2.0
    )
}

const SERIES_COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Polyline chart; one line per named series of (x, y) points.
pub fn svg_line_chart(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut svg = svg_header(title);
    svg.push_str(&axis_lines());
    let points: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if points.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if (x1 - x0).abs() < 1e-12 {
        x1 = x0 + 1.0;
    }
    if (y1 - y0).abs() < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (CHART_W - 1.5 * MARGIN);
    let sy = |y: f64| (CHART_H - MARGIN) - (y - y0) / (y1 - y0) * (CHART_H - 1.5 * MARGIN);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let path: Vec<String> =
            pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\">{name}</text>\n",
            CHART_W - MARGIN * 2.5,
            MARGIN / 2.0 + 14.0 * (i as f64 + 1.0)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"4\" y=\"{:.2}\">{y1:.3}</text>\n<text x=\"4\" y=\"{:.2}\">{y0:.3}</text>\n",
        MARGIN / 2.0 + 10.0,
        CHART_H - MARGIN
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Bar chart over labeled values in [0, 1].
pub fn svg_bar_chart(title: &str, bars: &[(String, f64)]) -> String {
    let mut svg = svg_header(title);
    svg.push_str(&axis_lines());
    if bars.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let span = CHART_W - 1.5 * MARGIN;
    let slot = span / bars.len() as f64;
    let width = (slot * 0.6).min(60.0);
    for (i, (label, value)) in bars.iter().enumerate() {
        let x = MARGIN + slot * i as f64 + (slot - width) / 2.0;
        let h = value.clamp(0.0, 1.0) * (CHART_H - 1.5 * MARGIN);
        let y = (CHART_H - MARGIN) - h;
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{width:.2}\" height=\"{h:.2}\" fill=\"{color}\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" transform=\"rotate(35 {x:.2} {:.2})\">{label}</text>\n",
            CHART_H - MARGIN + 14.0,
            CHART_H - MARGIN + 14.0
        ));
        svg.push_str(&format!("<text x=\"{x:.2}\" y=\"{:.2}\">{value:.3}</text>\n", y - 4.0));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Parse the "model,embedding,metric,value" CSV back into a report,
/// re-validating every row.
pub fn parse_report_csv(text: &str) -> Result<MetricReport> {
    let mut report = MetricReport::default();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "model,embedding,metric,value" {
                return Err(CliError::validation(format!("bad report header {line:?}")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(CliError::validation(format!("bad report row {line:?}")));
        }
        let value: f64 = parts[3]
            .parse()
            .map_err(|_| CliError::validation(format!("bad report value {:?}", parts[3])))?;
        report.push(parts[0], parts[1], parts[2], value)?;
    }
    Ok(report)
}

/// Emit the SVG charts for a metric report (one bar chart per metric,
/// grouped over model x embedding) plus line charts for any histories.
/// Rejects an empty report.
pub fn write_report_charts(
    out_dir: &Path,
    report: &MetricReport,
    st_loss_csv: Option<&str>,
    gan_history_csv: Option<&str>,
) -> Result<()> {
    if report.rows.is_empty() {
        return Err(CliError::validation("refusing to chart an empty report"));
    }
    let mut metrics: Vec<String> = Vec::new();
    for (_, _, metric, _) in &report.rows {
        if !metrics.contains(metric) {
            metrics.push(metric.clone());
        }
    }
    let mut svg = String::new();
    for metric in &metrics {
        let bars: Vec<(String, f64)> = report
            .rows
            .iter()
            .filter(|(_, _, m, _)| m == metric)
            .map(|(model, embedding, _, v)| (format!("{model}/{embedding}"), *v))
            .collect();
        svg.push_str(&svg_bar_chart(metric, &bars));
    }
    std::fs::write(out_dir.join("report.svg"), svg)?;

    if let Some(csv) = st_loss_csv {
        let series = history_series(csv, &["train", "valid"])?;
        std::fs::write(
            out_dir.join("loss_curves.svg"),
            svg_line_chart("sentence-model loss", &series),
        )?;
    }
    if let Some(csv) = gan_history_csv {
        let series = gan_series(csv)?;
        std::fs::write(out_dir.join("gan_history.svg"), svg_line_chart("gan losses", &series))?;
    }
    Ok(())
}

/// "epoch,split,loss" rows -> one series per split.
fn history_series(csv: &str, splits: &[&str]) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    let mut series: Vec<(String, Vec<(f64, f64)>)> =
        splits.iter().map(|s| (s.to_string(), Vec::new())).collect();
    for (i, line) in csv.lines().enumerate() {
        if i == 0 || line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(CliError::validation(format!("bad loss row {line:?}")));
        }
        let epoch: f64 = parts[0].parse().map_err(|_| CliError::validation("bad epoch"))?;
        let loss: f64 = parts[2].parse().map_err(|_| CliError::validation("bad loss"))?;
        if let Some((_, points)) = series.iter_mut().find(|(name, _)| name == parts[1]) {
            points.push((epoch, loss));
        }
    }
    series.retain(|(_, p)| !p.is_empty());
    Ok(series)
}

/// "round,d_loss,g_loss,grad_norm" rows -> d/g series.
fn gan_series(csv: &str) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    let mut d = Vec::new();
    let mut g = Vec::new();
    for (i, line) in csv.lines().enumerate() {
        if i == 0 || line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(CliError::validation(format!("bad history row {line:?}")));
        }
        let round: f64 = parts[0].parse().map_err(|_| CliError::validation("bad round"))?;
        d.push((round, parts[1].parse().map_err(|_| CliError::validation("bad d_loss"))?));
        g.push((round, parts[2].parse().map_err(|_| CliError::validation("bad g_loss"))?));
    }
    Ok(vec![("d_loss".to_string(), d), ("g_loss".to_string(), g)])
}
