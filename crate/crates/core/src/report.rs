//! Output formats: JSON for full fidelity, flat CSV for spreadsheets, and a
//! static SVG bar chart of brisk per detector.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::audit::{BiasReportSet, DetectorReport, EntryStatus, StrategyComparison, SweepResult};
use crate::error::{Error, Result};
use crate::stats::CorrelationMatrix;

pub const REPORT_CSV_HEADER: &str = "detector,dataset,attribute,baseline,status,brisk,brisk_star,brisk_star_threshold,eod,t_statistic,df,p_value,significant,subgroups_used,subgroups_skipped";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn status_name(status: &EntryStatus) -> &'static str {
    match status {
        EntryStatus::Ok => "ok",
        EntryStatus::NotMeasurable { .. } => "not_measurable",
        EntryStatus::SkipLimitExceeded { .. } => "skip_limit_exceeded",
    }
}

/// One row per detector × attribute.
pub fn report_csv(set: &BiasReportSet) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for d in &set.detectors {
        for e in &d.entries {
            let b = e.bias.as_ref();
            let t = e.ttest.as_ref();
            let threshold = b.map(|b| b.brisk_star(set.metadata.config.brisk_star_mode).threshold);
            let fields = [
                csv_field(&d.detector),
                csv_field(&d.dataset),
                csv_field(&e.attribute),
                csv_field(&e.baseline),
                status_name(&e.status).to_string(),
                opt(b.map(|b| b.brisk)),
                opt(e.brisk_star),
                opt(threshold),
                opt(b.map(|b| b.eod)),
                opt(t.map(|t| t.t_statistic)),
                opt(t.map(|t| t.degrees_of_freedom)),
                opt(t.map(|t| t.p_value)),
                e.significant.to_string(),
                b.map_or_else(String::new, |b| b.subgroups_used.to_string()),
                b.map_or_else(String::new, |b| b.subgroups_skipped.to_string()),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const LABEL_WIDTH: f64 = 260.0;
const PLOT_WIDTH: f64 = 480.0;
const BAR_HEIGHT: f64 = 16.0;
const ROW_HEIGHT: f64 = 22.0;
const TOP: f64 = 40.0;

/// Horizontal signed bar chart centred on a zero axis. The pixels-per-unit
/// factor is recorded in the root `data-scale` attribute and the caption.
pub fn bar_chart_svg(title: &str, bars: &[(String, f64)]) -> String {
    let max_abs = bars
        .iter()
        .map(|(_, v)| v.abs())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let scale = if max_abs > 0.0 { PLOT_WIDTH / 2.0 / max_abs } else { 1.0 };
    let width = LABEL_WIDTH + PLOT_WIDTH + 20.0;
    let height = TOP + ROW_HEIGHT * bars.len() as f64 + 40.0;
    let zero_x = LABEL_WIDTH + PLOT_WIDTH / 2.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" data-scale="{scale}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="10" y="22" font-family="sans-serif" font-size="14">{}</text>"#,
        xml_escape(title)
    );
    for (i, (name, value)) in bars.iter().enumerate() {
        let y = TOP + ROW_HEIGHT * i as f64;
        let v = if value.is_finite() { *value } else { 0.0 };
        let w = v.abs() * scale;
        let x = if v >= 0.0 { zero_x } else { zero_x - w };
        let fill = if v >= 0.0 { "#c0392b" } else { "#2471a3" };
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            LABEL_WIDTH - 8.0,
            y + BAR_HEIGHT - 4.0,
            xml_escape(name)
        );
        let _ = writeln!(
            s,
            r#"<rect class="bar" x="{x:.3}" y="{y:.1}" width="{w:.3}" height="{BAR_HEIGHT}" fill="{fill}" data-value="{value}"/>"#
        );
    }
    let axis_bottom = TOP + ROW_HEIGHT * bars.len() as f64;
    let _ = writeln!(
        s,
        r#"<line class="zero-axis" x1="{zero_x}" y1="{:.1}" x2="{zero_x}" y2="{axis_bottom:.1}" stroke="black" stroke-width="1"/>"#,
        TOP - 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{zero_x}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">scale: {scale} px per unit; full half-width = {max_abs}</text>"#,
        axis_bottom + 20.0
    );
    s.push_str("</svg>\n");
    s
}

/// Chart of brisk per attribute for one detector.
pub fn detector_chart(report: &DetectorReport) -> Option<String> {
    let bars: Vec<(String, f64)> = report
        .entries
        .iter()
        .filter_map(|e| e.bias.as_ref().map(|b| (e.attribute.clone(), b.brisk)))
        .collect();
    if bars.is_empty() {
        return None;
    }
    let title = format!("brisk: {} on {}", report.detector, report.dataset);
    Some(bar_chart_svg(&title, &bars))
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes `report.json`, `report.csv` and one `brisk_<detector>.svg` per
/// detector with measured attributes. Returns the paths written.
pub fn write_report_set(dir: &Path, set: &BiasReportSet) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let json = dir.join("report.json");
    write_file(&json, &to_json(set)?)?;
    written.push(json);
    let csv = dir.join("report.csv");
    write_file(&csv, &report_csv(set))?;
    written.push(csv);
    for (i, d) in set.detectors.iter().enumerate() {
        if let Some(svg) = detector_chart(d) {
            let path = dir.join(format!("brisk_{i:02}_{}.svg", slug(&d.detector)));
            write_file(&path, &svg)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Reads every `report.json` directly under `dir` or in its immediate
/// subdirectories, in path order.
pub fn read_report_sets(dir: &Path) -> Result<Vec<BiasReportSet>> {
    let mut paths = Vec::new();
    let direct = dir.join("report.json");
    if direct.is_file() {
        paths.push(direct);
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    paths.extend(subdirs.into_iter().map(|d| d.join("report.json")).filter(|p| p.is_file()));
    if paths.is_empty() {
        return Err(Error::File {
            path: dir.to_path_buf(),
            message: "no report.json found".into(),
        });
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::File {
                path: p.clone(),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn matrix_csv(m: &CorrelationMatrix) -> String {
    let mut out = String::from("detector");
    for n in &m.names {
        out.push(',');
        out.push_str(&csv_field(n));
    }
    out.push('\n');
    for (n, row) in m.names.iter().zip(&m.values) {
        out.push_str(&csv_field(n));
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("fraction,mean_abs_eod,std_abs_eod,successful_repetitions,failed_repetitions,excluded_attributes\n");
    for p in &sweep.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.fraction,
            p.mean,
            p.std,
            p.values.len(),
            p.failed_repetitions,
            p.excluded_attributes
        );
    }
    out
}

pub fn strategy_csv(rows: &[StrategyComparison]) -> String {
    let mut out = String::from("attribute,classical_t,classical_df,classical_p,paired_t,paired_df,paired_p,gap\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_field(&r.attribute),
            r.classical.t_statistic,
            r.classical.degrees_of_freedom,
            r.classical.p_value,
            r.paired.t_statistic,
            r.paired.degrees_of_freedom,
            r.paired.p_value,
            r.gap
        );
    }
    out
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`.
pub fn write_pair<T: Serialize>(dir: &Path, stem: &str, value: &T, csv: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = dir.join(format!("{stem}.json"));
    write_file(&json, &to_json(value)?)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    write_file(&csv_path, csv)?;
    Ok(vec![json, csv_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_structure() {
        let bars = vec![
            ("a<b".to_string(), 0.2),
            ("c&d".to_string(), -0.1),
            ("e".to_string(), 0.0),
        ];
        let svg = bar_chart_svg("t", &bars);
        assert_eq!(svg.matches(r#"class="bar""#).count(), 3);
        assert_eq!(svg.matches(r#"class="zero-axis""#).count(), 1);
        assert!(svg.contains("a&lt;b") && svg.contains("c&amp;d"));
        assert!(!svg.contains("<script"));
        // 0.2 spans half the plot width
        assert!(svg.contains(r#"data-scale="1200""#));
        assert!(svg.contains(r#"width="240.000""#) && svg.contains(r#"width="120.000""#));
    }

    #[test]
    fn csv_quotes_awkward_fields() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
