//! Standalone SVG scatter plots of two dataset metrics.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dataset::{Label, LabeledDataset};
use crate::ingest::WarningCategory;

/// Derived metric: sum of all warning-category counts.
pub const TOTAL_ISSUES: &str = "total_issues";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlotError {
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Per-record values of a feature, or of [`TOTAL_ISSUES`].
pub fn metric_values(dataset: &LabeledDataset, name: &str) -> Result<Vec<f64>, PlotError> {
    if let Some(j) = dataset.feature_index(name) {
        return Ok(dataset.records.iter().map(|r| r.features[j]).collect());
    }
    if name == TOTAL_ISSUES {
        let cols: Vec<usize> = WarningCategory::ALL
            .iter()
            .filter_map(|c| dataset.feature_index(c.name()))
            .collect();
        if !cols.is_empty() {
            return Ok(dataset
                .records
                .iter()
                .map(|r| cols.iter().map(|&j| r.features[j]).sum())
                .collect());
        }
    }
    Err(PlotError::UnknownMetric(name.to_string()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Scatter plot with one `<circle>` per record, defect-prone records in
/// red, clean ones in blue, axes labeled with the metric names.
pub fn scatter_svg(dataset: &LabeledDataset, x_metric: &str, y_metric: &str, title: &str) -> Result<String, PlotError> {
    let xs = metric_values(dataset, x_metric)?;
    let ys = metric_values(dataset, y_metric)?;
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
    );
    for (v, anchor, x, y) in [(x0, "start", left, bottom + 16.0), (x1, "end", right, bottom + 16.0)] {
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{v}</text>"#
        );
    }
    for (v, y) in [(y0, bottom), (y1, top)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="11">{v}</text>"#,
            left - 6.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text class="x-label" x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 18.0,
        escape(x_metric)
    );
    let _ = writeln!(
        svg,
        r#"<text class="y-label" x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_metric)
    );
    for ((r, &x), &y) in dataset.records.iter().zip(&xs).zip(&ys) {
        let color = match r.label {
            Label::DefectProne => "#d62728",
            Label::Clean => "#1f77b4",
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" fill-opacity="0.6"><title>{}</title></circle>"#,
            px(x),
            py(y),
            escape(&r.file_path)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{LabeledRecord, Provenance, SourceMix};

    fn ds(n: usize) -> LabeledDataset {
        LabeledDataset::new(
            vec!["loc".into(), "Design".into(), "Usage".into()],
            (0..n)
                .map(|i| LabeledRecord {
                    file_path: format!("a/<{i}>.cs"),
                    features: vec![i as f64 * 100.0, 1.0, i as f64],
                    label: if i % 2 == 0 { Label::Clean } else { Label::DefectProne },
                })
                .collect(),
            Provenance {
                source_mix: SourceMix::Combined,
                filtered_generated: false,
            },
        )
        .unwrap()
    }

    #[test]
    fn one_marker_per_record() {
        let svg = scatter_svg(&ds(5), "loc", TOTAL_ISSUES, "t").unwrap();
        assert_eq!(svg.matches("<circle").count(), 5);
        assert!(svg.contains(">loc</text>"));
        assert!(svg.contains(">total_issues</text>"));
        assert!(svg.contains("&lt;3&gt;"));
    }

    #[test]
    fn total_issues_sums_categories() {
        assert_eq!(metric_values(&ds(3), TOTAL_ISSUES).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn unknown_metric() {
        assert_eq!(
            scatter_svg(&ds(2), "loc", "nope", "t"),
            Err(PlotError::UnknownMetric("nope".into()))
        );
    }

    #[test]
    fn empty_and_constant_data() {
        assert_eq!(
            scatter_svg(&ds(0), "loc", "Design", "t")
                .unwrap()
                .matches("<circle")
                .count(),
            0
        );
        assert!(!scatter_svg(&ds(4), "Design", "Design", "t").unwrap().contains("NaN"));
    }
}
