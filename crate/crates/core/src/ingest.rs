//! Parsers for the three pipeline inputs: per-file metrics (CSV), per-class
//! warning counts (XML) and the change log (JSON Lines).
//!
//! All parsers are pure functions over the input text. Each has a matching
//! writer that emits the same normalized format, so records can be
//! round-tripped.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the mandatory path column in the file-metrics CSV.
pub const PATH_COLUMN: &str = "file_path";
/// Name of the mandatory lines-of-code metric.
pub const LOC_METRIC: &str = "loc";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("missing mandatory column `{column}`")]
    MissingColumn { column: String },
    #[error("line {line}: duplicate column `{column}`")]
    DuplicateColumn { line: u64, column: String },
    #[error("line {line}: value `{value}` in column `{column}` is not a finite number")]
    NonNumericValue { line: u64, column: String, value: String },
    #[error("line {line}: loc value `{value}` is not a nonnegative integer")]
    InvalidLoc { line: u64, value: String },
    #[error("line {line}: empty file path")]
    EmptyPath { line: u64 },
    #[error("line {line}: duplicate file `{path}`")]
    DuplicateFile { line: u64, path: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("line {line}: unknown warning category `{category}`")]
    UnknownCategory { line: u32, category: String },
    #[error("line {line}: negative issue count `{count}`")]
    NegativeCount { line: u32, count: String },
    #[error("line {line}: duplicate class `{class_name}` in `{path}`")]
    DuplicateClass {
        line: u32,
        path: String,
        class_name: String,
    },
    #[error("malformed warnings document (line {line}): {reason}")]
    MalformedDocument { line: u32, reason: String },
    #[error("line {line}: malformed change record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("csv: {0}")]
    Csv(String),
}

/// Normalizes a source path: forward slashes, no empty or `.` segments,
/// no whitespace around segments. Case is preserved.
pub fn normalize_path(raw: &str) -> String {
    raw.split(['/', '\\'])
        .map(str::trim)
        .filter(|seg| !seg.is_empty() && *seg != ".")
        .collect::<Vec<_>>()
        .join("/")
}

/// Comparison key for paths. Matching across inputs is case-insensitive.
pub fn path_key(raw: &str) -> String {
    normalize_path(raw).to_lowercase()
}

/// The closed set of warning categories reported by the static analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WarningCategory {
    Design,
    Globalization,
    Interoperability,
    Maintainability,
    Mobility,
    Naming,
    Performance,
    Portability,
    Reliability,
    Security,
    Usage,
}

impl WarningCategory {
    pub const COUNT: usize = 11;

    pub const ALL: [WarningCategory; Self::COUNT] = [
        Self::Design,
        Self::Globalization,
        Self::Interoperability,
        Self::Maintainability,
        Self::Mobility,
        Self::Naming,
        Self::Performance,
        Self::Portability,
        Self::Reliability,
        Self::Security,
        Self::Usage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Design => "Design",
            Self::Globalization => "Globalization",
            Self::Interoperability => "Interoperability",
            Self::Maintainability => "Maintainability",
            Self::Mobility => "Mobility",
            Self::Naming => "Naming",
            Self::Performance => "Performance",
            Self::Portability => "Portability",
            Self::Reliability => "Reliability",
            Self::Security => "Security",
            Self::Usage => "Usage",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for WarningCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WarningCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| s.to_string())
    }
}

/// Issue counts for each warning category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts(pub [u64; WarningCategory::COUNT]);

impl CategoryCounts {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn add(&mut self, other: &CategoryCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (WarningCategory, u64)> + '_ {
        WarningCategory::ALL.iter().map(|&c| (c, self.0[c.index()]))
    }
}

impl Index<WarningCategory> for CategoryCounts {
    type Output = u64;

    fn index(&self, c: WarningCategory) -> &u64 {
        &self.0[c.index()]
    }
}

impl IndexMut<WarningCategory> for CategoryCounts {
    fn index_mut(&mut self, c: WarningCategory) -> &mut u64 {
        &mut self.0[c.index()]
    }
}

/// One source file's metric vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileMetricRecord {
    pub file_path: String,
    /// Metrics in header order; always contains `loc`.
    pub metrics: Vec<(String, f64)>,
    pub loc: u64,
}

impl FileMetricRecord {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn metric_names(&self) -> impl Iterator<Item = &str> {
        self.metrics.iter().map(|(n, _)| n.as_str())
    }
}

/// Warning counts for one class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassWarningRecord {
    pub file_path: String,
    pub class_name: String,
    pub counts: CategoryCounts,
}

/// One check-in from the change log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub change_id: String,
    pub message: String,
    pub files: Vec<String>,
}

fn csv_err(e: csv::Error) -> IngestError {
    IngestError::Csv(e.to_string())
}

/// Parses the per-file metrics CSV.
pub fn parse_file_metrics(text: &str) -> Result<Vec<FileMetricRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows = reader.records();
    let header = match rows.next() {
        Some(h) => h.map_err(csv_err)?,
        None => {
            return Err(IngestError::MissingColumn {
                column: PATH_COLUMN.to_string(),
            })
        }
    };
    let header_line = header.position().map_or(1, |p| p.line());
    let columns: Vec<String> = header.iter().map(str::to_string).collect();
    let mut seen = HashSet::new();
    for c in &columns {
        if !seen.insert(c.as_str()) {
            return Err(IngestError::DuplicateColumn {
                line: header_line,
                column: c.clone(),
            });
        }
    }
    let path_idx = columns
        .iter()
        .position(|c| c == PATH_COLUMN)
        .ok_or_else(|| IngestError::MissingColumn {
            column: PATH_COLUMN.to_string(),
        })?;
    if !columns.iter().any(|c| c == LOC_METRIC) {
        return Err(IngestError::MissingColumn {
            column: LOC_METRIC.to_string(),
        });
    }

    let mut records = Vec::new();
    let mut keys = HashSet::new();
    for row in rows {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row.get(0) == Some("") {
            continue;
        }
        if row.len() != columns.len() {
            return Err(IngestError::RaggedRow {
                line,
                expected: columns.len(),
                found: row.len(),
            });
        }
        let file_path = normalize_path(&row[path_idx]);
        if file_path.is_empty() {
            return Err(IngestError::EmptyPath { line });
        }
        if !keys.insert(path_key(&file_path)) {
            return Err(IngestError::DuplicateFile { line, path: file_path });
        }
        let mut metrics = Vec::with_capacity(columns.len() - 1);
        let mut loc = 0;
        for (i, (name, cell)) in columns.iter().zip(row.iter()).enumerate() {
            if i == path_idx {
                continue;
            }
            let value: f64 =
                cell.parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| IngestError::NonNumericValue {
                        line,
                        column: name.clone(),
                        value: cell.to_string(),
                    })?;
            if name == LOC_METRIC {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(IngestError::InvalidLoc {
                        line,
                        value: cell.to_string(),
                    });
                }
                loc = value as u64;
            }
            metrics.push((name.clone(), value));
        }
        records.push(FileMetricRecord {
            file_path,
            metrics,
            loc,
        });
    }
    Ok(records)
}

/// Writes records in the file-metrics CSV format. All records must share
/// the metric-name list of the first one.
pub fn write_file_metrics_csv(records: &[FileMetricRecord]) -> String {
    let mut out = String::from(PATH_COLUMN);
    match records.first() {
        Some(first) => {
            for name in first.metric_names() {
                out.push(',');
                out.push_str(name);
            }
        }
        None => {
            out.push(',');
            out.push_str(LOC_METRIC);
        }
    }
    out.push('\n');
    for r in records {
        out.push_str(&r.file_path);
        for (_, v) in &r.metrics {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

fn malformed(node: &roxmltree::Node, doc: &roxmltree::Document, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedDocument {
        line: doc.text_pos_at(node.range().start).row,
        reason: reason.into(),
    }
}

fn required_attr<'a>(
    node: &roxmltree::Node<'a, 'a>,
    doc: &roxmltree::Document,
    name: &str,
) -> Result<&'a str, IngestError> {
    node.attribute(name).ok_or_else(|| {
        malformed(
            node,
            doc,
            format!("<{}> lacks attribute `{name}`", node.tag_name().name()),
        )
    })
}

fn element_children<'a, 'input>(
    node: roxmltree::Node<'a, 'input>,
    doc: &roxmltree::Document,
    expected: &str,
) -> Result<Vec<roxmltree::Node<'a, 'input>>, IngestError> {
    let mut out = Vec::new();
    for child in node.children() {
        if child.is_element() {
            if child.tag_name().name() != expected {
                return Err(malformed(
                    &child,
                    doc,
                    format!(
                        "unexpected <{}> inside <{}>, expected <{expected}>",
                        child.tag_name().name(),
                        node.tag_name().name()
                    ),
                ));
            }
            out.push(child);
        } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
            return Err(malformed(&child, doc, "unexpected text content"));
        }
    }
    Ok(out)
}

/// Parses the per-class warnings XML:
/// `<Targets><Target Name=".."><Class Name=".."><Issue Category=".." Count=".."/>`.
///
/// Repeated `Issue` elements for one category are summed.
pub fn parse_class_warnings(text: &str) -> Result<Vec<ClassWarningRecord>, IngestError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| IngestError::MalformedDocument {
        line: e.pos().row,
        reason: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "Targets" {
        return Err(malformed(&root, &doc, "root element must be <Targets>"));
    }

    let mut records = Vec::new();
    let mut seen: HashMap<(String, String), ()> = HashMap::new();
    for target in element_children(root, &doc, "Target")? {
        let file_path = normalize_path(required_attr(&target, &doc, "Name")?);
        if file_path.is_empty() {
            return Err(malformed(&target, &doc, "empty target name"));
        }
        for class in element_children(target, &doc, "Class")? {
            let class_name = required_attr(&class, &doc, "Name")?.trim().to_string();
            if seen.insert((path_key(&file_path), class_name.clone()), ()).is_some() {
                return Err(IngestError::DuplicateClass {
                    line: line_of(&doc, &class),
                    path: file_path,
                    class_name,
                });
            }
            let mut counts = CategoryCounts::default();
            for issue in element_children(class, &doc, "Issue")? {
                let cat_raw = required_attr(&issue, &doc, "Category")?;
                let category: WarningCategory = cat_raw.parse().map_err(|c| IngestError::UnknownCategory {
                    line: line_of(&doc, &issue),
                    category: c,
                })?;
                let count_raw = required_attr(&issue, &doc, "Count")?.trim();
                let count = parse_count(count_raw).ok_or_else(|| {
                    if count_raw.starts_with('-') && parse_count(&count_raw[1..]).is_some() {
                        IngestError::NegativeCount {
                            line: line_of(&doc, &issue),
                            count: count_raw.to_string(),
                        }
                    } else {
                        malformed(&issue, &doc, format!("invalid count `{count_raw}`"))
                    }
                })?;
                counts[category] += count;
            }
            records.push(ClassWarningRecord {
                file_path: file_path.clone(),
                class_name,
                counts,
            });
        }
    }
    Ok(records)
}

// Position lookup scans from the document start, so only call it on errors.
fn line_of(doc: &roxmltree::Document, node: &roxmltree::Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn parse_count(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Writes class records as warnings XML, grouping consecutive records of
/// the same file under one `Target`. Zero counts are omitted.
pub fn write_class_warnings_xml(records: &[ClassWarningRecord]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<Targets>\n");
    let mut i = 0;
    while i < records.len() {
        let path = &records[i].file_path;
        out.push_str(&format!("  <Target Name=\"{}\">\n", escape_attr(path)));
        while i < records.len() && &records[i].file_path == path {
            let r = &records[i];
            out.push_str(&format!("    <Class Name=\"{}\">\n", escape_attr(&r.class_name)));
            for (cat, n) in r.counts.iter().filter(|&(_, n)| n > 0) {
                out.push_str(&format!("      <Issue Category=\"{cat}\" Count=\"{n}\"/>\n"));
            }
            out.push_str("    </Class>\n");
            i += 1;
        }
        out.push_str("  </Target>\n");
    }
    out.push_str("</Targets>\n");
    out
}

#[derive(Deserialize, Serialize)]
struct ChangeLine {
    commit: String,
    message: String,
    files: Vec<String>,
}

/// Parses the JSON-Lines change log. Blank lines are skipped; line numbers
/// in errors are 1-based.
pub fn parse_change_log(text: &str) -> Result<Vec<ChangeRecord>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ChangeLine = serde_json::from_str(line).map_err(|e| IngestError::MalformedLine {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if parsed.commit.trim().is_empty() {
            return Err(IngestError::MalformedLine {
                line: i + 1,
                reason: "empty commit id".into(),
            });
        }
        out.push(ChangeRecord {
            change_id: parsed.commit,
            message: parsed.message,
            files: parsed.files.iter().map(|f| normalize_path(f)).collect(),
        });
    }
    Ok(out)
}

pub fn write_change_log(records: &[ChangeRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let line = ChangeLine {
            commit: r.change_id.clone(),
            message: r.message.clone(),
            files: r.files.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("change line serializes"));
        out.push('\n');
    }
    out
}
