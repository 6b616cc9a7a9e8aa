//! Contingency tables, accuracy metrics and the CSV table format.
//!
//! Table CSV layout: optional `# scale_factor=N` comment, a header
//! `CLASS,<labels>,TOTAL,ACC(%)`, one row per true class, then a `TOTAL`
//! row of column sums. Rows are true classes, columns assigned classes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::belief::Frame;
use crate::error::{Error, Result};
use crate::raster::LabelMap;

/// Tolerance, in percentage points, when comparing printed accuracies.
pub const PERCENT_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    frame: Frame,
    counts: Vec<Vec<u64>>,
    scale_factor: u64,
}

impl ContingencyTable {
    pub fn new(frame: &Frame, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = frame.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch(format!("contingency table must be {k}x{k}")));
        }
        Ok(Self {
            frame: frame.clone(),
            counts,
            scale_factor: 1,
        })
    }

    pub fn zeros(frame: &Frame) -> Self {
        let k = frame.len();
        Self {
            frame: frame.clone(),
            counts: vec![vec![0; k]; k],
            scale_factor: 1,
        }
    }

    pub fn with_scale_factor(mut self, scale_factor: u64) -> Self {
        self.scale_factor = scale_factor.max(1);
        self
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Number of pixels one count stands for.
    pub fn scale_factor(&self) -> u64 {
        self.scale_factor
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    /// Count for true class index `row` and assigned class index `col`.
    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row][col]
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    pub fn col_total(&self, col: usize) -> u64 {
        self.counts.iter().map(|r| r[col]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.frame.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Same table with rows and columns in the order of `frame`, which must
    /// hold the same labels.
    pub fn reorder(&self, frame: &Frame) -> Result<Self> {
        if frame.len() != self.frame.len() {
            return Err(Error::FrameMismatch);
        }
        let map: Vec<usize> = frame
            .labels()
            .iter()
            .map(|l| self.frame.index_of(l).ok_or(Error::FrameMismatch))
            .collect::<Result<_>>()?;
        let counts = map
            .iter()
            .map(|&i| map.iter().map(|&j| self.counts[i][j]).collect())
            .collect();
        Ok(Self {
            frame: frame.clone(),
            counts,
            scale_factor: self.scale_factor,
        })
    }

    pub fn to_csv(&self) -> String {
        let report = accuracy_report(self).ok();
        let k = self.frame.len();
        let mut out = String::new();
        if self.scale_factor != 1 {
            writeln!(out, "# scale_factor={}", self.scale_factor).unwrap();
        }
        writeln!(out, "CLASS,{},TOTAL,ACC(%)", self.frame.labels().join(",")).unwrap();
        for i in 0..k {
            let acc = report.as_ref().map_or(0.0, |r| r.per_class[i].percent);
            let cells: Vec<String> = self.counts[i].iter().map(u64::to_string).collect();
            writeln!(
                out,
                "{},{},{},{acc:.2}",
                self.frame.labels()[i],
                cells.join(","),
                self.row_total(i)
            )
            .unwrap();
        }
        let cols: Vec<String> = (0..k).map(|j| self.col_total(j).to_string()).collect();
        let overall = report.as_ref().map_or(0.0, |r| r.overall);
        writeln!(out, "TOTAL,{},{},{overall:.2}", cols.join(","), self.total()).unwrap();
        out
    }

    /// Parses a table, ignoring the printed margins.
    pub fn from_csv(text: &str) -> Result<Self> {
        Ok(PrintedTable::parse(text)?.table)
    }
}

/// Pixel counts of true (rows) against assigned (columns) classes. Pixels
/// unlabeled in either map are skipped.
pub fn contingency(truth: &LabelMap, predicted: &LabelMap, frame: &Frame) -> Result<ContingencyTable> {
    if truth.shape() != predicted.shape() {
        return Err(Error::DimensionMismatch(format!(
            "truth is {}x{}, prediction is {}x{}",
            truth.width(),
            truth.height(),
            predicted.width(),
            predicted.height()
        )));
    }
    truth.validate(frame)?;
    predicted.validate(frame)?;
    let mut table = ContingencyTable::zeros(frame);
    for (&t, &p) in truth.labels().iter().zip(predicted.labels()) {
        if t != 0 && p != 0 {
            table.counts[usize::from(t) - 1][usize::from(p) - 1] += 1;
        }
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassAccuracy {
    pub label: String,
    pub correct: u64,
    pub total: u64,
    pub percent: f64,
    /// No pixels of this true class; `percent` is reported as 0.
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub per_class: Vec<ClassAccuracy>,
    pub correct: u64,
    pub total: u64,
    pub overall: f64,
}

pub fn accuracy_report(table: &ContingencyTable) -> Result<AccuracyReport> {
    let total = table.total();
    if total == 0 {
        return Err(Error::EmptyTable);
    }
    let per_class = table
        .frame
        .labels()
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let (correct, row) = (table.get(i, i), table.row_total(i));
            ClassAccuracy {
                label: label.clone(),
                correct,
                total: row,
                percent: if row == 0 {
                    0.0
                } else {
                    100.0 * correct as f64 / row as f64
                },
                empty: row == 0,
            }
        })
        .collect();
    let correct = table.trace();
    Ok(AccuracyReport {
        per_class,
        correct,
        total,
        overall: 100.0 * correct as f64 / total as f64,
    })
}

/// A printed margin that disagrees with the counts it summarizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discrepancy {
    MissingRow { class: String },
    RowTotal { class: String, printed: u64, computed: u64 },
    ColumnTotal { class: String, printed: u64, computed: u64 },
    GrandTotal { printed: u64, computed: u64 },
    ClassAccuracy { class: String, printed: f64, computed: f64 },
    OverallAccuracy { printed: f64, computed: f64 },
}

/// A table as printed, margins included, so that inconsistencies between
/// the counts and the printed totals can be reported instead of corrected.
#[derive(Clone, Debug, PartialEq)]
pub struct PrintedTable {
    pub table: ContingencyTable,
    pub row_totals: Vec<Option<u64>>,
    pub row_accuracy: Vec<Option<f64>>,
    pub col_totals: Vec<Option<u64>>,
    pub grand_total: Option<u64>,
    pub overall_accuracy: Option<f64>,
    /// Frame classes with no row in the file; their counts are zero.
    pub missing_rows: Vec<String>,
}

impl PrintedTable {
    pub fn parse(text: &str) -> Result<Self> {
        let format = |reason: String| Error::format("<table csv>", reason);
        let mut scale_factor = 1;
        let mut body = String::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("scale_factor=") {
                    scale_factor = v
                        .trim()
                        .parse()
                        .map_err(|_| format(format!("bad scale factor {v:?}")))?;
                }
            } else if !trimmed.is_empty() {
                body.push_str(trimmed);
                body.push('\n');
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let mut records = reader.records();
        let header = records.next().ok_or_else(|| format("missing header".into()))??;
        let n = header.len();
        if n < 4
            || &header[0] != "CLASS"
            || &header[n - 2] != "TOTAL"
            || header[n - 1].trim_end_matches('*') != "ACC(%)"
        {
            return Err(format("header must be CLASS,<labels>,TOTAL,ACC(%)".into()));
        }
        let frame = Frame::new(header.iter().skip(1).take(n - 3))?;
        let k = frame.len();
        let mut table = ContingencyTable::zeros(&frame).with_scale_factor(scale_factor);
        let mut seen = vec![false; k];
        let mut row_totals = vec![None; k];
        let mut row_accuracy = vec![None; k];
        let mut col_totals = vec![None; k];
        let (mut grand_total, mut overall_accuracy) = (None, None);
        for record in records {
            let record = record?;
            if record.len() != n {
                return Err(format(format!("row has {} fields, expected {n}", record.len())));
            }
            let count = |s: &str| -> Result<Option<u64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| format(format!("bad count {s:?}")))
                }
            };
            let name = &record[0];
            if name == "TOTAL" {
                for j in 0..k {
                    col_totals[j] = count(&record[j + 1])?;
                }
                grand_total = count(&record[k + 1])?;
                overall_accuracy = parse_percent(&record[k + 2])?;
                continue;
            }
            let i = frame
                .index_of(name)
                .ok_or_else(|| format(format!("row class {name:?} not in header")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(format(format!("duplicate row {name:?}")));
            }
            for j in 0..k {
                table.counts[i][j] = count(&record[j + 1])?.unwrap_or(0);
            }
            row_totals[i] = count(&record[k + 1])?;
            row_accuracy[i] = parse_percent(&record[k + 2])?;
        }
        let missing_rows = frame
            .labels()
            .iter()
            .zip(&seen)
            .filter(|(_, &s)| !s)
            .map(|(l, _)| l.clone())
            .collect();
        Ok(Self {
            table,
            row_totals,
            row_accuracy,
            col_totals,
            grand_total,
            overall_accuracy,
            missing_rows,
        })
    }

    /// Every printed margin that does not match the counts. Percentages
    /// match within [`PERCENT_TOLERANCE`].
    pub fn discrepancies(&self) -> Vec<Discrepancy> {
        let t = &self.table;
        let labels = t.frame.labels();
        let mut out: Vec<Discrepancy> = self
            .missing_rows
            .iter()
            .map(|c| Discrepancy::MissingRow { class: c.clone() })
            .collect();
        for (i, label) in labels.iter().enumerate() {
            if let Some(printed) = self.row_totals[i] {
                let computed = t.row_total(i);
                if printed != computed {
                    out.push(Discrepancy::RowTotal {
                        class: label.clone(),
                        printed,
                        computed,
                    });
                }
            }
        }
        for (j, label) in labels.iter().enumerate() {
            if let Some(printed) = self.col_totals[j] {
                let computed = t.col_total(j);
                if printed != computed {
                    out.push(Discrepancy::ColumnTotal {
                        class: label.clone(),
                        printed,
                        computed,
                    });
                }
            }
        }
        if let Some(printed) = self.grand_total {
            if printed != t.total() {
                out.push(Discrepancy::GrandTotal {
                    printed,
                    computed: t.total(),
                });
            }
        }
        if let Ok(report) = accuracy_report(t) {
            for (i, class) in report.per_class.iter().enumerate() {
                if let Some(printed) = self.row_accuracy[i] {
                    if (printed - class.percent).abs() > PERCENT_TOLERANCE {
                        out.push(Discrepancy::ClassAccuracy {
                            class: class.label.clone(),
                            printed,
                            computed: class.percent,
                        });
                    }
                }
            }
            if let Some(printed) = self.overall_accuracy {
                if (printed - report.overall).abs() > PERCENT_TOLERANCE {
                    out.push(Discrepancy::OverallAccuracy {
                        printed,
                        computed: report.overall,
                    });
                }
            }
        }
        out
    }
}

/// Accepts `85.5`, `85.5%` and footnote marks such as `77.5%**`.
fn parse_percent(s: &str) -> Result<Option<f64>> {
    let s = s.trim_end_matches('*').trim_end_matches('%').trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::format("<table csv>", format!("bad percentage {s:?}")))
}

/// Side-by-side accuracies of several tables over the same frame, with the
/// change from the first to the last table.
pub fn render_comparison(tables: &[(String, ContingencyTable)]) -> Result<String> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidArgument("no tables to compare".into()))?;
    let frame = first.1.frame();
    let mut reports = Vec::new();
    for (name, table) in tables {
        let table = table
            .reorder(frame)
            .map_err(|_| Error::InvalidArgument(format!("table {name} has different classes")))?;
        reports.push(accuracy_report(&table)?);
    }
    let width = tables.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    write!(out, "{:<8}", "CLASS").unwrap();
    for (name, _) in tables {
        write!(out, " {name:>width$}").unwrap();
    }
    if tables.len() > 1 {
        write!(out, " {:>width$}", "CHANGE").unwrap();
    }
    out.push('\n');
    let mut line = |label: &str, values: Vec<f64>| {
        write!(out, "{label:<8}").unwrap();
        for v in &values {
            write!(out, " {v:>width$.2}").unwrap();
        }
        if values.len() > 1 {
            let delta = values[values.len() - 1] - values[0];
            write!(out, " {delta:>+width$.2}").unwrap();
        }
        out.push('\n');
    };
    for (i, label) in frame.labels().iter().enumerate() {
        line(label, reports.iter().map(|r| r.per_class[i].percent).collect());
    }
    line("OVERALL", reports.iter().map(|r| r.overall).collect());
    Ok(out)
}
