//! Per-window evaluation: one-vs-rest confusion counts per CE class,
//! precision/recall/F1, macro averages, and confidence intervals over runs.
//!
//! `e0` is scored like any other class: a window "is e0" when its label set
//! is empty. Undefined ratios (0/0) count as 0.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use crate::{CeClass, CeSet};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("prediction has {pred} windows but ground truth has {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("cannot summarize an empty list")]
    Empty,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed report: {0}")]
    Report(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Add for ClassCounts {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            tp: self.tp + rhs.tp,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
        }
    }
}

/// Window counts per class, indexed by [`CeClass::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub classes: [ClassCounts; CeClass::COUNT],
}

impl ConfusionCounts {
    pub fn get(&self, class: CeClass) -> ClassCounts {
        self.classes[class.index()]
    }

    pub fn add_window(&mut self, pred: CeSet, truth: CeSet) {
        for class in CeClass::ALL {
            let counts = &mut self.classes[class.index()];
            match (pred.contains(class), truth.contains(class)) {
                (true, true) => counts.tp += 1,
                (true, false) => counts.fp += 1,
                (false, true) => counts.fn_ += 1,
                (false, false) => {}
            }
        }
    }

    /// Accumulates one example.
    pub fn add_sequence(&mut self, pred: &[CeSet], truth: &[CeSet]) -> Result<(), MetricsError> {
        if pred.len() != truth.len() {
            return Err(MetricsError::LengthMismatch {
                pred: pred.len(),
                truth: truth.len(),
            });
        }
        for (&p, &t) in pred.iter().zip(truth) {
            self.add_window(p, t);
        }
        Ok(())
    }
}

impl Add for ConfusionCounts {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.classes.iter_mut().zip(rhs.classes) {
            *a = *a + b;
        }
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

pub fn count_confusion(pred: &[CeSet], truth: &[CeSet]) -> Result<ConfusionCounts, MetricsError> {
    let mut counts = ConfusionCounts::default();
    counts.add_sequence(pred, truth)?;
    Ok(counts)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl ClassMetrics {
    pub fn from_counts(c: ClassCounts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        Self {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }

    fn macro_average<'a>(items: impl IntoIterator<Item = &'a ClassMetrics>) -> Self {
        let mut n = 0usize;
        let mut sum = ClassMetrics::default();
        for m in items {
            n += 1;
            sum.precision += m.precision;
            sum.recall += m.recall;
            sum.f1 += m.f1;
        }
        let n = n as f64;
        Self {
            precision: sum.precision / n,
            recall: sum.recall / n,
            f1: sum.f1 / n,
        }
    }
}

/// Row labels of a report, in output order.
pub const REPORT_ROWS: [&str; 6] = ["e0", "e1", "e2", "e3", "avg_all", "avg_pos"];

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricsReport {
    pub per_class: [ClassMetrics; CeClass::COUNT],
    /// Unweighted means over e0..e3. `all.f1` is the "F1 All" figure.
    pub all: ClassMetrics,
    /// Unweighted means over e1..e3. `pos.f1` is the "F1 Pos." figure.
    pub pos: ClassMetrics,
}

impl MetricsReport {
    pub fn class(&self, class: CeClass) -> ClassMetrics {
        self.per_class[class.index()]
    }

    pub fn rows(&self) -> [(&'static str, ClassMetrics); 6] {
        let [e0, e1, e2, e3] = self.per_class;
        [
            (REPORT_ROWS[0], e0),
            (REPORT_ROWS[1], e1),
            (REPORT_ROWS[2], e2),
            (REPORT_ROWS[3], e3),
            (REPORT_ROWS[4], self.all),
            (REPORT_ROWS[5], self.pos),
        ]
    }
}

pub fn precision_recall_f1(counts: &ConfusionCounts) -> MetricsReport {
    let per_class = counts.classes.map(ClassMetrics::from_counts);
    MetricsReport {
        per_class,
        all: ClassMetrics::macro_average(&per_class),
        pos: ClassMetrics::macro_average(&per_class[1..]),
    }
}

/// Mean and 95% half-width (normal approximation, sample standard
/// deviation).
pub fn ci95(values: &[f64]) -> Result<(f64, f64), MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 || values.iter().all(|&v| v == values[0]) {
        return Ok((values[0], 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, Z_95 * var.sqrt() / n.sqrt()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    fn from_values(values: &[f64]) -> Result<Self, MetricsError> {
        let (mean, half_width) = ci95(values)?;
        Ok(Self { mean, half_width })
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassEstimate {
    pub precision: Estimate,
    pub recall: Estimate,
    pub f1: Estimate,
}

/// Reports from repeated runs, summarized as mean ± 95% CI.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub runs: usize,
    pub rows: [(&'static str, ClassEstimate); 6],
}

impl AggregateReport {
    pub fn from_runs(reports: &[MetricsReport]) -> Result<Self, MetricsError> {
        if reports.is_empty() {
            return Err(MetricsError::Empty);
        }
        let mut rows = [("", ClassEstimate::default()); 6];
        for (i, (label, slot)) in REPORT_ROWS.iter().zip(rows.iter_mut()).enumerate() {
            let pick = |f: fn(&ClassMetrics) -> f64| -> Vec<f64> { reports.iter().map(|r| f(&r.rows()[i].1)).collect() };
            *slot = (
                label,
                ClassEstimate {
                    precision: Estimate::from_values(&pick(|m| m.precision))?,
                    recall: Estimate::from_values(&pick(|m| m.recall))?,
                    f1: Estimate::from_values(&pick(|m| m.f1))?,
                },
            );
        }
        Ok(Self {
            runs: reports.len(),
            rows,
        })
    }

    pub fn row(&self, label: &str) -> Option<&ClassEstimate> {
        self.rows.iter().find(|(l, _)| *l == label).map(|(_, e)| e)
    }

    pub fn class(&self, class: CeClass) -> &ClassEstimate {
        &self.rows[class.index()].1
    }

    pub fn f1_all(&self) -> Estimate {
        self.rows[4].1.f1
    }

    pub fn f1_pos(&self) -> Estimate {
        self.rows[5].1.f1
    }
}

/// Column names of the tab-separated report format.
///
/// One row per (config, row label) where row labels are [`REPORT_ROWS`].
/// Metric cells hold means; `*_ci` cells hold 95% half-widths and are empty
/// when `runs` is 1. Numbers use the shortest representation that parses
/// back to the same `f64`.
pub const REPORT_COLUMNS: [&str; 9] = [
    "config",
    "class",
    "precision",
    "recall",
    "f1",
    "precision_ci",
    "recall_ci",
    "f1_ci",
    "runs",
];

pub fn format_report(entries: &[(String, AggregateReport)]) -> String {
    let mut out = REPORT_COLUMNS.join("\t");
    out.push('\n');
    for (config, report) in entries {
        for (label, e) in &report.rows {
            let ci = |x: &Estimate| if report.runs > 1 { x.half_width.to_string() } else { String::new() };
            let _ = writeln!(
                out,
                "{config}\t{label}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                e.precision.mean,
                e.recall.mean,
                e.f1.mean,
                ci(&e.precision),
                ci(&e.recall),
                ci(&e.f1),
                report.runs
            );
        }
    }
    out
}

/// One parsed report line.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub config: String,
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_ci: Option<f64>,
    pub recall_ci: Option<f64>,
    pub f1_ci: Option<f64>,
    pub runs: usize,
}

pub fn parse_report(text: &str) -> Result<Vec<ReportLine>, MetricsError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| MetricsError::Report("missing header".into()))?;
    if header.split('\t').ne(REPORT_COLUMNS) {
        return Err(MetricsError::Report(format!("unexpected header '{header}'")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| MetricsError::Report(format!("line {}: {what}", i + 2));
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != REPORT_COLUMNS.len() {
                return Err(bad("wrong number of columns"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            Ok(ReportLine {
                config: cells[0].to_owned(),
                class: cells[1].to_owned(),
                precision: num(cells[2])?,
                recall: num(cells[3])?,
                f1: num(cells[4])?,
                precision_ci: opt(cells[5])?,
                recall_ci: opt(cells[6])?,
                f1_ci: opt(cells[7])?,
                runs: cells[8].parse().map_err(|_| bad("bad run count"))?,
            })
        })
        .collect()
}

/// Reduces a label set to one class for single-label losses: e1 over e2 over
/// e3, empty set to e0.
pub fn single_class(set: CeSet) -> CeClass {
    set.iter().next().unwrap_or(CeClass::E0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalParams {
    pub gamma: f64,
    pub alpha: [f64; CeClass::COUNT],
}

impl Default for FocalParams {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            alpha: [0.005, 0.45, 0.45, 0.45],
        }
    }
}

/// Focal loss summed over examples and windows:
/// `-Σ α_y (1 - p_y)^γ ln p_y` where `y` is the window's true class.
///
/// `probs[i][t]` holds the class probabilities of window `t` of example `i`
/// in e0..e3 order.
pub fn focal_loss(
    probs: &[Vec<[f64; CeClass::COUNT]>],
    truth: &[Vec<CeSet>],
    params: &FocalParams,
) -> Result<f64, MetricsError> {
    if probs.len() != truth.len() {
        return Err(MetricsError::LengthMismatch {
            pred: probs.len(),
            truth: truth.len(),
        });
    }
    let mut total = 0.0;
    for (p_seq, y_seq) in probs.iter().zip(truth) {
        if p_seq.len() != y_seq.len() {
            return Err(MetricsError::LengthMismatch {
                pred: p_seq.len(),
                truth: y_seq.len(),
            });
        }
        for (p, &y) in p_seq.iter().zip(y_seq) {
            let class = single_class(y);
            let p_true = p[class.index()];
            if !(p_true > 0.0 && p_true <= 1.0) {
                return Err(MetricsError::Domain(format!(
                    "probability {p_true} for true class {class} outside (0, 1]"
                )));
            }
            total -= params.alpha[class.index()] * (1.0 - p_true).powf(params.gamma) * p_true.ln();
        }
    }
    Ok(total)
}
