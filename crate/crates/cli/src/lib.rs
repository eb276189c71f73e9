//! Pipeline commands behind the `cepkit` binary.
//!
//! Each `cmd_*` function does the file-to-file work of one subcommand; the
//! in-memory steps they are built from (`perturb_records`,
//! `detect_records`, `evaluate_predictions`) are public so the sweep and
//! the tests can compose them without touching disk.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use cepkit::dataset::{self, DatasetError, ExampleRecord, PredictionRecord};
use cepkit::fsm::detect_stream;
use cepkit::metrics::{self, AggregateReport, ConfusionCounts, MetricsError, MetricsReport, REPORT_ROWS};
use cepkit::noise::NoiseError;
use cepkit::seed::{mix, rng_from_seed};
use cepkit::simulator::{self, ConfigError};
use cepkit::{label_sequence, NoiseModel, SimulatorConfig};

/// Accuracy used by `perturb` when neither `--accuracy` nor `--matrix` is
/// given: the reported test accuracy of the multimodal action classifier.
pub const DEFAULT_ACCURACY: f64 = 0.91;

pub const DEFAULT_SWEEP: [f64; 4] = [1.0, 0.95, 0.91, 0.85];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 0 is success and 2 is reserved for usage errors reported by clap.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<NoiseError> for CliError {
    fn from(e: NoiseError) -> Self {
        match e {
            NoiseError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// How `perturb` corrupts the clean actions.
#[derive(Debug, Clone)]
pub enum NoiseSpec<'a> {
    Accuracy(f64),
    Matrix(&'a Path),
}

impl NoiseSpec<'_> {
    pub fn model(&self) -> Result<NoiseModel, CliError> {
        Ok(match self {
            NoiseSpec::Accuracy(p) => NoiseModel::uniform_from_accuracy(*p)?,
            NoiseSpec::Matrix(path) => NoiseModel::from_path(path)?,
        })
    }
}

/// Simulates `n` examples and stamps their ground truth.
pub fn generate_records(config: &SimulatorConfig, n: usize) -> Result<Vec<ExampleRecord>, CliError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let sequences = simulator::generate_dataset(config, n)?;
    Ok(sequences
        .into_par_iter()
        .map(|ae| {
            let labels = label_sequence(&ae.windows);
            ExampleRecord::labeled(ae, labels)
        })
        .collect())
}

/// Bundled default config unless `path` is given; `seed` replaces the
/// config's `base_seed`.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<SimulatorConfig, CliError> {
    let mut config = match path {
        Some(p) => SimulatorConfig::from_path(p)?,
        None => SimulatorConfig::default(),
    };
    if let Some(seed) = seed {
        config.base_seed = seed;
    }
    Ok(config)
}

pub fn cmd_generate(config: Option<&Path>, n: usize, seed: Option<u64>, out: &Path) -> Result<usize, CliError> {
    let config = load_config(config, seed)?;
    let records = generate_records(&config, n)?;
    dataset::write_dataset(&records, out)?;
    Ok(records.len())
}

/// Fills `ae_observed` from `ae_true`. Example `i` draws its noise from a
/// stream seeded with `mix(seed, example_id)`, so the result does not
/// depend on record order or thread count.
pub fn perturb_records(records: &[ExampleRecord], model: &NoiseModel, seed: u64) -> Vec<ExampleRecord> {
    records
        .par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(mix(seed, r.example_id));
            ExampleRecord {
                ae_observed: Some(model.apply(&r.ae_true, &mut rng)),
                ..r.clone()
            }
        })
        .collect()
}

pub fn cmd_perturb(input: &Path, noise: NoiseSpec<'_>, seed: u64, out: &Path) -> Result<usize, CliError> {
    let model = noise.model()?;
    let records = dataset::read_dataset(input)?;
    let perturbed = perturb_records(&records, &model, seed);
    dataset::write_dataset(&perturbed, out)?;
    Ok(perturbed.len())
}

/// Streams every example through a fresh detector.
pub fn detect_records(records: &[ExampleRecord]) -> Vec<PredictionRecord> {
    records
        .par_iter()
        .map(|r| PredictionRecord {
            example_id: r.example_id,
            ce_pred: detect_stream(r.detector_input()),
        })
        .collect()
}

pub fn cmd_detect(input: &Path, out: &Path) -> Result<usize, CliError> {
    let records = dataset::read_dataset(input)?;
    let missing = records.iter().filter(|r| r.ae_observed.is_none()).count();
    if missing > 0 {
        log::warn!("{missing} of {} examples have no ae_observed; detecting on ae_true", records.len());
    }
    let preds = detect_records(&records);
    dataset::write_predictions(&preds, out)?;
    Ok(preds.len())
}

/// Scores one prediction set against the ground truth. Records must pair up
/// one-to-one, in the same order, with equal lengths.
pub fn evaluate_predictions(truth: &[ExampleRecord], preds: &[PredictionRecord]) -> Result<MetricsReport, CliError> {
    if truth.len() != preds.len() {
        return Err(CliError::Validation(format!(
            "ground truth has {} examples but predictions have {}",
            truth.len(),
            preds.len()
        )));
    }
    let mut counts = ConfusionCounts::default();
    for (i, (t, p)) in truth.iter().zip(preds).enumerate() {
        if t.example_id != p.example_id {
            return Err(CliError::Validation(format!(
                "record {i}: prediction for example {} paired with ground truth for example {}",
                p.example_id, t.example_id
            )));
        }
        counts
            .add_sequence(&p.ce_pred, &t.ce_labels)
            .map_err(|e| CliError::Validation(format!("example {}: {e}", t.example_id)))?;
    }
    Ok(metrics::precision_recall_f1(&counts))
}

/// Scores each prediction file and summarizes them as one run each.
pub fn cmd_evaluate(
    truth: &Path,
    preds: &[&Path],
    label: &str,
    out: Option<&Path>,
) -> Result<(AggregateReport, String), CliError> {
    if preds.is_empty() {
        return Err(CliError::Validation("no prediction files given".into()));
    }
    let truth = dataset::read_dataset(truth)?;
    let reports = preds
        .iter()
        .map(|p| evaluate_predictions(&truth, &dataset::read_predictions(p)?))
        .collect::<Result<Vec<_>, _>>()?;
    let aggregate = AggregateReport::from_runs(&reports)?;
    let text = metrics::format_report(&[(label.to_owned(), aggregate.clone())]);
    if let Some(out) = out {
        write_text(out, &text)?;
    }
    Ok((aggregate, text))
}

/// One sweep point: perturb with `seed`, detect, score.
pub fn sweep_point(records: &[ExampleRecord], model: &NoiseModel, seed: u64) -> Result<MetricsReport, CliError> {
    let perturbed = perturb_records(records, model, seed);
    evaluate_predictions(records, &detect_records(&perturbed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub accuracy: f64,
    pub report: AggregateReport,
}

/// Run `r` of every accuracy uses perturbation seed `seed + r`.
pub fn sweep(records: &[ExampleRecord], accuracies: &[f64], runs: usize, seed: u64) -> Result<Vec<SweepRow>, CliError> {
    if runs == 0 {
        return Err(CliError::Validation("runs must be >= 1".into()));
    }
    accuracies
        .iter()
        .map(|&accuracy| {
            let model = NoiseModel::uniform_from_accuracy(accuracy)?;
            let reports = (0..runs as u64)
                .map(|r| sweep_point(records, &model, seed.wrapping_add(r)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SweepRow {
                accuracy,
                report: AggregateReport::from_runs(&reports)?,
            })
        })
        .collect()
}

pub fn sweep_columns() -> Vec<String> {
    let mut cols = vec!["accuracy".to_owned(), "runs".to_owned()];
    for row in REPORT_ROWS {
        for m in ["precision", "recall", "f1"] {
            cols.push(format!("{row}_{m}"));
            cols.push(format!("{row}_{m}_ci"));
        }
    }
    cols
}

/// Tab-separated, one line per accuracy. Columns are [`sweep_columns`];
/// `*_ci` cells are 95% half-widths, empty for single-run sweeps.
pub fn format_sweep(rows: &[SweepRow]) -> String {
    let mut out = sweep_columns().join("\t");
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}\t{}", row.accuracy, row.report.runs);
        for (_, e) in &row.report.rows {
            for est in [e.precision, e.recall, e.f1] {
                let ci = if row.report.runs > 1 {
                    est.half_width.to_string()
                } else {
                    String::new()
                };
                let _ = write!(out, "\t{}\t{ci}", est.mean);
            }
        }
        out.push('\n');
    }
    out
}

pub fn cmd_sweep(
    input: &Path,
    accuracies: &[f64],
    runs: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(Vec<SweepRow>, String), CliError> {
    if let Some(bad) = accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(CliError::Validation(format!("accuracy {bad} outside [0, 1]")));
    }
    let records = dataset::read_dataset(input)?;
    let rows = sweep(&records, accuracies, runs, seed)?;
    let text = format_sweep(&rows);
    if let Some(out) = out {
        write_text(out, &text)?;
    }
    Ok((rows, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            CliError::Config(String::new()).exit_code(),
            CliError::Validation(String::new()).exit_code(),
            CliError::Io(String::new()).exit_code(),
        ];
        assert_eq!(codes, [3, 4, 5]);
    }

    #[test]
    fn sweep_header_width() {
        assert_eq!(sweep_columns().len(), 2 + 6 * 3 * 2);
        assert_eq!(sweep_columns()[2], "e0_precision");
        assert_eq!(sweep_columns()[3], "e0_precision_ci");
    }

    #[test]
    fn zero_examples_generate_nothing() {
        let config = SimulatorConfig::default();
        assert!(generate_records(&config, 0).unwrap().is_empty());
    }

    #[test]
    fn evaluation_rejects_misaligned_sets() {
        let config = SimulatorConfig::default();
        let truth = generate_records(&config, 3).unwrap();
        let mut preds = detect_records(&truth);
        preds.swap(0, 1);
        assert!(matches!(evaluate_predictions(&truth, &preds), Err(CliError::Validation(_))));
        assert!(evaluate_predictions(&truth, &preds[..2]).is_err());
        let mut preds = detect_records(&truth);
        preds[2].ce_pred.pop();
        assert!(evaluate_predictions(&truth, &preds).is_err());
    }
}
