//! JSON-lines persistence for examples and detector predictions.
//!
//! Dataset files hold one [`ExampleRecord`] per line:
//!
//! ```json
//! {"example_id":0,"seed":123,"ae_true":["walk","sit"],"ce_labels":[[],["e1"]]}
//! ```
//!
//! `ae_observed` (same shape as `ae_true`) appears after `ae_true` once a
//! dataset has been perturbed. Prediction files hold one
//! [`PredictionRecord`] per line: `{"example_id":0,"ce_pred":[[],["e1"]]}`.
//!
//! Class names are always strings; `e0` is written as an empty list and is
//! rejected inside a label list.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::simulator::AeSequence;
use crate::{ActionClass, CeClass, CeSet};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: field '{field}': {message}")]
    Validation {
        line: usize,
        field: &'static str,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExampleRecord {
    pub example_id: u64,
    pub seed: u64,
    pub ae_true: Vec<ActionClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ae_observed: Option<Vec<ActionClass>>,
    pub ce_labels: Vec<CeSet>,
}

impl ExampleRecord {
    /// Pairs a clean sequence with its ground-truth labels.
    pub fn labeled(ae: AeSequence, ce_labels: Vec<CeSet>) -> Self {
        Self {
            example_id: ae.example_id,
            seed: ae.seed,
            ae_true: ae.windows,
            ae_observed: None,
            ce_labels,
        }
    }

    /// Observed actions when present, clean ones otherwise.
    pub fn detector_input(&self) -> &[ActionClass] {
        self.ae_observed.as_deref().unwrap_or(&self.ae_true)
    }

    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.ce_labels.len() != self.ae_true.len() {
            return Err((
                "ce_labels",
                format!("{} windows but ae_true has {}", self.ce_labels.len(), self.ae_true.len()),
            ));
        }
        if let Some(obs) = &self.ae_observed {
            if obs.len() != self.ae_true.len() {
                return Err((
                    "ae_observed",
                    format!("{} windows but ae_true has {}", obs.len(), self.ae_true.len()),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredictionRecord {
    pub example_id: u64,
    pub ce_pred: Vec<CeSet>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExample {
    example_id: u64,
    seed: u64,
    ae_true: Vec<String>,
    #[serde(default)]
    ae_observed: Option<Vec<String>>,
    ce_labels: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrediction {
    example_id: u64,
    ce_pred: Vec<Vec<String>>,
}

type FieldResult<T> = Result<T, (&'static str, String)>;

fn actions(field: &'static str, names: Vec<String>) -> FieldResult<Vec<ActionClass>> {
    names
        .iter()
        .enumerate()
        .map(|(t, n)| n.parse().map_err(|e| (field, format!("window {t}: {e}"))))
        .collect()
}

fn label_sets(field: &'static str, sets: Vec<Vec<String>>) -> FieldResult<Vec<CeSet>> {
    sets.iter()
        .enumerate()
        .map(|(t, names)| {
            let mut set = CeSet::EMPTY;
            for n in names {
                let class: CeClass = n.parse().map_err(|e| (field, format!("window {t}: {e}")))?;
                if class == CeClass::E0 {
                    return Err((field, format!("window {t}: e0 is written as an empty list")));
                }
                set.insert(class);
            }
            Ok(set)
        })
        .collect()
}

impl TryFrom<RawExample> for ExampleRecord {
    type Error = (&'static str, String);

    fn try_from(raw: RawExample) -> FieldResult<Self> {
        let record = ExampleRecord {
            example_id: raw.example_id,
            seed: raw.seed,
            ae_true: actions("ae_true", raw.ae_true)?,
            ae_observed: raw.ae_observed.map(|o| actions("ae_observed", o)).transpose()?,
            ce_labels: label_sets("ce_labels", raw.ce_labels)?,
        };
        record.validate()?;
        Ok(record)
    }
}

impl TryFrom<RawPrediction> for PredictionRecord {
    type Error = (&'static str, String);

    fn try_from(raw: RawPrediction) -> FieldResult<Self> {
        Ok(PredictionRecord {
            example_id: raw.example_id,
            ce_pred: label_sets("ce_pred", raw.ce_pred)?,
        })
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_jsonl<T: Serialize>(records: &[T], out: impl Write) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn write_path<T: Serialize>(records: &[T], path: &Path) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(io_error(path))?;
    write_jsonl(records, file).map_err(io_error(path))
}

fn read_lines<R, T>(input: impl BufRead) -> Result<Vec<T>, DatasetError>
where
    R: DeserializeOwned,
    T: TryFrom<R, Error = (&'static str, String)>,
{
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let raw: R = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let record = T::try_from(raw).map_err(|(field, message)| DatasetError::Validation {
            line: line_no,
            field,
            message,
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn parse_dataset(input: impl BufRead) -> Result<Vec<ExampleRecord>, DatasetError> {
    read_lines::<RawExample, _>(input)
}

pub fn parse_predictions(input: impl BufRead) -> Result<Vec<PredictionRecord>, DatasetError> {
    read_lines::<RawPrediction, _>(input)
}

pub fn write_dataset(records: &[ExampleRecord], path: &Path) -> Result<(), DatasetError> {
    write_path(records, path)
}

pub fn read_dataset(path: &Path) -> Result<Vec<ExampleRecord>, DatasetError> {
    let file = File::open(path).map_err(io_error(path))?;
    parse_dataset(BufReader::new(file))
}

pub fn write_predictions(records: &[PredictionRecord], path: &Path) -> Result<(), DatasetError> {
    write_path(records, path)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, DatasetError> {
    let file = File::open(path).map_err(io_error(path))?;
    parse_predictions(BufReader::new(file))
}
