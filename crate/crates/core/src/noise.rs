//! Confusion-matrix channel standing in for a neural action classifier.
//!
//! Row `i` of the matrix is the distribution of the observed class when the
//! true class is `ActionClass::ALL[i]`. Each window is resampled
//! independently from the row of its true class.
//!
//! Matrix files hold 9 rows of 9 decimals in canonical class order
//! (walk, sit, brush_teeth, click_mouse, drink, eat, type, flush_toilet,
//! wash). Values are separated by whitespace or commas; blank lines and
//! lines starting with `#` are ignored.

use std::path::Path;

use rand::Rng as _;

use crate::seed::Rng;
use crate::{ActionClass, AeSequence};

const N: usize = ActionClass::COUNT;
const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum NoiseError {
    #[error("accuracy {0} outside [0, 1]")]
    Accuracy(f64),
    #[error("invalid confusion matrix: {0}")]
    Matrix(String),
    #[error("cannot read confusion matrix {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    matrix: [[f64; N]; N],
    cumulative: [[f64; N]; N],
}

impl NoiseModel {
    pub fn from_matrix(matrix: [[f64; N]; N]) -> Result<Self, NoiseError> {
        for (i, row) in matrix.iter().enumerate() {
            let name = ActionClass::ALL[i];
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(NoiseError::Matrix(format!("row {i} ({name}) has invalid entry {v}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(NoiseError::Matrix(format!("row {i} ({name}) sums to {sum}, expected 1")));
            }
        }
        let mut cumulative = [[0.0; N]; N];
        for (row, cum) in matrix.iter().zip(cumulative.iter_mut()) {
            let mut acc = 0.0;
            for (v, c) in row.iter().zip(cum.iter_mut()) {
                acc += v;
                *c = acc;
            }
        }
        Ok(Self { matrix, cumulative })
    }

    /// Diagonal `accuracy`, remaining mass spread evenly over the other
    /// eight classes.
    pub fn uniform_from_accuracy(accuracy: f64) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(NoiseError::Accuracy(accuracy));
        }
        let off = (1.0 - accuracy) / (N - 1) as f64;
        let mut matrix = [[off; N]; N];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = accuracy;
        }
        Self::from_matrix(matrix)
    }

    pub fn identity() -> Self {
        Self::uniform_from_accuracy(1.0).expect("1.0 is a valid accuracy")
    }

    pub fn matrix(&self) -> &[[f64; N]; N] {
        &self.matrix
    }

    pub fn probability(&self, truth: ActionClass, observed: ActionClass) -> f64 {
        self.matrix[truth.index()][observed.index()]
    }

    /// Expected per-window agreement when every class is equally frequent.
    pub fn mean_accuracy(&self) -> f64 {
        (0..N).map(|i| self.matrix[i][i]).sum::<f64>() / N as f64
    }

    pub fn observe(&self, truth: ActionClass, rng: &mut Rng) -> ActionClass {
        let row = &self.matrix[truth.index()];
        if row[truth.index()] >= 1.0 {
            // Skip the draw for noiseless rows.
            return truth;
        }
        let u: f64 = rng.gen();
        let cum = &self.cumulative[truth.index()];
        let idx = cum.iter().position(|&c| u < c).unwrap_or_else(|| {
            // u landed in the rounding slack above the last partial sum.
            row.iter().rposition(|&p| p > 0.0).unwrap_or(truth.index())
        });
        ActionClass::ALL[idx]
    }

    pub fn apply(&self, actions: &[ActionClass], rng: &mut Rng) -> Vec<ActionClass> {
        actions.iter().map(|&a| self.observe(a, rng)).collect()
    }

    pub fn parse(text: &str) -> Result<Self, NoiseError> {
        let mut rows = Vec::with_capacity(N);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let values = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        NoiseError::Matrix(format!("line {}: '{t}' is not a number", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let row: [f64; N] = values.try_into().map_err(|v: Vec<f64>| {
                NoiseError::Matrix(format!("line {}: expected {N} values, found {}", lineno + 1, v.len()))
            })?;
            rows.push(row);
        }
        let matrix: [[f64; N]; N] = rows
            .try_into()
            .map_err(|r: Vec<_>| NoiseError::Matrix(format!("expected {N} rows, found {}", r.len())))?;
        Self::from_matrix(matrix)
    }

    pub fn from_path(path: &Path) -> Result<Self, NoiseError> {
        let text = std::fs::read_to_string(path).map_err(|source| NoiseError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Inverse of [`NoiseModel::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("# rows: true class, columns: observed class\n");
        out.push_str("# order: ");
        out.push_str(&ActionClass::ALL.map(ActionClass::name).join(" "));
        out.push('\n');
        for row in &self.matrix {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Perturbs every window of `ae` independently. Length, id and seed carry
/// over unchanged.
pub fn apply_noise(ae: &AeSequence, model: &NoiseModel, rng: &mut Rng) -> AeSequence {
    AeSequence {
        example_id: ae.example_id,
        seed: ae.seed,
        windows: model.apply(&ae.windows, rng),
    }
}
