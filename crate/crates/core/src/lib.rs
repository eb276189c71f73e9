//! Window-level complex-event processing benchmark kit.
//!
//! The pipeline has four stages, each in its own module:
//!
//! - [`simulator`] synthesizes atomic-event (AE) sequences, one symbolic
//!   action per 5-second window, from a stage/activity/action hierarchy.
//! - [`fsm`] holds one finite-state machine per complex-event (CE) rule. The
//!   same machines stamp ground-truth labels on clean sequences and run as a
//!   causal streaming detector on noisy ones.
//! - [`noise`] stands in for an imperfect perception model: a confusion-matrix
//!   channel over AE labels.
//! - [`metrics`] scores detector output per window (one-vs-rest per class,
//!   macro averages, confidence intervals across seeds).
//!
//! [`dataset`] persists examples and predictions as JSON lines.

pub mod classes;
pub mod dataset;
pub mod fsm;
pub mod metrics;
pub mod noise;
pub mod seed;
pub mod simulator;

pub use classes::{ActionClass, CeClass, CeSet, ParseClassError};
pub use dataset::{DatasetError, ExampleRecord, PredictionRecord};
pub use fsm::{label_sequence, DetectorState};
pub use metrics::{ConfusionCounts, MetricsReport};
pub use noise::NoiseModel;
pub use simulator::{AeSequence, ConfigError, SimulatorConfig};

/// Length of one window in seconds. Every duration threshold is expressed in
/// windows of this size.
pub const WINDOW_SECONDS: u32 = 5;

/// Ground-truth or predicted CE labels, one set per window.
pub type CeLabelSequence = Vec<CeSet>;
