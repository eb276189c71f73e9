//! Stochastic activity simulator.
//!
//! A day is a sequence of stages. Each stage repeatedly draws an activity
//! from its categorical distribution and realizes it into windows until the
//! stage's window budget is used up; the last activity of a stage is cut at
//! the boundary. Stages are concatenated and the result is cut to exactly
//! `sequence_length_windows`.

mod config;

use rand::Rng as _;
use rayon::prelude::*;

pub use config::{ActionStep, ActivityTemplate, SimulatorConfig, StageConfig, DEFAULT_CONFIG_TOML};

use crate::seed::{self, Rng};
use crate::ActionClass;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config syntax error: {0}")]
    Syntax(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ConfigError::Invalid(msg.into())
    }
}

/// One simulated example: the clean action label of every window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AeSequence {
    pub example_id: u64,
    pub seed: u64,
    pub windows: Vec<ActionClass>,
}

impl AeSequence {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Appends one realization of `template` to `out`.
///
/// Steps are included independently with their `include_prob`, in template
/// order, each for a uniform number of windows in `dur_min..=dur_max`.
pub fn realize_activity_into(template: &ActivityTemplate, rng: &mut Rng, out: &mut Vec<ActionClass>) {
    for step in &template.steps {
        // Skip the draw for certain steps so they do not consume randomness.
        let included = step.include_prob >= 1.0 || (step.include_prob > 0.0 && rng.gen_bool(step.include_prob));
        if !included {
            continue;
        }
        let duration = rng.gen_range(step.dur_min..=step.dur_max);
        out.extend(std::iter::repeat_n(step.action, duration as usize));
    }
}

pub fn realize_activity(template: &ActivityTemplate, rng: &mut Rng) -> Vec<ActionClass> {
    let mut out = Vec::new();
    realize_activity_into(template, rng, &mut out);
    out
}

/// Categorical draw over the stage's activities.
pub fn sample_activity<'a>(stage: &'a StageConfig, rng: &mut Rng) -> &'a ActivityTemplate {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (template, p) in &stage.activities {
        cumulative += p;
        if u < cumulative {
            return template;
        }
    }
    // Rounding can leave the cumulative sum a hair under 1.
    stage
        .activities
        .iter()
        .rev()
        .find(|(_, p)| *p > 0.0)
        .map(|(t, _)| t)
        .unwrap_or(&stage.activities[stage.activities.len() - 1].0)
}

fn fill_stage(stage: &StageConfig, rng: &mut Rng, out: &mut Vec<ActionClass>) {
    let end = out.len() + stage.window_budget as usize;
    while out.len() < end {
        let template = sample_activity(stage, rng);
        realize_activity_into(template, rng, out);
    }
    out.truncate(end);
}

/// Generates the example with the given id. The sequence depends only on
/// `(config, config.base_seed, example_id)`.
pub fn generate_sequence(config: &SimulatorConfig, example_id: u64) -> Result<AeSequence, ConfigError> {
    config.validate()?;
    Ok(generate_unchecked(config, example_id))
}

fn generate_unchecked(config: &SimulatorConfig, example_id: u64) -> AeSequence {
    let seed = seed::mix(config.base_seed, example_id);
    let mut rng = seed::rng_from_seed(seed);
    let length = config.sequence_length_windows as usize;
    let budget: usize = config.stages.iter().map(|s| s.window_budget as usize).sum();
    let mut windows = Vec::with_capacity(budget);
    for stage in &config.stages {
        if windows.len() >= length {
            break;
        }
        fill_stage(stage, &mut rng, &mut windows);
    }
    windows.truncate(length);
    AeSequence {
        example_id,
        seed,
        windows,
    }
}

/// Generates examples `0..n` in parallel; the result is ordered by id.
pub fn generate_dataset(config: &SimulatorConfig, n: usize) -> Result<Vec<AeSequence>, ConfigError> {
    if n == 0 {
        return Err(ConfigError::invalid("dataset size must be >= 1"));
    }
    config.validate()?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|id| generate_unchecked(config, id))
        .collect())
}
