//! Simulator configuration: in-memory types and the TOML file schema.
//!
//! A config file declares activity templates once and lets stages reference
//! them by name:
//!
//! ```toml
//! sequence_length_windows = 60
//! window_seconds = 5
//! base_seed = 7
//!
//! [[activity]]
//! name = "Sit-only"
//! steps = [{ action = "sit", dur_min = 2, dur_max = 8, include_prob = 1.0 }]
//!
//! [[stage]]
//! name = "Daytime"
//! window_budget = 60
//! activities = [{ name = "Sit-only", probability = 1.0 }]
//! ```
//!
//! `include_prob` defaults to 1.0 when omitted. The shipped default lives in
//! `configs/default.toml` and is available as [`SimulatorConfig::default`].

use std::path::Path;

use serde::Deserialize;

use super::ConfigError;
use crate::{ActionClass, WINDOW_SECONDS};

pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../configs/default.toml");

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ActionStep {
    pub action: ActionClass,
    pub dur_min: u32,
    pub dur_max: u32,
    pub include_prob: f64,
}

impl ActionStep {
    pub fn new(action: ActionClass, dur_min: u32, dur_max: u32, include_prob: f64) -> Self {
        Self {
            action,
            dur_min,
            dur_max,
            include_prob,
        }
    }

    /// Step that is always included.
    pub fn always(action: ActionClass, dur_min: u32, dur_max: u32) -> Self {
        Self::new(action, dur_min, dur_max, 1.0)
    }

    fn validate(&self, activity: &str) -> Result<(), ConfigError> {
        if self.dur_min < 1 || self.dur_max < self.dur_min {
            return Err(ConfigError::invalid(format!(
                "activity '{activity}': step {} needs 1 <= dur_min <= dur_max, got {}..{}",
                self.action, self.dur_min, self.dur_max
            )));
        }
        if !(0.0..=1.0).contains(&self.include_prob) {
            return Err(ConfigError::invalid(format!(
                "activity '{activity}': step {} include_prob {} outside [0, 1]",
                self.action, self.include_prob
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityTemplate {
    pub name: String,
    pub steps: Vec<ActionStep>,
}

impl ActivityTemplate {
    pub fn new(name: impl Into<String>, steps: Vec<ActionStep>) -> Result<Self, ConfigError> {
        let template = Self {
            name: name.into(),
            steps,
        };
        template.validate()?;
        Ok(template)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.steps.is_empty() {
            return Err(ConfigError::invalid(format!("activity '{}' has no steps", self.name)));
        }
        for step in &self.steps {
            step.validate(&self.name)?;
        }
        if !self.steps.iter().any(|s| s.include_prob == 1.0) {
            return Err(ConfigError::invalid(format!(
                "activity '{}' needs at least one step with include_prob = 1",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageConfig {
    pub name: String,
    pub activities: Vec<(ActivityTemplate, f64)>,
    pub window_budget: u32,
}

impl StageConfig {
    pub fn new(
        name: impl Into<String>,
        activities: Vec<(ActivityTemplate, f64)>,
        window_budget: u32,
    ) -> Result<Self, ConfigError> {
        let stage = Self {
            name: name.into(),
            activities,
            window_budget,
        };
        stage.validate()?;
        Ok(stage)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window_budget < 1 {
            return Err(ConfigError::invalid(format!(
                "stage '{}' has a zero window budget",
                self.name
            )));
        }
        if self.activities.is_empty() {
            return Err(ConfigError::invalid(format!("stage '{}' has no activities", self.name)));
        }
        let mut total = 0.0;
        for (template, p) in &self.activities {
            template.validate()?;
            if !p.is_finite() || *p < 0.0 {
                return Err(ConfigError::invalid(format!(
                    "stage '{}': activity '{}' has invalid probability {p}",
                    self.name, template.name
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(ConfigError::invalid(format!(
                "stage '{}': activity probabilities sum to {total}, expected 1",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatorConfig {
    pub stages: Vec<StageConfig>,
    pub sequence_length_windows: u32,
    pub window_seconds: u32,
    pub base_seed: u64,
}

impl SimulatorConfig {
    pub const DEFAULT_SEQUENCE_LENGTH: u32 = 60;

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.stages.is_empty() {
            return Err(ConfigError::invalid("config declares no stages"));
        }
        if self.sequence_length_windows < 1 {
            return Err(ConfigError::invalid("sequence_length_windows must be >= 1"));
        }
        if self.window_seconds != WINDOW_SECONDS {
            return Err(ConfigError::invalid(format!(
                "window_seconds must be {WINDOW_SECONDS}, got {}",
                self.window_seconds
            )));
        }
        for stage in &self.stages {
            stage.validate()?;
        }
        let budget: u64 = self.stages.iter().map(|s| u64::from(s.window_budget)).sum();
        if budget < u64::from(self.sequence_length_windows) {
            return Err(ConfigError::invalid(format!(
                "stage budgets total {budget} windows, fewer than sequence length {}",
                self.sequence_length_windows
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        file.resolve()
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn stage(&self, name: &str) -> Option<&StageConfig> {
        self.stages.iter().find(|s| s.name == name)
    }
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG_TOML).expect("bundled default config is valid")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default = "default_sequence_length")]
    sequence_length_windows: u32,
    #[serde(default = "default_window_seconds")]
    window_seconds: u32,
    #[serde(default)]
    base_seed: u64,
    #[serde(default, rename = "activity")]
    activities: Vec<ActivityEntry>,
    #[serde(default, rename = "stage")]
    stages: Vec<StageEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivityEntry {
    name: String,
    steps: Vec<StepEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepEntry {
    action: ActionClass,
    dur_min: u32,
    dur_max: u32,
    #[serde(default = "default_include_prob")]
    include_prob: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageEntry {
    name: String,
    window_budget: u32,
    activities: Vec<StageActivityEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageActivityEntry {
    name: String,
    probability: f64,
}

fn default_sequence_length() -> u32 {
    SimulatorConfig::DEFAULT_SEQUENCE_LENGTH
}

fn default_window_seconds() -> u32 {
    WINDOW_SECONDS
}

fn default_include_prob() -> f64 {
    1.0
}

impl ConfigFile {
    fn resolve(self) -> Result<SimulatorConfig, ConfigError> {
        let mut templates: Vec<ActivityTemplate> = Vec::with_capacity(self.activities.len());
        for entry in self.activities {
            if templates.iter().any(|t| t.name == entry.name) {
                return Err(ConfigError::invalid(format!(
                    "activity '{}' declared twice",
                    entry.name
                )));
            }
            let steps = entry
                .steps
                .into_iter()
                .map(|s| ActionStep::new(s.action, s.dur_min, s.dur_max, s.include_prob))
                .collect();
            templates.push(ActivityTemplate::new(entry.name, steps)?);
        }

        let mut stages = Vec::with_capacity(self.stages.len());
        for stage in self.stages {
            let mut activities = Vec::with_capacity(stage.activities.len());
            for a in stage.activities {
                let template = templates.iter().find(|t| t.name == a.name).ok_or_else(|| {
                    ConfigError::invalid(format!(
                        "stage '{}' references undeclared activity '{}'",
                        stage.name, a.name
                    ))
                })?;
                activities.push((template.clone(), a.probability));
            }
            stages.push(StageConfig::new(stage.name, activities, stage.window_budget)?);
        }

        let config = SimulatorConfig {
            stages,
            sequence_length_windows: self.sequence_length_windows,
            window_seconds: self.window_seconds,
            base_seed: self.base_seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_shape() {
        let config = SimulatorConfig::default();
        let names: Vec<_> = config.stages.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["Morning", "Daytime", "Evening"]);
        let budgets: Vec<_> = config.stages.iter().map(|s| s.window_budget).collect();
        assert_eq!(budgets, [15, 30, 15]);
        assert_eq!(config.sequence_length_windows, 60);
        assert_eq!(config.window_seconds, 5);

        let daytime = config.stage("Daytime").unwrap();
        let dist: Vec<_> = daytime
            .activities
            .iter()
            .map(|(t, p)| (t.name.as_str(), *p))
            .collect();
        assert_eq!(
            dist,
            [
                ("Walk-only", 0.27),
                ("Sit-only", 0.27),
                ("Restroom", 0.02),
                ("Work", 0.40),
                ("Drink-only", 0.04)
            ]
        );
    }

    #[test]
    fn default_restroom_template() {
        use ActionClass::*;
        let config = SimulatorConfig::default();
        let (restroom, _) = config.stages[1]
            .activities
            .iter()
            .find(|(t, _)| t.name == "Restroom")
            .unwrap();
        assert_eq!(
            restroom.steps,
            vec![
                ActionStep::always(Walk, 1, 2),
                ActionStep::new(Wash, 1, 1, 0.5),
                ActionStep::always(Sit, 2, 6),
                ActionStep::always(FlushToilet, 1, 1),
                ActionStep::new(Wash, 1, 1, 0.5),
                ActionStep::always(Walk, 1, 2),
            ]
        );
    }

    fn minimal(stage_probs: &str, budget: u32) -> String {
        format!(
            r#"
            sequence_length_windows = 60
            [[activity]]
            name = "A"
            steps = [{{ action = "sit", dur_min = 1, dur_max = 2 }}]
            [[activity]]
            name = "B"
            steps = [{{ action = "walk", dur_min = 1, dur_max = 1 }}]
            [[stage]]
            name = "S"
            window_budget = {budget}
            activities = {stage_probs}
            "#
        )
    }

    #[test]
    fn rejects_probabilities_not_summing_to_one() {
        let text = minimal(r#"[{ name = "A", probability = 0.5 }, { name = "B", probability = 0.4 }]"#, 60);
        let err = SimulatorConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("sum to 0.9"), "{err}");
    }

    #[test]
    fn rejects_short_budget() {
        let text = minimal(r#"[{ name = "A", probability = 1.0 }]"#, 59);
        let err = SimulatorConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("fewer than sequence length"), "{err}");
    }

    #[test]
    fn rejects_unknown_activity_and_action() {
        let text = minimal(r#"[{ name = "C", probability = 1.0 }]"#, 60);
        assert!(SimulatorConfig::from_toml_str(&text).is_err());
        let text = minimal(r#"[{ name = "A", probability = 1.0 }]"#, 60).replace("\"sit\"", "\"run\"");
        let err = SimulatorConfig::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)));
        assert!(err.to_string().contains("run"), "{err}");
    }

    #[test]
    fn template_invariants() {
        use ActionClass::*;
        assert!(ActivityTemplate::new("empty", vec![]).is_err());
        assert!(ActivityTemplate::new("optional", vec![ActionStep::new(Wash, 1, 1, 0.5)]).is_err());
        assert!(ActivityTemplate::new("bad-dur", vec![ActionStep::always(Sit, 3, 2)]).is_err());
        assert!(ActivityTemplate::new("zero-dur", vec![ActionStep::always(Sit, 0, 2)]).is_err());
        assert!(ActivityTemplate::new("bad-p", vec![ActionStep::new(Sit, 1, 1, 1.5)]).is_err());
        assert!(ActivityTemplate::new("ok", vec![ActionStep::always(Sit, 1, 1)]).is_ok());
    }

    #[test]
    fn rejects_other_window_sizes() {
        let text = format!("window_seconds = 10\n{}", minimal(r#"[{ name = "A", probability = 1.0 }]"#, 60));
        assert!(SimulatorConfig::from_toml_str(&text).is_err());
    }
}
