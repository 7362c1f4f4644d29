//! Experiment configuration: kinds, parameter defaults, and the JSON config
//! file format. CLI flags override config-file values, which override the
//! defaults here.

use biparam_sparse::operators::Complexity;
use biparam_sparse::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Default C₁ for the stopping-time selection, fixed by the one-off
/// calibration over the seeded corpus (smallest power of two keeping every
/// node's square-trigger set within a quarter of the node; see
/// `corpus::calibration_corpus_1d` and the `calibration` test).
pub const DEFAULT_C1: f64 = 8.0;

/// Default C₂ for the stopping-time weight condition.
pub const DEFAULT_C2: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MartingaleDomination,
    ShiftDomination,
    WeightedNorm,
    WeakType,
    OneparamSparse,
    Covering,
    GridAverage,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::MartingaleDomination => "martingale_domination",
            ExperimentKind::ShiftDomination => "shift_domination",
            ExperimentKind::WeightedNorm => "weighted_norm",
            ExperimentKind::WeakType => "weak_type",
            ExperimentKind::OneparamSparse => "oneparam_sparse",
            ExperimentKind::Covering => "covering",
            ExperimentKind::GridAverage => "grid_average",
        }
    }

    pub fn all() -> [ExperimentKind; 7] {
        [
            ExperimentKind::MartingaleDomination,
            ExperimentKind::ShiftDomination,
            ExperimentKind::WeightedNorm,
            ExperimentKind::WeakType,
            ExperimentKind::OneparamSparse,
            ExperimentKind::Covering,
            ExperimentKind::GridAverage,
        ]
    }
}

/// How test-function coefficients are produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "spec", rename_all = "snake_case")]
pub enum TestFunctionSpec {
    /// `entries` distinct rectangles with seeded values.
    RandomSparse { entries: usize },
    /// One unit coefficient at the given rectangle.
    SingleHaar { x_depth: u8, x_index: u32, y_depth: u8, y_index: u32 },
    /// Product of two seeded 1-D profiles.
    Tensor { entries_x: usize, entries_y: usize },
    /// A chain of nested rectangles with alternating signs.
    AdversarialNested { chain: usize },
}

impl Default for TestFunctionSpec {
    fn default() -> Self {
        TestFunctionSpec::RandomSparse { entries: 24 }
    }
}

/// Weight selection: cycle the built-in corpus, pick one member by name, or
/// load a grid-function file (JSON or flat binary).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    #[default]
    Corpus,
    Named(String),
    File(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub depth_x: u8,
    pub depth_y: u8,
    /// 1-D experiments use this axis depth.
    pub depth_1d: u8,
    pub trials: usize,
    pub seed: u64,
    pub c: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub p: f64,
    pub complexity: Complexity,
    /// "max_magnitude_random_sign" or "haar_of_identity".
    pub generator: String,
    pub test_function: TestFunctionSpec,
    pub weight: WeightSpec,
    /// Rectangle family size for covering experiments.
    pub rect_count: usize,
    /// Shifted grids averaged in grid_average experiments.
    pub grid_count: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::MartingaleDomination,
            depth_x: 5,
            depth_y: 5,
            depth_1d: 8,
            trials: 100,
            seed: 1,
            c: 4.0,
            beta: 0.75,
            c1: DEFAULT_C1,
            c2: DEFAULT_C2,
            epsilon: 0.05,
            p: 2.0,
            complexity: Complexity::new(1, 0, 0, 1),
            generator: "max_magnitude_random_sign".to_string(),
            test_function: TestFunctionSpec::default(),
            weight: WeightSpec::default(),
            rect_count: 50,
            grid_count: 16,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn for_kind(kind: ExperimentKind) -> Self {
        ExperimentConfig { kind, ..Default::default() }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth_x == 0 || self.depth_x > 12 || self.depth_y == 0 || self.depth_y > 12 {
            return Err(Error::InvalidParameter(format!(
                "grid depths ({}, {}) outside 1..=12",
                self.depth_x, self.depth_y
            )));
        }
        if self.depth_1d == 0 || self.depth_1d > 16 {
            return Err(Error::InvalidParameter(format!(
                "1-D depth {} outside 1..=16",
                self.depth_1d
            )));
        }
        if self.c < 4.0 {
            return Err(Error::InvalidParameter(format!("c = {} must be ≥ 4", self.c)));
        }
        if !(self.beta > 0.5 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "β = {} outside (1/2, 1)",
                self.beta
            )));
        }
        if self.c2 <= 1.0 {
            return Err(Error::InvalidParameter(format!("C₂ = {} must exceed 1", self.c2)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ε = {} outside (0, 1)",
                self.epsilon
            )));
        }
        if self.p <= 1.0 {
            return Err(Error::InvalidParameter(format!("p = {} must exceed 1", self.p)));
        }
        let comp = &self.complexity;
        let max_entry = comp.i.0.max(comp.i.1).max(comp.j.0).max(comp.j.1);
        if max_entry as u32 + 1 > self.depth_x.min(self.depth_y) as u32 {
            return Err(Error::InvalidParameter(format!(
                "complexity {comp:?} unresolvable at depth ({}, {})",
                self.depth_x, self.depth_y
            )));
        }
        match self.generator.as_str() {
            "max_magnitude_random_sign" | "haar_of_identity" => {}
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown shift generator '{other}'"
                )))
            }
        }
        if let TestFunctionSpec::RandomSparse { entries } = self.test_function {
            let rects = ((1u64 << self.depth_x) - 1) * ((1u64 << self.depth_y) - 1);
            if entries as u64 > rects {
                return Err(Error::InvalidParameter(format!(
                    "{entries} entries exceed the {rects} available rectangles"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        for kind in ExperimentKind::all() {
            assert!(ExperimentConfig::for_kind(kind).validate().is_ok());
        }
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::ShiftDomination);
        cfg.complexity = Complexity::new(2, 1, 0, 2);
        cfg.weight = WeightSpec::Named("power_0.5_0".into());
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back.complexity, cfg.complexity);
        assert_eq!(back.weight, cfg.weight);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut cfg = ExperimentConfig { beta: 0.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.beta = 0.75;
        cfg.c = 2.0;
        assert!(cfg.validate().is_err());
        cfg.c = 4.0;
        cfg.test_function = TestFunctionSpec::RandomSparse { entries: 10_000 };
        cfg.depth_x = 3;
        cfg.depth_y = 3;
        assert!(cfg.validate().is_err());
    }
}
