//! Frozen regression baselines: aggregate statistics keyed by section label,
//! plus frozen artifacts (reference coefficient lists). A comparison fails
//! exactly when an aggregate ratio exceeds twice its frozen value.

use crate::experiments::SweepReport;
use biparam_sparse::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Baselines {
    /// `"<label>:<stat>"` → frozen value.
    pub stats: BTreeMap<String, f64>,
    /// Frozen reference payloads (JSON strings) keyed by name.
    #[serde(default)]
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineVerdict {
    pub pass: bool,
    pub lines: Vec<String>,
}

impl Baselines {
    pub fn load(path: &Path) -> Result<Baselines> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("baseline {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("baseline: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::Format(format!("io: {e}")))?;
        }
        fs::write(path, serde_json::to_string_pretty(self).expect("baselines serialize"))
            .map_err(|e| Error::Format(format!("io: {e}")))
    }

    pub fn get(&self, label: &str, stat: &str) -> Option<f64> {
        self.stats.get(&format!("{label}:{stat}")).copied()
    }

    /// Record the aggregates of a report section.
    pub fn freeze(&mut self, report: &SweepReport) {
        let label = &report.label;
        self.stats
            .insert(format!("{label}:max_ratio"), report.aggregates.max_ratio);
        self.stats
            .insert(format!("{label}:mean_ratio"), report.aggregates.mean_ratio);
        for (k, v) in &report.aggregates.extra {
            self.stats.insert(format!("{label}:{k}"), *v);
        }
    }

    /// Pass iff every aggregate ratio stays within 2× its frozen value.
    /// Sections without a frozen entry fail (missing baseline).
    pub fn compare(&self, report: &SweepReport) -> BaselineVerdict {
        let mut lines = Vec::new();
        let mut pass = true;
        for stat in ["max_ratio", "mean_ratio"] {
            let current = match stat {
                "max_ratio" => report.aggregates.max_ratio,
                _ => report.aggregates.mean_ratio,
            };
            match self.get(&report.label, stat) {
                Some(frozen) => {
                    let ok = current <= 2.0 * frozen || current == 0.0;
                    if !ok {
                        pass = false;
                    }
                    lines.push(format!(
                        "{}:{stat} {current} vs frozen {frozen} → {}",
                        report.label,
                        if ok { "pass" } else { "FAIL (exceeds 2x)" }
                    ));
                }
                None => {
                    pass = false;
                    lines.push(format!("{}:{stat} has no frozen baseline", report.label));
                }
            }
        }
        BaselineVerdict { pass, lines }
    }
}
