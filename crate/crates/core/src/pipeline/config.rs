use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::CostModel;
use crate::rom::RomSettings;
use crate::testbed::{OxygenModel, QoiKind};

use super::synthetic::SyntheticModel;

/// Declared surrogate training cost `t(n) = per_sample n + fixed`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingCostLaw {
    pub per_sample: f64,
    pub fixed: f64,
}

impl Default for TrainingCostLaw {
    fn default() -> Self {
        Self {
            per_sample: 0.5,
            fixed: 2.0,
        }
    }
}

impl TrainingCostLaw {
    pub fn cost(&self, n: usize) -> f64 {
        self.per_sample * n as f64 + self.fixed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Oxygen(OxygenModel),
    Synthetic(SyntheticModel),
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Oxygen(OxygenModel::default())
    }
}

fn default_gamma() -> f64 {
    0.99
}

fn default_qoi() -> QoiKind {
    QoiKind::AvgPo2
}

fn default_workers() -> usize {
    1
}

/// Everything a campaign needs; the report is a pure function of this.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub budget: f64,
    pub cost: CostModel,
    #[serde(default)]
    pub training_cost: TrainingCostLaw,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_qoi")]
    pub qoi: QoiKind,
    /// Preliminary FOM samples.
    pub n0: usize,
    /// Preliminary training sizes; six evenly spaced sizes when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub rom: RomSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Record wall-clock timings (reporting only).
    #[serde(default)]
    pub measure: bool,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl CampaignConfig {
    /// A small configuration around the synthetic model.
    pub fn synthetic(budget: f64, n0: usize, seed: u64) -> Self {
        Self {
            budget,
            cost: CostModel::new(0.05, 1.0).expect("valid costs"),
            training_cost: TrainingCostLaw::default(),
            gamma: default_gamma(),
            qoi: QoiKind::FieldMean,
            n0,
            subset_sizes: None,
            rom: RomSettings::default(),
            seed,
            workers: 1,
            measure: false,
            model: ModelConfig::Synthetic(SyntheticModel::default()),
            output_dir: None,
        }
    }

    /// The oxygen testbed with default ranges.
    pub fn oxygen(budget: f64, n0: usize, seed: u64) -> Self {
        Self {
            qoi: QoiKind::AvgPo2,
            model: ModelConfig::Oxygen(OxygenModel::default()),
            ..Self::synthetic(budget, n0, seed)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Preliminary training sizes, explicit or defaulted.
    pub fn subset_sizes(&self) -> Vec<usize> {
        if let Some(s) = &self.subset_sizes {
            return s.clone();
        }
        let lo = 0.2 * self.n0 as f64;
        let hi = 0.67 * self.n0 as f64;
        let mut sizes: Vec<usize> = (0..6)
            .map(|j| (lo + (hi - lo) * j as f64 / 5.0).round().max(1.0) as usize)
            .collect();
        sizes.dedup();
        sizes
    }

    /// Full check, including that the budget covers the preliminary samples.
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if self.budget <= self.n0 as f64 * self.cost.fom_sample() {
            return Err(Error::Budget(format!(
                "budget {} does not exceed the preliminary cost n0 (g + w0) = {}",
                self.budget,
                self.n0 as f64 * self.cost.fom_sample()
            )));
        }
        Ok(())
    }

    /// Every check except the preliminary-cost bound.
    pub fn validate_shape(&self) -> Result<()> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::Config(format!("budget must be positive, got {}", self.budget)));
        }
        self.cost
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let law = self.training_cost;
        if !(law.per_sample >= 0.0 && law.fixed >= 0.0 && law.per_sample.is_finite() && law.fixed.is_finite()) {
            return Err(Error::Config(format!("training cost law must be nonnegative: {law:?}")));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma = {} outside (0, 1)", self.gamma)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.rom.validate()?;
        let sizes = self.subset_sizes();
        if sizes.len() < 3 {
            return Err(Error::Config(format!(
                "need at least 3 distinct preliminary sizes, got {sizes:?}"
            )));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
            return Err(Error::Config(format!(
                "preliminary sizes must be positive and strictly increasing: {sizes:?}"
            )));
        }
        let n_k = *sizes.last().expect("nonempty");
        if n_k + 3 > self.n0 {
            return Err(Error::Config(format!(
                "largest preliminary size {n_k} leaves fewer than 3 held-out samples of n0 = {}",
                self.n0
            )));
        }
        match &self.model {
            ModelConfig::Oxygen(m) => {
                m.validate_config()?;
                if self.qoi == QoiKind::FieldMean {
                    return Err(Error::Config("field_mean is reserved for the synthetic model".into()));
                }
            }
            ModelConfig::Synthetic(m) => {
                m.validate_config()?;
                if self.qoi != QoiKind::FieldMean {
                    return Err(Error::Config(format!(
                        "the synthetic model supports only the field_mean qoi, got {}",
                        self.qoi
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes_span_the_preliminary_range() {
        let c = CampaignConfig::synthetic(1e4, 300, 1);
        assert_eq!(c.subset_sizes(), vec![60, 88, 116, 145, 173, 201]);
        c.validate().unwrap();
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let c = CampaignConfig::oxygen(2000.0, 60, 9);
        let text = serde_json::to_string(&c).unwrap();
        let back = CampaignConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        let bad = text.replacen("\"budget\"", "\"budjet\"", 1);
        assert!(matches!(CampaignConfig::from_json(&bad), Err(Error::Config(_))));
        let nested = r#"{"budget": 100, "cost": {"g": 0.1, "w0": 1}, "n0": 20,
            "model": {"kind": "synthetic", "mean": 1, "bogus": 2}}"#;
        assert!(CampaignConfig::from_json(nested).is_err());
    }

    #[test]
    fn minimal_json_fills_defaults() {
        let c = CampaignConfig::from_json(
            r#"{"budget": 500, "cost": {"g": 0.05, "w0": 1}, "n0": 40, "qoi": "field_mean",
                "model": {"kind": "synthetic"}}"#,
        )
        .unwrap();
        assert_eq!(c.gamma, 0.99);
        assert_eq!(c.workers, 1);
        c.validate().unwrap();
    }

    #[test]
    fn invariants_are_enforced() {
        let mut c = CampaignConfig::synthetic(1e4, 30, 1);
        c.subset_sizes = Some(vec![5, 10, 28]);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = CampaignConfig::synthetic(30.0, 30, 1);
        assert!(matches!(c.validate(), Err(Error::Budget(_))));
        let mut c = CampaignConfig::synthetic(1e4, 30, 1);
        c.qoi = QoiKind::AvgPo2;
        assert!(c.validate().is_err());
    }
}
