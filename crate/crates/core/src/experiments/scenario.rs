use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seir::EpidemicConfig;

/// Environment and infectivity settings that distinguish one study scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Mean infectivity decay rate, per minute.
    pub b_mean: f64,
    /// Median air exchange rate, per hour.
    pub g_median: f64,
    pub sigma: f64,
}

impl ScenarioConfig {
    pub fn s1() -> Self {
        Self {
            name: "S-1".into(),
            b_mean: 0.01,
            g_median: 1.0,
            sigma: 0.69,
        }
    }

    pub fn s2() -> Self {
        Self {
            name: "S-2".into(),
            g_median: 0.5,
            ..Self::s1()
        }
    }

    pub fn s3() -> Self {
        Self {
            name: "S-3".into(),
            b_mean: 0.005,
            sigma: 0.80,
            ..Self::s1()
        }
    }

    pub fn standard() -> Vec<Self> {
        vec![Self::s1(), Self::s2(), Self::s3()]
    }

    pub fn by_name(name: &str) -> Option<Self> {
        Self::standard().into_iter().find(|s| s.name == name)
    }

    /// `base` with this scenario's environment targets and σ.
    pub fn apply(&self, base: &EpidemicConfig) -> Result<EpidemicConfig> {
        if self.name.is_empty() {
            return Err(Error::config("scenario.name", "must not be empty"));
        }
        let mut cfg = base.clone();
        cfg.env.b_mean = self.b_mean;
        cfg.env.g_median = self.g_median;
        cfg.disease.sigma = self.sigma;
        Ok(cfg)
    }
}
