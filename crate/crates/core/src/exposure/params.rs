use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pathogen and host constants; rates are per hour, volumes in cubic metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiseaseParams {
    /// Coughs per hour (`f`).
    pub cough_frequency: f64,
    /// Droplet volume per cough in m^3 (`v`).
    pub cough_volume: f64,
    /// Infectious particles per m^3 of droplet fluid (`c`).
    pub concentration: f64,
    /// Pulmonary ventilation rate in m^3/hour (`q`).
    pub ventilation: f64,
    /// Chance that one inhaled particle initiates infection.
    pub sigma: f64,
}

impl DiseaseParams {
    /// Influenza-like constants with the concentration taken verbatim as 3.7e6 per m^3.
    pub fn as_printed() -> Self {
        Self {
            cough_frequency: 18.0,
            cough_volume: 6.7e-9,
            concentration: 3.7e6,
            ventilation: 7.5e-3 * 60.0,
            sigma: 0.693,
        }
    }

    /// Influenza-like constants with the respiratory-fluid concentration read as
    /// 3.7e6 per millilitre (3.7e12 per m^3). Used by the experiment presets.
    pub fn influenza() -> Self {
        Self {
            concentration: 3.7e12,
            ..Self::as_printed()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("cough_frequency", self.cough_frequency),
            ("cough_volume", self.cough_volume),
            ("ventilation", self.ventilation),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.concentration >= 0.0 && self.concentration.is_finite()) {
            return Err(Error::config("concentration", "must be non-negative"));
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::config("sigma", format!("must lie in (0, 1], got {}", self.sigma)));
        }
        Ok(())
    }
}

impl Default for DiseaseParams {
    fn default() -> Self {
        Self::influenza()
    }
}

/// Particles emitted per hour, `n = 0.2 f v c`.
pub fn particle_rate(params: &DiseaseParams) -> f64 {
    0.2 * params.cough_frequency * params.cough_volume * params.concentration
}
