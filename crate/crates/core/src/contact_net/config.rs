use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MINUTES_PER_DAY: f64 = 1440.0;

/// Parameters of the activity-driven SPDT network generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Number of nodes `M`.
    pub nodes: u32,
    /// Horizon `T` in discrete steps.
    pub steps: u32,
    /// Real-time length of one step in minutes. Must divide a day evenly.
    pub step_minutes: f64,
    /// Geometric scale of active-period lengths.
    pub lambda: f64,
    /// Power-law exponent of activation potentials.
    pub alpha: f64,
    pub rho_bounds: (f64, f64),
    /// Power-law exponent of public-place propensities.
    pub beta: f64,
    pub mu_bounds: (f64, f64),
    /// Indirect window appended to each active period, in steps.
    pub delta: u32,
    /// Link-creation probability of the arrival-delay law.
    pub p_c: f64,
    /// Link-breaking probability of the stay-duration law.
    pub p_b: f64,
    /// Memory strength of neighbor selection.
    pub theta: f64,
    /// Chance of reciprocating an inbound selection.
    pub phi: f64,
    pub master_seed: u64,
}

fn open_unit(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn ordered_unit_bounds(field: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if lo > 0.0 && hi < 1.0 && lo < hi {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must satisfy 0 < lo < hi < 1, got ({lo}, {hi})"),
        ))
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::config("nodes", "must be at least 2"));
        }
        if self.steps < 1 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if !(self.step_minutes > 0.0 && self.step_minutes <= MINUTES_PER_DAY) {
            return Err(Error::config("step_minutes", "must lie in (0, 1440]"));
        }
        let per_day = MINUTES_PER_DAY / self.step_minutes;
        if (per_day - per_day.round()).abs() > 1e-9 {
            return Err(Error::config(
                "step_minutes",
                format!("must divide 1440 evenly, got {}", self.step_minutes),
            ));
        }
        open_unit("lambda", self.lambda)?;
        open_unit("p_c", self.p_c)?;
        open_unit("p_b", self.p_b)?;
        ordered_unit_bounds("rho_bounds", self.rho_bounds)?;
        ordered_unit_bounds("mu_bounds", self.mu_bounds)?;
        if !self.alpha.is_finite() {
            return Err(Error::config("alpha", "must be finite"));
        }
        if !self.beta.is_finite() {
            return Err(Error::config("beta", "must be finite"));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::config("theta", "must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(Error::config("phi", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn steps_per_day(&self) -> u32 {
        (MINUTES_PER_DAY / self.step_minutes).round() as u32
    }

    pub fn step_hours(&self) -> f64 {
        self.step_minutes / 60.0
    }

    /// Number of (possibly partial) days covered by the horizon.
    pub fn days(&self) -> u32 {
        self.steps.div_ceil(self.steps_per_day())
    }

    /// Desk-scale network: 30,000 nodes over 32 days of 5-minute steps.
    pub fn desk() -> Self {
        Self {
            nodes: 30_000,
            steps: 32 * 288,
            step_minutes: 5.0,
            lambda: 0.25,
            alpha: 1.5,
            rho_bounds: (0.001, 0.05),
            beta: 1.5,
            mu_bounds: (0.05, 0.8),
            delta: 4,
            p_c: 0.1,
            p_b: 0.1,
            theta: 5.0,
            phi: 0.5,
            master_seed: 20_190_601,
        }
    }

    /// The same generator law at 300,000 nodes.
    pub fn paper_scale() -> Self {
        Self {
            nodes: 300_000,
            ..Self::desk()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        GeneratorConfig::desk().validate().unwrap();
        GeneratorConfig::paper_scale().validate().unwrap();
        assert_eq!(GeneratorConfig::desk().days(), 32);
    }

    #[test]
    fn field_level_errors() {
        let mut c = GeneratorConfig::desk();
        c.mu_bounds = (0.5, 0.5);
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("mu_bounds"), "{e}");
        let mut c = GeneratorConfig::desk();
        c.step_minutes = 7.0;
        assert!(c.validate().unwrap_err().to_string().contains("step_minutes"));
        let mut c = GeneratorConfig::desk();
        c.nodes = 1;
        assert!(c.validate().is_err());
    }
}
