use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the removal rate `r` is formed from the decay rate `b` and the air exchange rate `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RemovalMode {
    /// `r = (1-b)(1-g)` on the raw numeric values, floored at `literal_floor`.
    #[serde(rename = "paper-literal")]
    PaperLiteral,
    /// `r = 60 b + g` per hour, with `b` per minute and `g` per hour.
    #[serde(rename = "additive-physical")]
    AdditivePhysical,
}

fn default_literal_floor() -> f64 {
    1e-6
}

/// Ranges and targets from which per-link environments are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    /// Infectivity decay rate range, per minute.
    pub b_range: (f64, f64),
    pub b_mean: f64,
    /// Air exchange rate range, per hour.
    pub g_range: (f64, f64),
    pub g_median: f64,
    /// Radius of the proximity cylinder in metres.
    pub proximity_radius: f64,
    pub ceiling_height: f64,
    pub r_mode: RemovalMode,
    /// Smallest removal rate produced by the literal formula.
    #[serde(default = "default_literal_floor")]
    pub literal_floor: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            b_range: (0.005, 0.05),
            b_mean: 0.01,
            g_range: (0.25, 5.0),
            g_median: 1.0,
            proximity_radius: 40.0,
            ceiling_height: 3.0,
            r_mode: RemovalMode::PaperLiteral,
            literal_floor: default_literal_floor(),
        }
    }
}

/// Particle-removal environment of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentSample {
    pub b: f64,
    pub g: f64,
    /// Removal rate used by the concentration dynamics.
    pub r: f64,
    /// Proximity volume in m^3.
    pub volume: f64,
}

/// Mean of the unit-width truncated exponential with dimensionless rate `s`.
fn unit_truncexp_mean(s: f64) -> f64 {
    if s.abs() < 1e-6 {
        return 0.5 - s / 12.0;
    }
    1.0 / s - 1.0 / s.exp_m1()
}

/// Rate `s` whose unit truncated exponential has mean `target` in (0, 1).
fn solve_unit_rate(target: f64) -> f64 {
    let (mut lo, mut hi) = (-1e7, 1e7);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // Mean decreases with the rate.
        if unit_truncexp_mean(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse CDF of the unit truncated exponential with rate `s > 0`.
fn unit_truncexp_quantile(s: f64, u: f64) -> f64 {
    if s < 1e-12 {
        return u;
    }
    (-(u * (-s).exp_m1()).ln_1p() / s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
enum DecayLaw {
    Constant(f64),
    TruncExp { lo: f64, width: f64, rate: f64 },
}

/// Pre-solved environment law for repeated per-link draws.
#[derive(Debug, Clone)]
pub struct EnvironmentSampler {
    cfg: EnvConfig,
    decay: DecayLaw,
    volume: f64,
}

impl EnvironmentSampler {
    pub fn new(cfg: &EnvConfig) -> Result<Self> {
        let (b_lo, b_hi) = cfg.b_range;
        if !(b_lo >= 0.0 && b_lo <= b_hi && b_hi.is_finite()) {
            return Err(Error::config("b_range", format!("must be an ordered non-negative range, got ({b_lo}, {b_hi})")));
        }
        if !(cfg.b_mean >= b_lo && cfg.b_mean <= b_hi) {
            return Err(Error::config(
                "b_mean",
                format!("{} is not attainable on [{b_lo}, {b_hi}]", cfg.b_mean),
            ));
        }
        let (g_lo, g_hi) = cfg.g_range;
        if !(g_lo >= 0.0 && g_lo <= g_hi && g_hi.is_finite()) {
            return Err(Error::config("g_range", format!("must be an ordered non-negative range, got ({g_lo}, {g_hi})")));
        }
        if !(cfg.g_median >= g_lo && cfg.g_median <= g_hi) {
            return Err(Error::config(
                "g_median",
                format!("{} is not attainable on [{g_lo}, {g_hi}]", cfg.g_median),
            ));
        }
        if !(cfg.proximity_radius > 0.0 && cfg.proximity_radius.is_finite()) {
            return Err(Error::config("proximity_radius", "must be positive"));
        }
        if !(cfg.ceiling_height > 0.0 && cfg.ceiling_height.is_finite()) {
            return Err(Error::config("ceiling_height", "must be positive"));
        }
        if !(cfg.literal_floor > 0.0) {
            return Err(Error::config("literal_floor", "must be positive"));
        }
        let width = b_hi - b_lo;
        let target = if width > 0.0 { (cfg.b_mean - b_lo) / width } else { 0.0 };
        let decay = if width == 0.0 || target <= 0.0 {
            DecayLaw::Constant(b_lo)
        } else if target >= 1.0 {
            DecayLaw::Constant(b_hi)
        } else {
            DecayLaw::TruncExp {
                lo: b_lo,
                width,
                rate: solve_unit_rate(target),
            }
        };
        Ok(Self {
            cfg: cfg.clone(),
            decay,
            volume: PI * cfg.proximity_radius.powi(2) * cfg.ceiling_height,
        })
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn decay_rate(&self, u: f64) -> f64 {
        match self.decay {
            DecayLaw::Constant(b) => b,
            DecayLaw::TruncExp { lo, width, rate } => {
                if rate >= 0.0 {
                    lo + width * unit_truncexp_quantile(rate, u)
                } else {
                    lo + width * (1.0 - unit_truncexp_quantile(-rate, u))
                }
            }
        }
    }

    /// Equal mixture of uniforms below and above the median.
    pub fn air_exchange_rate(&self, u: f64) -> f64 {
        let (lo, hi) = self.cfg.g_range;
        let m = self.cfg.g_median;
        if u < 0.5 {
            lo + (m - lo) * (2.0 * u)
        } else {
            m + (hi - m) * (2.0 * u - 1.0)
        }
    }

    pub fn removal_rate(&self, b: f64, g: f64) -> f64 {
        match self.cfg.r_mode {
            RemovalMode::PaperLiteral => ((1.0 - b) * (1.0 - g)).max(self.cfg.literal_floor),
            RemovalMode::AdditivePhysical => 60.0 * b + g,
        }
    }

    /// Environment from two uniforms in `[0, 1)`.
    pub fn from_uniforms(&self, u_b: f64, u_g: f64) -> EnvironmentSample {
        let b = self.decay_rate(u_b);
        let g = self.air_exchange_rate(u_g);
        EnvironmentSample {
            b,
            g,
            r: self.removal_rate(b, g),
            volume: self.volume,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvironmentSample {
        let u_b = rng.random::<f64>();
        let u_g = rng.random::<f64>();
        self.from_uniforms(u_b, u_g)
    }
}

pub fn sample_environment<R: Rng + ?Sized>(cfg: &EnvConfig, rng: &mut R) -> Result<EnvironmentSample> {
    Ok(EnvironmentSampler::new(cfg)?.sample(rng))
}
