//! Random laws of the activity-driven generator.
//!
//! All step-valued laws live on the positive integers except the link delay,
//! which starts at zero.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};

/// Geometric law on `{1, 2, 3, ...}` with `Pr(k) = (1-p)^(k-1) p`.
#[derive(Debug, Clone, Copy)]
pub struct StepGeometric {
    p: f64,
    inner: Geometric,
}

impl StepGeometric {
    pub fn new(p: f64, field: &str) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::config(field, format!("must lie in (0, 1], got {p}")));
        }
        let inner = Geometric::new(p).map_err(|e| Error::config(field, e))?;
        Ok(Self { p, inner })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            0.0
        } else {
            (1.0 - self.p).powi((k - 1) as i32) * self.p
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let failures = self.inner.sample(rng);
        failures.saturating_add(1).min(u32::MAX as u64) as u32
    }
}

fn open_unit(value: f64, field: &str) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must lie in (0, 1), got {value}")))
    }
}

/// Active-period length `t_a ~ geometric(lambda)`.
pub fn sample_active_duration<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u32> {
    open_unit(lambda, "lambda")?;
    Ok(StepGeometric::new(lambda, "lambda")?.sample(rng))
}

/// Link duration `t_d ~ geometric(p_b)`.
pub fn sample_link_duration<R: Rng + ?Sized>(p_b: f64, rng: &mut R) -> Result<u32> {
    open_unit(p_b, "p_b")?;
    Ok(StepGeometric::new(p_b, "p_b")?.sample(rng))
}

/// Number of links per active period, `Pr(d) = (1-mu) mu^(d-1)`.
#[derive(Debug, Clone, Copy)]
pub struct DegreeLaw(StepGeometric);

impl DegreeLaw {
    pub fn new(mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::config("mu", format!("must lie in [0, 1), got {mu}")));
        }
        Ok(Self(StepGeometric::new(1.0 - mu, "mu")?))
    }

    pub fn pmf(&self, d: u64) -> f64 {
        self.0.pmf(d)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.0.sample(rng)
    }
}

pub fn sample_degree<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> Result<u32> {
    Ok(DegreeLaw::new(mu)?.sample(rng))
}

/// Density proportional to `x^(-exponent)` on `[lo, hi]`, sampled by inverse CDF.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedPowerLaw {
    exponent: f64,
    lo: f64,
    hi: f64,
}

impl TruncatedPowerLaw {
    pub fn new(exponent: f64, lo: f64, hi: f64, field: &str) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(Error::config(field, "exponent must be finite"));
        }
        if !(lo > 0.0 && hi < 1.0 && lo < hi) {
            return Err(Error::config(
                field,
                format!("bounds must satisfy 0 < lo < hi < 1, got ({lo}, {hi})"),
            ));
        }
        Ok(Self { exponent, lo, hi })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn near_log(&self) -> bool {
        (1.0 - self.exponent).abs() < 1e-9
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        if self.near_log() {
            (x / self.lo).ln() / (self.hi / self.lo).ln()
        } else {
            let e = 1.0 - self.exponent;
            (x.powf(e) - self.lo.powf(e)) / (self.hi.powf(e) - self.lo.powf(e))
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let x = if self.near_log() {
            self.lo * (self.hi / self.lo).powf(u)
        } else {
            let e = 1.0 - self.exponent;
            let (a, b) = (self.lo.powf(e), self.hi.powf(e));
            (a + u * (b - a)).powf(1.0 / e)
        };
        x.clamp(self.lo, self.hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

/// Draw an activation potential or public-place propensity from its truncated power law.
pub fn sample_heterogeneity<R: Rng + ?Sized>(
    exponent: f64,
    bounds: (f64, f64),
    rng: &mut R,
) -> Result<f64> {
    Ok(TruncatedPowerLaw::new(exponent, bounds.0, bounds.1, "bounds")?.sample(rng))
}

/// Arrival delay on `{0, ..., window-1}` with
/// `Pr(t_c) = p_c (1-p_c)^t_c / (1 - (1-p_c)^window)`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedGeometric {
    p: f64,
    window: u32,
    ln_q: f64,
    mass: f64,
}

impl TruncatedGeometric {
    pub fn new(p: f64, window: u32) -> Result<Self> {
        open_unit(p, "p_c")?;
        if window < 1 {
            return Err(Error::Internal(format!(
                "link-delay window must be at least 1 step, got {window}"
            )));
        }
        let ln_q = (-p).ln_1p();
        // 1 - (1-p)^window
        let mass = -(window as f64 * ln_q).exp_m1();
        Ok(Self {
            p,
            window,
            ln_q,
            mass,
        })
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k >= self.window as u64 {
            return 0.0;
        }
        self.p * (k as f64 * self.ln_q).exp() / self.mass
    }

    pub fn cdf(&self, k: u64) -> f64 {
        if k + 1 >= self.window as u64 {
            return 1.0;
        }
        -(((k + 1) as f64) * self.ln_q).exp_m1() / self.mass
    }

    pub fn quantile(&self, u: f64) -> u32 {
        let k = ((-u * self.mass).ln_1p() / self.ln_q).floor();
        if k.is_finite() && k >= 0.0 {
            (k as u64).min(self.window as u64 - 1) as u32
        } else {
            0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.quantile(rng.random::<f64>())
    }
}

pub fn sample_link_delay<R: Rng + ?Sized>(p_c: f64, window: u32, rng: &mut R) -> Result<u32> {
    Ok(TruncatedGeometric::new(p_c, window)?.sample(rng))
}
