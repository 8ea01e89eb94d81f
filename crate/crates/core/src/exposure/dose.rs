//! Inhaled-particle doses for SPDT links.
//!
//! While the host is present the proximity concentration follows
//! `V dN/dt = n - N r`, so `N_t = (n/r)(1 - exp(-r t / V))`; after the host
//! leaves it decays as `V dN/dt = -N r`. A neighbor present on `[t_c, t_c + t_d)`
//! inhales `q` times the integral of `N` over its stay. The closed forms below
//! are rearranged around `expm1` so they stay accurate when `r t / V` is tiny,
//! which is the usual regime for a 15,000 m^3 proximity.

use super::environment::EnvironmentSample;
use super::params::{particle_rate, DiseaseParams};
use crate::error::{Error, Result};

/// Link timing in hours, relative to the host's arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkTiming {
    /// `t_a`
    pub host_stay: f64,
    /// `t_c`
    pub arrival_delay: f64,
    /// `t_d`
    pub neighbor_stay: f64,
}

impl LinkTiming {
    pub fn new(host_stay: f64, arrival_delay: f64, neighbor_stay: f64) -> Self {
        Self {
            host_stay,
            arrival_delay,
            neighbor_stay,
        }
    }

    pub fn case(&self) -> LinkCase {
        if self.arrival_delay >= self.host_stay {
            LinkCase::IndirectOnly
        } else if self.neighbor_departure() <= self.host_stay {
            LinkCase::DirectOnly
        } else {
            LinkCase::DirectAndIndirect
        }
    }

    /// `t_c + t_d`, snapped onto `t_a` when the two differ only by rounding
    /// from step-to-hour conversion.
    pub fn neighbor_departure(&self) -> f64 {
        let end = self.arrival_delay + self.neighbor_stay;
        if (end - self.host_stay).abs() <= 1e-12 * self.host_stay {
            self.host_stay
        } else {
            end
        }
    }

    fn check(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if ok(self.host_stay) && ok(self.arrival_delay) && ok(self.neighbor_stay) {
            Ok(())
        } else {
            Err(Error::Internal(format!("link timing must be finite and non-negative: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkCase {
    /// The neighbor leaves before the host does.
    DirectOnly,
    /// The neighbor overlaps the host and stays on after it leaves.
    DirectAndIndirect,
    /// The neighbor arrives after the host has left.
    IndirectOnly,
}

pub fn classify_link_case(t_a: f64, t_c: f64, t_d: f64) -> LinkCase {
    if t_c >= t_a {
        LinkCase::IndirectOnly
    } else if t_c + t_d <= t_a {
        LinkCase::DirectOnly
    } else {
        LinkCase::DirectAndIndirect
    }
}

/// Doses of one link, in particles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkExposure {
    pub direct: f64,
    pub indirect: f64,
    pub total: f64,
}

/// `(1 - e^-x) / x`, equal to 1 at 0.
#[inline]
fn growth_factor(x: f64) -> f64 {
    if x.abs() < 1e-300 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(x - 1 + e^-x) / x^2`, equal to 1/2 at 0.
#[inline]
fn ramp_factor(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // Alternating Taylor series; the x^7 term is below 1e-19.
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 3..=9 {
            term *= -x / k as f64;
            sum += term;
        }
        sum
    } else {
        (x + (-x).exp_m1()) / (x * x)
    }
}

/// Emission and inhalation rates combined with one environment.
#[derive(Debug, Clone, Copy)]
pub struct DoseKernel {
    /// Particles emitted per hour.
    pub emission: f64,
    /// Inhaled volume per hour.
    pub ventilation: f64,
    pub removal: f64,
    pub volume: f64,
}

impl DoseKernel {
    pub fn new(params: &DiseaseParams, env: &EnvironmentSample) -> Result<Self> {
        Self::from_parts(particle_rate(params), params.ventilation, env.r, env.volume)
    }

    pub fn from_parts(emission: f64, ventilation: f64, removal: f64, volume: f64) -> Result<Self> {
        if !(removal > 0.0 && removal.is_finite()) {
            return Err(Error::Environment(format!("removal rate must be positive, got {removal}")));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::Environment(format!("proximity volume must be positive, got {volume}")));
        }
        Ok(Self {
            emission,
            ventilation,
            removal,
            volume,
        })
    }

    fn decay_per_hour(&self) -> f64 {
        self.removal / self.volume
    }

    /// Concentration `t` hours after the host arrived, host still present.
    pub fn concentration(&self, t: f64) -> f64 {
        self.emission / self.volume * t * growth_factor(self.decay_per_hour() * t)
    }

    /// Dose inhaled on the co-present interval `[t_c, min(t_c + t_d, t_a)]`.
    pub fn direct(&self, timing: &LinkTiming) -> f64 {
        let from = timing.arrival_delay;
        let to = timing.neighbor_departure().min(timing.host_stay);
        if to <= from {
            return 0.0;
        }
        let k = self.decay_per_hour();
        let dose = self.ventilation * self.emission / self.volume
            * (to * to * ramp_factor(k * to) - from * from * ramp_factor(k * from));
        dose.max(0.0)
    }

    /// Dose inhaled after the host left, on `[max(t_c, t_a), t_c + t_d]`.
    pub fn indirect(&self, timing: &LinkTiming) -> f64 {
        let t_a = timing.host_stay;
        let from = timing.arrival_delay.max(t_a);
        let to = timing.neighbor_departure();
        if to <= from {
            return 0.0;
        }
        let k = self.decay_per_hour();
        let at_departure = self.concentration(t_a);
        let span = to - from;
        self.ventilation * at_departure * (-k * (from - t_a)).exp() * span * growth_factor(k * span)
    }

    /// Indirect dose of an unbounded stay beginning at the host's departure,
    /// `(n q V / r^2)(1 - exp(-r t_a / V))`.
    pub fn indirect_bound(&self, host_stay: f64) -> f64 {
        self.ventilation * self.concentration(host_stay) / self.decay_per_hour()
    }

    pub fn link(&self, timing: &LinkTiming) -> LinkExposure {
        let (direct, indirect) = match timing.case() {
            LinkCase::DirectOnly => (self.direct(timing), 0.0),
            LinkCase::IndirectOnly => (0.0, self.indirect(timing)),
            LinkCase::DirectAndIndirect => (self.direct(timing), self.indirect(timing)),
        };
        LinkExposure {
            direct,
            indirect,
            total: direct + indirect,
        }
    }
}

/// Proximity concentration `t` hours after the host arrived.
pub fn concentration(t: f64, env: &EnvironmentSample, params: &DiseaseParams) -> Result<f64> {
    Ok(DoseKernel::new(params, env)?.concentration(t))
}

pub fn direct_exposure(timing: &LinkTiming, env: &EnvironmentSample, params: &DiseaseParams) -> Result<f64> {
    timing.check()?;
    Ok(DoseKernel::new(params, env)?.direct(timing))
}

pub fn indirect_exposure(timing: &LinkTiming, env: &EnvironmentSample, params: &DiseaseParams) -> Result<f64> {
    timing.check()?;
    Ok(DoseKernel::new(params, env)?.indirect(timing))
}

pub fn link_exposure(timing: &LinkTiming, env: &EnvironmentSample, params: &DiseaseParams) -> Result<LinkExposure> {
    timing.check()?;
    Ok(DoseKernel::new(params, env)?.link(timing))
}

/// Dose-response `P(I=1) = 1 - exp(-sigma E_T)`.
pub fn infection_probability(total_exposure: f64, sigma: f64) -> Result<f64> {
    if !(total_exposure >= 0.0) {
        return Err(Error::Internal(format!(
            "exposure must be non-negative, got {total_exposure}"
        )));
    }
    Ok(-(-sigma * total_exposure).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(r: f64) -> DoseKernel {
        DoseKernel::from_parts(8.925e-2, 0.45, r, 15_080.0).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_link_case(5.0, 1.0, 2.0), LinkCase::DirectOnly);
        assert_eq!(classify_link_case(5.0, 7.0, 3.0), LinkCase::IndirectOnly);
        assert_eq!(classify_link_case(5.0, 3.0, 6.0), LinkCase::DirectAndIndirect);
        assert_eq!(classify_link_case(5.0, 5.0, 1.0), LinkCase::IndirectOnly);
        assert_eq!(classify_link_case(5.0, 2.0, 3.0), LinkCase::DirectOnly);
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for x in [-1e-2_f64, 1e-2] {
            let closed = (x + (-x).exp_m1()) / (x * x);
            assert!((ramp_factor(x) - closed).abs() < 1e-13);
        }
        assert_eq!(ramp_factor(0.0), 0.5);
        assert_eq!(growth_factor(0.0), 1.0);
    }

    #[test]
    fn empty_intervals_give_zero() {
        let k = kernel(0.5);
        assert_eq!(k.direct(&LinkTiming::new(1.0, 0.0, 0.0)), 0.0);
        assert_eq!(k.indirect(&LinkTiming::new(5.0, 2.0, 3.0)), 0.0);
        let e = k.link(&LinkTiming::new(5.0, 7.0, 3.0));
        assert_eq!(e.direct, 0.0);
        assert!(e.indirect > 0.0);
        let e = k.link(&LinkTiming::new(5.0, 1.0, 2.0));
        assert_eq!(e.indirect, 0.0);
        assert_eq!(e.total, e.direct + e.indirect);
    }

    #[test]
    fn concentration_rises_towards_equilibrium() {
        let k = DoseKernel::from_parts(10.0, 0.45, 2.0, 1.0).unwrap();
        assert_eq!(k.concentration(0.0), 0.0);
        let mut prev = 0.0;
        for i in 1..200 {
            let c = k.concentration(i as f64 * 0.05);
            assert!(c > prev);
            prev = c;
        }
        assert!((k.concentration(50.0) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn continuous_across_host_departure() {
        let k = kernel(0.7);
        let t_a = 2.0;
        let below = k.link(&LinkTiming::new(t_a, t_a - 1e-12, 1.5)).total;
        let at = k.link(&LinkTiming::new(t_a, t_a, 1.5)).total;
        assert!((below - at).abs() <= 1e-9 * at, "{below} vs {at}");
    }

    #[test]
    fn long_stay_approaches_bound() {
        let k = DoseKernel::from_parts(8.925e-2, 0.45, 500.0, 15_080.0).unwrap();
        let t_a = 1.0;
        let t_c = 1.5;
        let limit = k.indirect_bound(t_a) * (-(500.0 / 15_080.0) * (t_c - t_a)).exp();
        let long = k.indirect(&LinkTiming::new(t_a, t_c, 5_000.0));
        assert!((long - limit).abs() / limit < 1e-9);
        assert!(long <= k.indirect_bound(t_a));
    }

    #[test]
    fn infinite_dilution_vanishes() {
        let k = DoseKernel::from_parts(8.925e-2, 0.45, 0.5, 1e30).unwrap();
        assert!(k.direct(&LinkTiming::new(1.0, 0.0, 1.0)) < 1e-30);
    }

    #[test]
    fn bad_environment_is_rejected() {
        assert!(matches!(DoseKernel::from_parts(1.0, 1.0, 0.0, 1.0), Err(Error::Environment(_))));
        assert!(matches!(DoseKernel::from_parts(1.0, 1.0, -1.0, 1.0), Err(Error::Environment(_))));
    }

    #[test]
    fn dose_response() {
        assert_eq!(infection_probability(0.0, 0.693).unwrap(), 0.0);
        assert!((infection_probability(1.0, 0.693).unwrap() - 0.5).abs() < 5e-4);
        assert!((infection_probability(2.0, 0.693).unwrap() - 0.75).abs() < 1e-3);
        assert!(matches!(infection_probability(-1.0, 0.693), Err(Error::Internal(_))));
        assert!(infection_probability(f64::NAN, 0.693).is_err());
    }
}
