//! Inhaled doses for SPDT links and the resulting infection risk.

mod dose;
mod environment;
mod params;

pub use dose::{
    classify_link_case, concentration, direct_exposure, indirect_exposure, infection_probability, link_exposure,
    DoseKernel, LinkCase, LinkExposure, LinkTiming,
};
pub use environment::{sample_environment, EnvConfig, EnvironmentSample, EnvironmentSampler, RemovalMode};
pub use params::{particle_rate, DiseaseParams};
