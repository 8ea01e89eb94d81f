//! Synthetic SPDT contact networks.

mod config;
mod generator;
pub mod io;
pub mod sampling;
mod trace;
pub mod validate;

pub use config::GeneratorConfig;
pub use generator::{generate_network, generate_trace, select_neighbor, GeneratedNetwork, NodeProfile, Population};
pub use sampling::{
    sample_active_duration, sample_degree, sample_heterogeneity, sample_link_delay, sample_link_duration,
};
pub use trace::{project_spst, ContactTrace, HostIndex, SpdtLink, Variant};
