//! Exact probability oracles and Monte Carlo estimation.

mod exact;
mod monte_carlo;
mod scenario;

pub use exact::{
    channel_detection_probability, conditional_pass_probability, escape_probability, escape_probability_binomial, eve_detection_probability,
    multi_fake_escape_probability, ExactProbability,
};
pub use monte_carlo::{monte_carlo, MonteCarloEstimate};
pub use scenario::{ExperimentRecord, ReferenceCheck, Scenario};
