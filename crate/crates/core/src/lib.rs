//! Convergence rate of signed opinion dynamics on random interaction
//! networks: generators, influence matrices, spectra, closed-form
//! predictions, simulation and the experiment harness.

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod influence;
pub mod lab;
pub mod netgen;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use graph::SignedNetwork;
pub use influence::{build_influence, InfluenceMatrix};
pub use netgen::{DistributionSpec, InteractionType, Mixture, MomentStats, Proportions, Scenario, ScenarioConfig};
pub use spectral::{EmpiricalRateResult, RateRegime, Spectrum};
pub use theory::{EllipsePrediction, Geometry, PredictionRegime, RatePrediction};
