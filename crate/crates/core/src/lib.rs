//! Complex-valued power means of real samples as closed-form estimators of
//! the Cauchy parameter `gamma = mu + i sigma`, plus the two-component
//! mixture-Cauchy moment estimator and a seeded Monte Carlo harness.

pub mod cauchy;
pub mod complex;
pub mod error;
pub mod estimators;
pub mod mixture;
pub mod montecarlo;
pub mod quadrature;

pub use cauchy::{ComplexParam, ConfidenceDisc, MleConfig, MleResult};
pub use complex::{Complex, Generator, GeneratorKind};
pub use error::{Error, Result};
pub use estimators::{EstimateResult, Sample, Statistic};
pub use mixture::{MixtureEstimate, MixtureParams, MomentTriple};
pub use montecarlo::{TrialConfig, TrialSummary, Workers};
