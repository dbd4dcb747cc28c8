//! Horseshoe and horseshoe+ shrinkage priors for sparse normal means:
//! prior densities, exact posterior quadrature, Gibbs sampling, multiple
//! testing rules and the simulation harnesses built on them.

pub mod data;
pub mod error;
pub mod experiments;
pub mod ingest;
pub mod kappa_posterior;
pub mod mcmc;
pub mod output;
pub mod priors;
pub mod quadrature;
pub mod specialfn;
pub mod testing;
pub mod verify;

pub use data::NormalMeansData;
pub use error::{Error, Result};
pub use mcmc::{McmcConfig, PosteriorSummary, TauPolicy};
pub use priors::{Family, PriorSpec};
pub use testing::{DecisionReport, OracleParams};
