//! First-order energy shifts from a regularized information-theoretic
//! nonlinearity in the Schrodinger equation.

pub mod analytics;
pub mod cli;
pub mod config;
pub mod error;
pub mod fitting;
pub mod jet;
pub mod nonlinearity;
pub mod params;
pub mod perturbation;
pub mod quadrature;
pub mod result;
pub mod special;
pub mod wavefunctions;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use params::{validate_params, Dims, NonlinearityParams, Units};
pub use result::{Method, ShiftResult};
pub use wavefunctions::{NodeInfo, QuantumState, StateKind, System};
