use serde::{Deserialize, Serialize};

/// How a shift was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// A first-order energy shift with its error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftResult {
    pub delta_e: f64,
    pub delta_e_dimensionless: f64,
    /// Quadrature error estimate or Monte Carlo standard error, in energy units.
    pub err_estimate: f64,
    /// The same error in the units of `delta_e_dimensionless`.
    pub err_dimensionless: f64,
    pub method: Method,
    /// Integrand evaluations (quadrature) or samples (Monte Carlo).
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}
