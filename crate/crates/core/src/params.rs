//! Physical units and the nonlinearity parameters `(L, eta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio `|L|/a` above which first-order results are flagged as untrustworthy.
pub const PERTURBATIVE_RATIO_LIMIT: f64 = 1e-2;

/// Reduced Planck constant and particle mass. Natural units by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0, mass: 1.0 }
    }
}

impl Units {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) || !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "units need hbar > 0 and mass > 0 (got {hbar}, {mass})"
            )));
        }
        Ok(Units { hbar, mass })
    }

    /// `hbar^2 / m`, the scale every kinetic-type term carries.
    pub fn hbar2_over_m(&self) -> f64 {
        self.hbar * self.hbar / self.mass
    }
}

/// Spatial dimensionality of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dims {
    One,
    Three,
}

/// The nonlinearity scale `L` (signed) and the regulator `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityParams {
    pub length: f64,
    pub eta: f64,
    pub dims: Dims,
    /// Average the operator over `L -> -L` before use.
    #[serde(default)]
    pub symmetrized: bool,
}

impl NonlinearityParams {
    pub fn new(length: f64, eta: f64) -> Self {
        NonlinearityParams { length, eta, dims: Dims::One, symmetrized: false }
    }

    pub fn three_d(length: f64, eta: f64) -> Self {
        NonlinearityParams { dims: Dims::Three, ..Self::new(length, eta) }
    }

    pub fn with_length(self, length: f64) -> Self {
        NonlinearityParams { length, ..self }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        NonlinearityParams { eta, ..self }
    }

    /// The shift `eta * L` applied to the density arguments.
    pub fn shift(&self) -> f64 {
        self.eta * self.length
    }

    /// Prefactor `hbar^2 / (4 m L^2 eta^4)` of the regularized potential.
    pub fn prefactor(&self, units: &Units) -> f64 {
        let e2 = self.eta * self.eta;
        units.hbar2_over_m() / (4.0 * self.length * self.length * e2 * e2)
    }

    pub(crate) fn check_regulator(&self) -> Result<()> {
        if self.eta > 0.0 && self.eta < 1.0 {
            Ok(())
        } else {
            Err(Error::RegulatorOutOfRange(self.eta))
        }
    }

    pub(crate) fn check_length(&self) -> Result<()> {
        if self.length != 0.0 && self.length.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidNonlinearityScale(self.length))
        }
    }
}

/// Parameters that passed validation, annotated with the perturbative ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckedParams {
    pub params: NonlinearityParams,
    pub a: f64,
    /// `|L| / a`.
    pub ratio: f64,
    /// Set when `ratio` exceeds [`PERTURBATIVE_RATIO_LIMIT`].
    pub warning: bool,
}

/// Validate `(L, eta)` against a system length scale `a`.
///
/// `L = 0` is accepted here (it is the linear limit); the shift integrals reject it.
pub fn validate_params(params: NonlinearityParams, a: f64) -> Result<CheckedParams> {
    params.check_regulator()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidLengthScale(a));
    }
    if !params.length.is_finite() {
        return Err(Error::InvalidNonlinearityScale(params.length));
    }
    let ratio = params.length.abs() / a;
    Ok(CheckedParams { params, a, ratio, warning: ratio > PERTURBATIVE_RATIO_LIMIT })
}
