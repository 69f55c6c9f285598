//! Closed-form and semi-analytic predictions for node-dominated and nodeless
//! shifts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::nonlinearity::{self, DensityProbe1D};
use crate::params::{NonlinearityParams, Units};
use crate::perturbation::{self, has_nodes};
use crate::quadrature::{self, IntegrationPlan1D};
use crate::special;
use crate::wavefunctions::{QuantumState, ShiftedChanges};

/// Factorized node-dominated prediction of a shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePrediction {
    /// Weighted sum of squared node slopes, in `length^-3`.
    pub sum_c_sq: f64,
    pub j_value: f64,
    pub predicted_shift: f64,
    pub predicted_dimensionless: f64,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::RegulatorOutOfRange(eta))
    }
}

/// Large-`alpha` limit of the node integral,
/// `J(eta) = -(2/3) sqrt(1 - eta) eta^(9/2) (4 eta - 1) pi`.
pub fn j_closed(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(-(2.0 / 3.0) * (1.0 - eta).sqrt() * eta.powf(4.5) * (4.0 * eta - 1.0) * PI)
}

/// `J(eta) / (4 eta^4)` grouped as `(pi/6) sqrt(eta (1 - eta)) (1 - 4 eta)`.
pub fn j_reduced(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(PI / 6.0 * (eta * (1.0 - eta)).sqrt() * (1.0 - 4.0 * eta))
}

/// Integrand `y^2 B` of the node integral for the density `y^2`.
pub fn j_integrand(eta: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let t = eta / y;
    let changes = ShiftedChanges { plus: t * (2.0 + t), minus: t * (t - 2.0), sum: 2.0 * t * t };
    y * y * nonlinearity::bracket_from_changes(eta, &changes)
}

/// Node integral `J(eta, alpha)` over `|y| <= alpha/2`.
pub fn j_integral(eta: f64, alpha: f64, cfg: &RunConfig) -> Result<f64> {
    check_eta(eta)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha}")));
    }
    let half = 0.5 * alpha;
    // geometric breakpoints keep the slowly decaying tail cheap
    let mut points = vec![0.0, eta, -eta];
    let mut y = 4.0 * eta;
    while y < half {
        points.extend([y, -y]);
        y *= 4.0;
    }
    let plan = IntegrationPlan1D::new(-half, half)
        .with_breakpoints(points)
        .with_tolerances(cfg.rel_tol.min(1e-12), 1e-15);
    Ok(quadrature::integrate_1d(|y| j_integrand(eta, y), &plan)?.value)
}

/// Weighted `sum_p C_np^2` over the nodes of a 1D state.
pub fn node_slope_sum(state: &QuantumState) -> Result<f64> {
    let nodes = state.nodes()?;
    if nodes.is_empty() {
        return Err(Error::Precondition("a state with nodes".into()));
    }
    Ok(nodes.iter().map(|n| n.weight.factor() * n.slope_coeff * n.slope_coeff).sum())
}

/// Node-dominated shift `(hbar^2 |L| / 4 m eta^4) J(eta) sum C^2`.
pub fn node_shift_prediction(state: &QuantumState, params: &NonlinearityParams) -> Result<NodePrediction> {
    let j_value = j_closed(params.eta)?;
    let sum_c_sq = node_slope_sum(state)?;
    let e4 = params.eta.powi(4);
    let h2m = state.units.hbar2_over_m();
    let predicted_shift = h2m * params.length.abs() / (4.0 * e4) * j_value * sum_c_sq;
    let other = main_result_shift(state, params)?;
    assert!(
        (predicted_shift - other).abs() <= 1e-12 * predicted_shift.abs().max(other.abs()) + f64::MIN_POSITIVE,
        "node prediction forms disagree: {predicted_shift} vs {other}"
    );
    Ok(NodePrediction {
        sum_c_sq,
        j_value,
        predicted_shift,
        predicted_dimensionless: perturbation::delta_e_dimensionless(predicted_shift, state),
    })
}

/// `(hbar^2 |L| pi / 6 m) sqrt(eta (1 - eta)) (1 - 4 eta) sum C^2`.
pub fn main_result_shift(state: &QuantumState, params: &NonlinearityParams) -> Result<f64> {
    let h2m = state.units.hbar2_over_m();
    Ok(h2m * params.length.abs() * j_reduced(params.eta)? * node_slope_sum(state)?)
}

/// `sum_p C_np^2` for the oscillator state `n`, from the Hermite roots.
///
/// Uses `H_n'(z_p) = 2n H_{n-1}(z_p) = -H_{n+1}(z_p)` in normalized form,
/// `C_p^2 = 2(n+1) psi_{n+1}(z_p)^2 / a^3`, so no factorials are formed.
pub fn sho_cnp_sum(n: u32, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("an oscillator state with n >= 1".into()));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidLengthScale(a));
    }
    let scale = 2.0 * f64::from(n + 1) / (a * a * a);
    Ok(special::hermite_roots(n)?
        .iter()
        .map(|&z| {
            let psi = special::hermite_function(n + 1, z);
            scale * psi * psi
        })
        .sum())
}

/// Node-dominated dimensionless oscillator shift per unit `|L|/a`,
/// `a^3 sum C^2 J(eta) / (4 eta^4)`.
pub fn sho_node_coefficient(n: u32, eta: f64) -> Result<f64> {
    Ok(sho_cnp_sum(n, 1.0)? * j_reduced(eta)?)
}

/// Oscillator ground-state shift `eta^2 (1 - eta)(1 - 3 eta)/4 (L/a)^2`, in units of `hbar omega`.
pub fn sho_ground_closed(eta: f64, length: f64, a: f64) -> Result<f64> {
    check_eta(eta)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidLengthScale(a));
    }
    let r = length / a;
    Ok(eta * eta * (1.0 - eta) * (1.0 - 3.0 * eta) / 4.0 * r * r)
}

/// Overall constant of the small-`L` expansion, in units of `hbar^2/m`.
///
/// Fixed by matching the oscillator ground state, then checked on other
/// nodeless densities.
pub const FORMAL_L2_CONSTANT: f64 = 1.0 / 96.0;

/// Integrand of the `O(L^2)` expansion, divided by `hbar^2 L^2 eta^2 / m`.
pub fn formal_l2_integrand(eta: f64, j: &crate::wavefunctions::DensityJet) -> f64 {
    if !(j.p > 0.0) {
        return 0.0;
    }
    let l1 = j.d1 / j.p;
    let l2 = j.d2 / j.p;
    let l3 = j.d3 / j.p;
    let l4 = j.d4 / j.p;
    let c1 = 6.0 * (2.0 - 3.0 * eta).powi(2);
    let c2 = 12.0 * (3.0 - 8.0 * eta + 6.0 * eta * eta);
    let bracket = c1 * l1.powi(4) - c2 * l1 * l1 * l2 + 4.0 * l1 * l3 + 3.0 * l2 * l2 - 2.0 * l4;
    FORMAL_L2_CONSTANT * j.p * bracket
}

/// `O(L^2)` shift of a nodeless density on `domain`.
pub fn formal_l2_shift_density(
    probe: &impl DensityProbe1D,
    domain: (f64, f64),
    params: &NonlinearityParams,
    units: &Units,
    cfg: &RunConfig,
) -> Result<f64> {
    check_eta(params.eta)?;
    let f = |x: f64| formal_l2_integrand(params.eta, &probe.jet(x));
    // the integral vanishes at special eta, so the tolerance is set by the magnitude
    let coarse = IntegrationPlan1D::new(domain.0, domain.1).with_tolerances(1e-6, f64::MIN_POSITIVE);
    let scale = quadrature::integrate_1d(|x| f(x).abs(), &coarse)?.value;
    let plan = IntegrationPlan1D::new(domain.0, domain.1).with_tolerances(cfg.rel_tol, cfg.rel_tol * scale);
    let r = quadrature::integrate_1d(f, &plan)?;
    let e = params.eta * params.length;
    Ok(units.hbar2_over_m() * e * e * r.value)
}

/// `O(L^2)` shift of a nodeless 1D eigenstate.
pub fn formal_l2_shift(state: &QuantumState, params: &NonlinearityParams, cfg: &RunConfig) -> Result<f64> {
    if !state.is_1d() || has_nodes(state) {
        return Err(Error::Precondition("a nodeless one-dimensional state".into()));
    }
    let domain = perturbation::integration_domain_1d(state, cfg)?;
    formal_l2_shift_density(&state.probe_1d()?, domain, params, &state.units, cfg)
}

/// Node-region construction `(hbar^2 |L| / 4 m eta^4) J(eta, alpha) sum C^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeRegionShift {
    pub shift: f64,
    pub j_value: f64,
    pub sum_c_sq: f64,
    /// Nodes are at least `10 eta |L|` apart.
    pub separated: bool,
}

fn min_node_spacing(state: &QuantumState) -> Result<f64> {
    let mut xs: Vec<f64> = state.nodes()?.iter().map(|n| n.position).collect();
    xs.sort_by(f64::total_cmp);
    Ok(xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}

pub fn node_region_shift(
    state: &QuantumState,
    params: &NonlinearityParams,
    alpha: f64,
    cfg: &RunConfig,
) -> Result<NodeRegionShift> {
    let sum_c_sq = node_slope_sum(state)?;
    let spacing = min_node_spacing(state)?;
    let len = params.length.abs();
    if !(alpha * len < 0.5 * spacing) {
        return Err(Error::InvalidArgument(format!(
            "alpha |L| = {:e} exceeds half the node spacing {:e}",
            alpha * len,
            0.5 * spacing
        )));
    }
    let j_value = j_integral(params.eta, alpha, cfg)?;
    let shift = state.units.hbar2_over_m() * len / (4.0 * params.eta.powi(4)) * j_value * sum_c_sq;
    Ok(NodeRegionShift { shift, j_value, sum_c_sq, separated: spacing > 10.0 * params.eta * len })
}

/// Leading node-dominated dimensionless well shift, `(|L|/a) n^3 J(eta)/eta^4`.
pub fn well_node_law(n: u32, eta: f64, length: f64, a: f64) -> Result<f64> {
    Ok(length.abs() / a * f64::from(n).powi(3) * j_closed(eta)? / eta.powi(4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::FnDensity1D;
    use crate::wavefunctions::DensityJet;

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn j_closed_values() {
        assert_eq!(j_closed(0.25).unwrap(), 0.0);
        assert!((j_closed(0.5).unwrap() + PI / 48.0).abs() < 1e-15);
        assert!(j_closed(1e-8).unwrap().abs() < 1e-30);
        assert!(j_closed(1.0).is_err() && j_closed(0.0).is_err());
    }

    #[test]
    fn two_groupings_agree() {
        for i in 1..100 {
            let eta = i as f64 / 100.0;
            let a = j_closed(eta).unwrap() / (4.0 * eta.powi(4));
            let b = j_reduced(eta).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{eta}");
        }
    }

    #[test]
    fn j_integral_oracle() {
        // mpmath quad of the four-term bracket at 40 digits
        let v = j_integral(0.5, 1e4, &cfg()).unwrap();
        assert!((v - -0.065_446_721_949_787_359).abs() < 1e-12, "{v}");
        let w = j_integral(0.8, 2e4, &cfg()).unwrap();
        assert!((w - -0.754_888_020_011_403_74).abs() < 1e-11, "{w}");
    }

    #[test]
    fn j_integral_converges_like_one_over_alpha() {
        let c = cfg();
        let eta = 0.3;
        let exact = j_closed(eta).unwrap();
        let r1 = j_integral(eta, 1e3, &c).unwrap() - exact;
        let r2 = j_integral(eta, 2e3, &c).unwrap() - exact;
        assert!((r1 / r2 - 2.0).abs() < 0.05, "{r1} {r2}");
        assert!(j_integral(0.25, 1e4, &c).unwrap().abs() < 1e-3);
    }

    #[test]
    fn well_prediction() {
        let s = QuantumState::well(3, 1000.0).unwrap();
        let p = node_shift_prediction(&s, &NonlinearityParams::new(1.0, 0.5)).unwrap();
        assert!((p.predicted_dimensionless - -(PI / 3.0) * 27.0 / 1000.0).abs() < 1e-14);
        let law = well_node_law(3, 0.3, -2.0, 1000.0).unwrap();
        let q = node_shift_prediction(&s, &NonlinearityParams::new(-2.0, 0.3)).unwrap();
        assert!((q.predicted_dimensionless / law - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sho_slope_sums() {
        assert!((sho_cnp_sum(1, 1.0).unwrap() - 2.0 / PI.sqrt()).abs() < 1e-13);
        // literal formula with Hermite polynomials and factorials
        for n in 2..8u32 {
            let fact: f64 = (1..=n).map(f64::from).product();
            let lit: f64 = special::hermite_roots(n)
                .unwrap()
                .iter()
                .map(|&z| {
                    let h = special::hermite(n + 1, z);
                    h * h * (-z * z).exp() / (PI.sqrt() * 2f64.powi(n as i32) * fact)
                })
                .sum();
            let v = sho_cnp_sum(n, 1.0).unwrap();
            assert!((v / lit - 1.0).abs() < 1e-12, "{n}");
            assert!((sho_cnp_sum(n, 3.0).unwrap() - v / 27.0).abs() < 1e-14 * v);
        }
        // extended-precision direct sum over both roots of H_2
        assert!((sho_cnp_sum(2, 1.0).unwrap() - 2.737_586_242_497_732_3).abs() < 1e-13);
        assert!(sho_cnp_sum(40, 1.0).unwrap().is_finite());
    }

    #[test]
    fn sho_ground_closed_values() {
        assert!((sho_ground_closed(0.5, 1.0, 1.0).unwrap() + 0.015_625).abs() < 1e-16);
        assert!(sho_ground_closed(1.0 / 3.0, 1.0, 1.0).unwrap().abs() < 1e-17);
        assert!(sho_ground_closed(1.0 - 1e-12, 1.0, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn formal_expansion_matches_ground_state() {
        let c = cfg();
        let s = QuantumState::oscillator(0, 1.0).unwrap();
        for eta in [0.2, 0.5, 0.8] {
            let f = formal_l2_shift(&s, &NonlinearityParams::new(1e-3, eta), &c).unwrap();
            let closed = sho_ground_closed(eta, 1e-3, 1.0).unwrap();
            assert!((f / closed - 1.0).abs() < 1e-8, "{eta}: {f} {closed}");
        }
        let zero = formal_l2_shift(&s, &NonlinearityParams::new(1e-3, 1.0 / 3.0), &c).unwrap();
        assert!(zero.abs() < 1e-18);
        assert!(formal_l2_shift(&QuantumState::well(1, 1.0).unwrap(), &NonlinearityParams::new(1e-3, 0.5), &c)
            .is_err());
    }

    fn direct_shift(probe: &impl DensityProbe1D, domain: (f64, f64), params: &NonlinearityParams, scale: f64) -> f64 {
        let units = Units::default();
        let plan = IntegrationPlan1D::new(domain.0, domain.1).with_tolerances(1e-9, 1e-4 * scale.abs());
        quadrature::try_integrate_1d(|x| nonlinearity::weighted_f_1d(probe, x, params, &units), &plan)
            .unwrap()
            .value
    }

    #[test]
    fn formal_constant_is_density_independent() {
        let c = cfg();
        let units = Units::default();
        // p = sech^2(x)/2, with T = tanh x
        let sech = FnDensity1D(|x: f64| {
            let t = x.tanh();
            let p = 0.5 / x.cosh().powi(2);
            DensityJet {
                p,
                d1: -2.0 * t * p,
                d2: (6.0 * t * t - 2.0) * p,
                d3: (16.0 * t - 24.0 * t.powi(3)) * p,
                d4: (16.0 - 120.0 * t * t + 120.0 * t.powi(4)) * p,
            }
        });
        // squeezed Gaussian of width 0.6
        let b = 0.6;
        let gauss = FnDensity1D(move |x: f64| {
            let z = x / b;
            let p = (-z * z).exp();
            let h = [1.0, -2.0 * z, 4.0 * z * z - 2.0, -8.0 * z.powi(3) + 12.0 * z, 16.0 * z.powi(4) - 48.0 * z * z + 12.0];
            DensityJet { p, d1: h[1] * p / b, d2: h[2] * p / b.powi(2), d3: h[3] * p / b.powi(3), d4: h[4] * p / b.powi(4) }
        });
        for eta in [0.2, 0.5, 0.8] {
            let params = NonlinearityParams::new(1e-2, eta);
            let f = formal_l2_shift_density(&sech, (-40.0, 40.0), &params, &units, &c).unwrap();
            let d = direct_shift(&sech, (-40.0, 40.0), &params, f);
            assert!((d / f - 1.0).abs() < 0.02, "sech {eta}: {d} {f}");
            let f = formal_l2_shift_density(&gauss, (-8.0, 8.0), &params, &units, &c).unwrap();
            let d = direct_shift(&gauss, (-8.0, 8.0), &params, f);
            assert!((d / f - 1.0).abs() < 0.02, "gauss {eta}: {d} {f}");
        }
    }

    #[test]
    fn node_region_approaches_prediction() {
        let c = cfg();
        let s = QuantumState::well(2, 1e6).unwrap();
        let params = NonlinearityParams::new(1.0, 0.5);
        let pred = node_shift_prediction(&s, &params).unwrap().predicted_shift;
        let r1 = node_region_shift(&s, &params, 1e3, &c).unwrap();
        let r2 = node_region_shift(&s, &params, 1e4, &c).unwrap();
        assert!(r1.separated);
        let (e1, e2) = ((r1.shift / pred - 1.0).abs(), (r2.shift / pred - 1.0).abs());
        assert!(e2 < e1 && e2 < 1e-3, "{e1} {e2}");
        assert!(node_region_shift(&s, &params, 1e6, &c).is_err());
        let zero = node_region_shift(&s, &params.with_eta(0.25), 1e4, &c).unwrap();
        assert!(zero.shift.abs() < 1e-3 * pred.abs());
    }
}
