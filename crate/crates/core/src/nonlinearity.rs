//! Pointwise evaluation of the regularized nonlinear quantum potential, the
//! linear quantum potential and the comparison nonlinearities.
//!
//! The bracket of the regularized potential is evaluated in terms of the
//! relative density changes `u = p_+/p - 1` and `v = p/p_- - 1`:
//!
//! ```text
//! B = -ln(1 + eta u) + eta (1 - eta) u / (1 + eta u) + eta^2 v / (1 + eta v)
//! ```
//!
//! which is algebraically identical to the four-term form but has no
//! cancellation when `p_+ ~ p ~ p_-`, and whose limits at `p_+ = 0`
//! (`u = -1`) and `p_- = 0` (`v = inf`) are finite.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::params::{NonlinearityParams, Units};
use crate::wavefunctions::{Amplitude1D, DensityJet, QuantumState, ShiftedChanges};

/// A one-dimensional density with derivative access.
pub trait DensityProbe1D {
    fn jet(&self, x: f64) -> DensityJet;

    fn density(&self, x: f64) -> f64 {
        self.jet(x).p
    }

    /// `p(x + s)/p(x) - 1`; infinite when `p(x) = 0 < p(x + s)`.
    fn relative_change(&self, x: f64, s: f64) -> f64 {
        let p = self.density(x);
        let q = self.density(x + s);
        if p == 0.0 {
            return if q == 0.0 { 0.0 } else { f64::INFINITY };
        }
        q / p - 1.0
    }

    /// Changes under `x -> x +- s` together with their sum.
    fn shifted_changes(&self, x: f64, s: f64) -> ShiftedChanges {
        ShiftedChanges::from_values(self.density(x), self.density(x + s), self.density(x - s))
    }

    /// Real amplitude, when the density comes from one. Enables node-safe products.
    fn amplitude(&self, _x: f64) -> Option<Amplitude1D> {
        None
    }
}

/// A three-dimensional density with per-axis shifts.
pub trait DensityProbe3D {
    fn density(&self, r: [f64; 3]) -> f64;

    /// `p(r + s e_axis)/p(r) - 1`.
    fn relative_change(&self, r: [f64; 3], axis: usize, s: f64) -> f64 {
        let p = self.density(r);
        let mut q = r;
        q[axis] += s;
        let pq = self.density(q);
        if p == 0.0 {
            return if pq == 0.0 { 0.0 } else { f64::INFINITY };
        }
        pq / p - 1.0
    }

    /// Changes under shifts `+- s` along `axis`, with their sum.
    fn shifted_changes(&self, r: [f64; 3], axis: usize, s: f64) -> ShiftedChanges {
        let at = |k: f64| {
            let mut q = r;
            q[axis] += k * s;
            self.density(q)
        };
        ShiftedChanges::from_values(at(0.0), at(1.0), at(-1.0))
    }

    /// Real amplitude with first and second derivatives along `axis`.
    fn amplitude_axis_jet(&self, _r: [f64; 3], _axis: usize) -> Option<Jet> {
        None
    }

    /// Step used for finite-difference derivatives of the density.
    fn fd_step(&self) -> f64;
}

/// A 1D eigenstate seen as a density probe.
#[derive(Debug, Clone, Copy)]
pub struct StateProbe1D<'a>(&'a QuantumState);

/// A hydrogen eigenstate seen as a density probe.
#[derive(Debug, Clone, Copy)]
pub struct StateProbe3D<'a>(&'a QuantumState);

impl QuantumState {
    pub fn probe_1d(&self) -> Result<StateProbe1D<'_>> {
        if self.is_1d() {
            Ok(StateProbe1D(self))
        } else {
            Err(Error::Precondition("a one-dimensional state".into()))
        }
    }

    pub fn probe_3d(&self) -> Result<StateProbe3D<'_>> {
        if self.is_1d() {
            Err(Error::Precondition("a hydrogen state".into()))
        } else {
            Ok(StateProbe3D(self))
        }
    }
}

impl DensityProbe1D for StateProbe1D<'_> {
    fn jet(&self, x: f64) -> DensityJet {
        DensityJet::from(self.amplitude(x).unwrap_or_default())
    }

    fn relative_change(&self, x: f64, s: f64) -> f64 {
        self.0.density_relative_change(x, s)
    }

    fn shifted_changes(&self, x: f64, s: f64) -> ShiftedChanges {
        self.0.density_shifted_changes(x, s)
    }

    fn amplitude(&self, x: f64) -> Option<Amplitude1D> {
        self.0.amplitude_1d(x).ok()
    }
}

impl DensityProbe3D for StateProbe3D<'_> {
    fn density(&self, r: [f64; 3]) -> f64 {
        let c: f64 = self.0.hydrogen_amplitude(r);
        c * c
    }

    fn relative_change(&self, r: [f64; 3], axis: usize, s: f64) -> f64 {
        let c: f64 = self.0.hydrogen_amplitude(r);
        let mut q = r;
        q[axis] += s;
        let cq: f64 = self.0.hydrogen_amplitude(q);
        if c == 0.0 {
            return if cq == 0.0 { 0.0 } else { f64::INFINITY };
        }
        let w = cq / c;
        (w - 1.0) * (w + 1.0)
    }

    fn shifted_changes(&self, r: [f64; 3], axis: usize, s: f64) -> ShiftedChanges {
        let amp = |k: f64| {
            let mut q = r;
            q[axis] += k * s;
            self.0.hydrogen_amplitude::<f64>(q)
        };
        let c = amp(0.0);
        if c == 0.0 {
            return ShiftedChanges::from_density_node();
        }
        let (wp, wm) = (amp(1.0) / c - 1.0, amp(-1.0) / c - 1.0);
        ShiftedChanges { plus: wp * (2.0 + wp), minus: wm * (2.0 + wm), sum: 2.0 * (wp + wm) + wp * wp + wm * wm }
    }

    fn amplitude_axis_jet(&self, r: [f64; 3], axis: usize) -> Option<Jet> {
        Some(self.0.hydrogen_axis_jet(r, axis))
    }

    fn fd_step(&self) -> f64 {
        self.0.a * crate::wavefunctions::FD_STEP_FRACTION
    }
}

/// Density given by a closure returning its jet.
pub struct FnDensity1D<F>(pub F);

impl<F: Fn(f64) -> DensityJet> DensityProbe1D for FnDensity1D<F> {
    fn jet(&self, x: f64) -> DensityJet {
        (self.0)(x)
    }
}

/// Density given by a closure, with a finite-difference step.
pub struct FnDensity3D<F> {
    pub density: F,
    pub step: f64,
}

impl<F: Fn([f64; 3]) -> f64> DensityProbe3D for FnDensity3D<F> {
    fn density(&self, r: [f64; 3]) -> f64 {
        (self.density)(r)
    }

    fn fd_step(&self) -> f64 {
        self.step
    }
}

/// The bracket `B(eta, u, v)` of the regularized potential.
pub fn bracket(eta: f64, u: f64, v: f64) -> f64 {
    let first = -(eta * u).ln_1p() + eta * (1.0 - eta) * u / (1.0 + eta * u);
    let last = if v.is_infinite() { eta } else { eta * eta * v / (1.0 + eta * v) };
    first + last
}

/// `x - ln(1 + x)` without cancellation for small `x`.
fn log1p_remainder(x: f64) -> f64 {
    if x.abs() > 0.1 {
        return x - x.ln_1p();
    }
    // alternating series x^2/2 - x^3/3 + ...
    let mut term = x * x;
    let mut acc = 0.0;
    for k in 2..30 {
        let t = term / k as f64;
        acc += t;
        if t.abs() < 1e-17 * acc.abs() {
            break;
        }
        term *= -x;
    }
    acc
}

/// Below this size of the relative changes the bracket is rearranged so that
/// its leading cancellation is carried by the accurate second difference.
const SMALL_CHANGE: f64 = 0.5;

/// Bracket from `r_+ = p_+/p - 1`, `r_- = p_-/p - 1` and `r_+ + r_-`.
///
/// For small changes `B = eta^2 (v - u) + O(u^2)`; the rearranged form
/// ```text
/// B = [eta u - ln(1 + eta u)] - eta^2 (1 - eta) u^2/(1 + eta u) - eta^3 v^2/(1 + eta v) + eta^2 (v - u)
/// ```
/// with `v - u = -(r_+ + r_- + r_+ r_-)/(1 + r_-)` keeps full relative accuracy.
pub fn bracket_from_changes(eta: f64, c: &ShiftedChanges) -> f64 {
    let (rp, rm) = (c.plus, c.minus);
    if rm <= -1.0 {
        return bracket(eta, rp, f64::INFINITY);
    }
    let v = -rm / (1.0 + rm);
    if rp.abs() > SMALL_CHANGE || rm.abs() > SMALL_CHANGE {
        return bracket(eta, rp, v);
    }
    let u = rp;
    let v_minus_u = -(c.sum + rp * rm) / (1.0 + rm);
    let e2 = eta * eta;
    log1p_remainder(eta * u) - e2 * (1.0 - eta) * u * u / (1.0 + eta * u) - e2 * eta * v * v / (1.0 + eta * v)
        + e2 * v_minus_u
}

fn check_operator_params(params: &NonlinearityParams) -> Result<()> {
    params.check_regulator()?;
    params.check_length()
}

/// Signs of `L` to average over.
fn length_signs(params: &NonlinearityParams) -> &'static [f64] {
    if params.symmetrized {
        &[1.0, -1.0]
    } else {
        &[1.0]
    }
}

fn guard_1d(probe: &impl DensityProbe1D, x: f64, s: f64, p: f64) -> Result<()> {
    if p == 0.0 && (probe.density(x + s) == 0.0 || probe.density(x - s) == 0.0) {
        return Err(Error::RegulatorFailure { x });
    }
    Ok(())
}

/// Regularized nonlinear quantum potential `Q_nl(x)` in 1D.
///
/// Where `p(x) = 0` with both neighbours positive the logarithm diverges and
/// `-inf` is returned; use [`weighted_q_nl_1d`] for the finite product `p Q_nl`.
pub fn q_nl_1d(
    probe: &impl DensityProbe1D,
    x: f64,
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    check_operator_params(params)?;
    let p = probe.density(x);
    let mut acc = 0.0;
    let signs = length_signs(params);
    for &sign in signs {
        let s = sign * params.shift();
        guard_1d(probe, x, s, p)?;
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += bracket_from_changes(params.eta, &probe.shifted_changes(x, s));
    }
    Ok(params.prefactor(units) * acc / signs.len() as f64)
}

/// `p(x) Q_nl(x)`, with the exact limit `0` where the density vanishes.
pub fn weighted_q_nl_1d(
    probe: &impl DensityProbe1D,
    x: f64,
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    let p = probe.density(x);
    if p == 0.0 {
        check_operator_params(params)?;
        return Ok(0.0);
    }
    Ok(p * q_nl_1d(probe, x, params, units)?)
}

/// Linear quantum potential `Q = -(hbar^2/2m) (sqrt p)''/sqrt p`.
pub fn q_linear_1d(probe: &impl DensityProbe1D, x: f64, units: &Units) -> Result<f64> {
    let j = probe.jet(x);
    if j.p <= 0.0 {
        return Err(Error::RemovableSingularity { x });
    }
    Ok(-0.5 * units.hbar2_over_m() * (0.5 * j.d2 / j.p - 0.25 * j.d1 * j.d1 / (j.p * j.p)))
}

/// `p(x) Q(x)`, finite through nodes: `-(hbar^2/2m) phi phi''` when an amplitude
/// is available.
pub fn weighted_q_linear_1d(probe: &impl DensityProbe1D, x: f64, units: &Units) -> f64 {
    if let Some(a) = probe.amplitude(x) {
        return -0.5 * units.hbar2_over_m() * a.phi * a.d2;
    }
    let j = probe.jet(x);
    if j.p <= 0.0 {
        return 0.0;
    }
    -0.5 * units.hbar2_over_m() * (0.5 * j.d2 - 0.25 * j.d1 * j.d1 / j.p)
}

/// `F = Q_nl - Q` in 1D.
pub fn f_nonlinear_1d(
    probe: &impl DensityProbe1D,
    x: f64,
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    let q = q_linear_1d(probe, x, units)?;
    Ok(q_nl_1d(probe, x, params, units)? - q)
}

/// `p F`, the shift integrand, finite everywhere.
pub fn weighted_f_1d(
    probe: &impl DensityProbe1D,
    x: f64,
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    Ok(weighted_q_nl_1d(probe, x, params, units)? - weighted_q_linear_1d(probe, x, units))
}

/// Per-axis regularized potential along `axis` at `r`.
pub fn q_nl_axis(
    probe: &impl DensityProbe3D,
    r: [f64; 3],
    axis: usize,
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    check_operator_params(params)?;
    let p = probe.density(r);
    let signs = length_signs(params);
    let mut acc = 0.0;
    for &sign in signs {
        let s = sign * params.shift();
        if p == 0.0 {
            let shifted = |k: f64| {
                let mut q = r;
                q[axis] += k * s;
                probe.density(q)
            };
            if shifted(1.0) == 0.0 || shifted(-1.0) == 0.0 {
                return Err(Error::RegulatorFailure { x: r[axis] });
            }
            return Ok(f64::NEG_INFINITY);
        }
        acc += bracket_from_changes(params.eta, &probe.shifted_changes(r, axis, s));
    }
    Ok(params.prefactor(units) * acc / signs.len() as f64)
}

/// `p Q_nl` along one axis, with the exact limit `0` where the density vanishes.
pub fn weighted_q_nl_axis(
    probe: &impl DensityProbe3D,
    r: [f64; 3],
    axis: usize,
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    let p = probe.density(r);
    if p == 0.0 {
        check_operator_params(params)?;
        return Ok(0.0);
    }
    Ok(p * q_nl_axis(probe, r, axis, params, units)?)
}

/// One axis of the node-safe shift integrand `p F`.
pub fn weighted_f_axis(
    probe: &impl DensityProbe3D,
    r: [f64; 3],
    axis: usize,
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    Ok(weighted_q_nl_axis(probe, r, axis, params, units)? - weighted_q_linear_axis(probe, r, axis, units))
}

/// The full 3D shift integrand `p F`, summed over axes.
pub fn weighted_f_3d(
    probe: &impl DensityProbe3D,
    r: [f64; 3],
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    let mut total = 0.0;
    for axis in 0..3 {
        total += weighted_f_axis(probe, r, axis, params, units)?;
    }
    Ok(total)
}

/// The three-dimensional regularized potential, summed over Cartesian axes.
pub fn q_nl_3d(
    probe: &impl DensityProbe3D,
    r: [f64; 3],
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    let mut total = 0.0;
    for axis in 0..3 {
        total += q_nl_axis(probe, r, axis, params, units)?;
    }
    Ok(total)
}

/// Finite-difference gradient and Laplacian of the density.
fn density_derivatives(probe: &impl DensityProbe3D, r: [f64; 3]) -> (f64, [f64; 3], [f64; 3]) {
    let h = probe.fd_step();
    let p0 = probe.density(r);
    let mut grad = [0.0; 3];
    let mut second = [0.0; 3];
    for axis in 0..3 {
        let at = |k: f64| {
            let mut q = r;
            q[axis] += k * h;
            probe.density(q)
        };
        let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
        grad[axis] = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        second[axis] = (-m2 + 16.0 * m1 - 30.0 * p0 + 16.0 * p1 - p2) / (12.0 * h * h);
    }
    (p0, grad, second)
}

/// The 3D linear potential `-(hbar^2/8M) [2 lap p / p - |grad p|^2 / p^2]`, by
/// finite differences.
pub fn q_linear_3d(probe: &impl DensityProbe3D, r: [f64; 3], units: &Units) -> Result<f64> {
    let (p, grad, second) = density_derivatives(probe, r);
    if p <= 0.0 {
        return Err(Error::RemovableSingularity { x: r[0] });
    }
    let lap: f64 = second.iter().sum();
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    Ok(-units.hbar2_over_m() / 8.0 * (2.0 * lap / p - g2 / (p * p)))
}

/// The same potential written as `-(hbar^2/2M) lap sqrt(p) / sqrt(p)`, with the
/// Laplacian of `sqrt p` taken by finite differences.
pub fn q_linear_3d_sqrt_form(probe: &impl DensityProbe3D, r: [f64; 3], units: &Units) -> Result<f64> {
    let h = probe.fd_step();
    let s0 = probe.density(r).sqrt();
    if s0 <= 0.0 {
        return Err(Error::RemovableSingularity { x: r[0] });
    }
    let mut lap = 0.0;
    for axis in 0..3 {
        let at = |k: f64| {
            let mut q = r;
            q[axis] += k * h;
            probe.density(q).sqrt()
        };
        lap += (-at(-2.0) + 16.0 * at(-1.0) - 30.0 * s0 + 16.0 * at(1.0) - at(2.0)) / (12.0 * h * h);
    }
    Ok(-0.5 * units.hbar2_over_m() * lap / s0)
}

/// One axis of the node-safe product `p Q`: `-(hbar^2/2M) chi d_i^2 chi`.
///
/// Falls back to finite differences of the density when no amplitude is available.
pub fn weighted_q_linear_axis(probe: &impl DensityProbe3D, r: [f64; 3], axis: usize, units: &Units) -> f64 {
    if let Some(j) = probe.amplitude_axis_jet(r, axis) {
        return -0.5 * units.hbar2_over_m() * j.v * j.dd;
    }
    let (p, grad, second) = density_derivatives(probe, r);
    if p <= 0.0 {
        return 0.0;
    }
    -0.5 * units.hbar2_over_m() * (0.5 * second[axis] - 0.25 * grad[axis] * grad[axis] / p)
}

/// `F = Q_3 - Q` in 3D.
pub fn f_nonlinear_3d(
    probe: &impl DensityProbe3D,
    r: [f64; 3],
    params: &NonlinearityParams,
    units: &Units,
) -> Result<f64> {
    let q = q_linear_3d(probe, r, units)?;
    Ok(q_nl_3d(probe, r, params, units)? - q)
}

/// Gross-Pitaevskii term `g p`.
pub fn gp_term(p: f64, g: f64) -> f64 {
    g * p
}

/// Scaled kinetic term `-(eps hbar^2 / 2m) psi''/psi`.
pub fn pseudo_term(probe: &impl DensityProbe1D, x: f64, eps: f64, units: &Units) -> Result<f64> {
    if eps == 0.0 {
        return Ok(0.0);
    }
    if let Some(a) = probe.amplitude(x) {
        if a.phi == 0.0 {
            return Err(Error::RemovableSingularity { x });
        }
        return Ok(-0.5 * eps * units.hbar2_over_m() * a.d2 / a.phi);
    }
    Ok(eps * q_linear_1d(probe, x, units)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> FnDensity1D<impl Fn(f64) -> DensityJet> {
        FnDensity1D(|x: f64| {
            let p = (-x * x).exp();
            DensityJet {
                p,
                d1: -2.0 * x * p,
                d2: (4.0 * x * x - 2.0) * p,
                d3: (12.0 * x - 8.0 * x * x * x) * p,
                d4: (16.0 * x.powi(4) - 48.0 * x * x + 12.0) * p,
            }
        })
    }

    fn constant(c: f64) -> FnDensity1D<impl Fn(f64) -> DensityJet> {
        FnDensity1D(move |_| DensityJet { p: c, ..Default::default() })
    }

    fn four_term(eta: f64, p: f64, pp: f64, pm: f64) -> f64 {
        let d = (1.0 - eta) * p + eta * pp;
        (p / d).ln() + 1.0 - (1.0 - eta) * p / d - eta * pm / ((1.0 - eta) * pm + eta * p)
    }

    #[test]
    fn bracket_equals_four_term_form() {
        for &(eta, p, pp, pm) in &[(0.5, 1.0, 2.0, 0.3), (0.1, 0.2, 0.01, 5.0), (0.9, 3.0, 3.5, 2.5)] {
            let b = bracket(eta, pp / p - 1.0, p / pm - 1.0);
            assert!((b - four_term(eta, p, pp, pm)).abs() < 1e-14);
        }
    }

    #[test]
    fn rearranged_bracket_agrees_and_keeps_precision() {
        let eta = 0.4;
        let (p, pp, pm) = (1.0, 1.3, 0.8);
        let c = ShiftedChanges::from_values(p, pp, pm);
        assert!((bracket_from_changes(eta, &c) - four_term(eta, p, pp, pm)).abs() < 1e-15);
        // smooth exp(k x) density: u = e^{ks} - 1, exact second difference
        let (k, s) = (1.0f64, 1e-6);
        let plus = (k * s).exp_m1();
        let minus = (-k * s).exp_m1();
        let sum = 4.0 * (0.5 * k * s).sinh().powi(2);
        let b = bracket_from_changes(eta, &ShiftedChanges { plus, minus, sum });
        // v = u exactly for an exponential, leaving only the O(u^2) terms
        let u = plus;
        let expected = (eta * u - (eta * u).ln_1p()) - eta * eta * (1.0 - eta) * u * u / (1.0 + eta * u)
            - eta.powi(3) * u * u / (1.0 + eta * u);
        assert!((b - expected).abs() < 1e-8 * expected.abs(), "{b} {expected}");
    }

    #[test]
    fn bracket_limits() {
        let eta = 0.3;
        assert!((bracket(eta, -1.0, 0.0) - (-(1.0 - eta).ln() - eta)).abs() < 1e-15);
        assert!((bracket(eta, 0.0, f64::INFINITY) - eta).abs() < 1e-15);
        assert_eq!(bracket(eta, 0.0, 0.0), 0.0);
    }

    #[test]
    fn constant_density_is_annihilated() {
        let units = Units::default();
        let params = NonlinearityParams::new(0.3, 0.4);
        let probe = constant(2.5);
        assert_eq!(q_nl_1d(&probe, 0.2, &params, &units).unwrap(), 0.0);
        assert_eq!(q_linear_1d(&probe, 0.2, &units).unwrap(), 0.0);
        assert_eq!(f_nonlinear_1d(&probe, 0.2, &params, &units).unwrap(), 0.0);
        let p3 = FnDensity3D { density: |_: [f64; 3]| 0.7, step: 1e-3 };
        let params3 = NonlinearityParams::three_d(0.3, 0.4);
        for axis in 0..3 {
            assert_eq!(q_nl_axis(&p3, [0.1, 0.2, 0.3], axis, &params3, &units).unwrap(), 0.0);
        }
        // finite-difference roundoff only
        assert!(f_nonlinear_3d(&p3, [0.1, 0.2, 0.3], &params3, &units).unwrap().abs() < 1e-9);
    }

    #[test]
    fn gaussian_matches_extended_precision() {
        let units = Units::default();
        let params = NonlinearityParams::new(0.1, 0.5);
        let v = q_nl_1d(&gaussian(), 0.0, &params, &units).unwrap();
        let oracle = 0.499_687_500_081_380_174_424_929_278;
        assert!((v - oracle).abs() < 1e-12 * oracle, "{v}");
        let v = q_nl_1d(&gaussian(), 0.37, &params, &units).unwrap();
        let oracle = 0.422_848_229_420_220_081_547_701_384_9;
        assert!((v - oracle).abs() < 1e-12 * oracle, "{v}");
    }

    #[test]
    fn linear_potential_of_sho_ground_state() {
        let units = Units::default();
        let s = QuantumState::oscillator(0, 1.0).unwrap();
        let probe = s.probe_1d().unwrap();
        assert!((q_linear_1d(&probe, 0.0, &units).unwrap() - 0.5).abs() < 1e-15);
        for x in [0.0, 0.4, 1.7, 3.0] {
            let total = q_linear_1d(&probe, x, &units).unwrap() + s.potential_1d(x);
            assert!((total - s.energy()).abs() < 1e-12);
        }
    }

    #[test]
    fn node_handling() {
        let units = Units::default();
        let params = NonlinearityParams::new(0.01, 0.5);
        let s = QuantumState::oscillator(1, 1.0).unwrap();
        let probe = s.probe_1d().unwrap();
        assert!(matches!(q_linear_1d(&probe, 0.0, &units), Err(Error::RemovableSingularity { .. })));
        assert_eq!(weighted_q_nl_1d(&probe, 0.0, &params, &units).unwrap(), 0.0);
        assert_eq!(weighted_q_linear_1d(&probe, 0.0, &units), 0.0);
        assert_eq!(q_nl_1d(&probe, 0.0, &params, &units).unwrap(), f64::NEG_INFINITY);
        // a probe whose density vanishes on both sides
        let dead = constant(0.0);
        assert!(matches!(q_nl_1d(&dead, 0.0, &params, &units), Err(Error::RegulatorFailure { .. })));
    }

    #[test]
    fn weighted_product_is_continuous_at_well_wall() {
        let units = Units::default();
        let params = NonlinearityParams::new(1e-3, 0.5);
        let s = QuantumState::well(2, 1.0).unwrap();
        let probe = s.probe_1d().unwrap();
        let near = weighted_f_1d(&probe, 1e-9, &params, &units).unwrap();
        assert!(near.abs() < 1e-6);
        assert_eq!(weighted_f_1d(&probe, 0.0, &params, &units).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let units = Units::default();
        let probe = gaussian();
        for p in [NonlinearityParams::new(0.1, 0.0), NonlinearityParams::new(0.1, 1.0)] {
            assert!(matches!(q_nl_1d(&probe, 0.0, &p, &units), Err(Error::RegulatorOutOfRange(_))));
        }
        assert!(q_nl_1d(&probe, 0.0, &NonlinearityParams::new(0.0, 0.5), &units).is_err());
    }

    #[test]
    fn symmetrized_is_average_over_sign() {
        let units = Units::default();
        let probe = gaussian();
        let p = NonlinearityParams::new(0.2, 0.3);
        let plus = q_nl_1d(&probe, 0.4, &p, &units).unwrap();
        let minus = q_nl_1d(&probe, 0.4, &p.with_length(-0.2), &units).unwrap();
        let sym = q_nl_1d(&probe, 0.4, &NonlinearityParams { symmetrized: true, ..p }, &units).unwrap();
        assert!((sym - 0.5 * (plus + minus)).abs() < 1e-14);
    }

    #[test]
    fn separable_3d_reduces_to_1d() {
        let units = Units::default();
        let p1 = gaussian();
        let p3 = FnDensity3D { density: |r: [f64; 3]| (-r[0] * r[0]).exp() * 0.8, step: 1e-3 };
        let params = NonlinearityParams::new(0.05, 0.5);
        for x in [-0.8, 0.1, 0.9] {
            let a = q_nl_3d(&p3, [x, 0.3, -2.0], &params, &units).unwrap();
            let b = q_nl_1d(&p1, x, &params, &units).unwrap();
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn three_d_linear_forms_agree() {
        let units = Units::default();
        for (n, l, m) in [(1, 0, 0), (2, 1, 0), (3, 2, 1)] {
            let s = QuantumState::hydrogen(n, l, m, 1.0).unwrap();
            let probe = s.probe_3d().unwrap();
            let r = [0.7, -0.4, 1.1];
            let a = q_linear_3d(&probe, r, &units).unwrap();
            let b = q_linear_3d_sqrt_form(&probe, r, &units).unwrap();
            let lap: f64 = (0..3).map(|i| s.hydrogen_axis_jet(r, i).dd).sum();
            let chi: f64 = s.hydrogen_amplitude(r);
            let exact = -0.5 * lap / chi;
            assert!((a - exact).abs() < 1e-7 * exact.abs().max(1.0), "{a} {exact}");
            assert!((b - exact).abs() < 1e-7 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn ground_state_3d_closed_form() {
        // lap sqrt(p)/sqrt(p) = 1/a^2 - 2/(a r)
        let units = Units::default();
        let s = QuantumState::hydrogen(1, 0, 0, 1.0).unwrap();
        let probe = s.probe_3d().unwrap();
        let r = [0.5, 0.5, 0.5];
        let rad = 0.75f64.sqrt();
        let q = q_linear_3d(&probe, r, &units).unwrap();
        assert!((q + 0.5 * (1.0 - 2.0 / rad)).abs() < 1e-8);
    }

    #[test]
    fn comparison_terms() {
        assert_eq!(gp_term(0.0, 2.0), 0.0);
        assert!((gp_term(0.3, 2.0) - 0.6).abs() < 1e-15);
        assert!(gp_term(0.3, -1.0) < 0.0);
        let units = Units::default();
        let s = QuantumState::well(2, 1.0).unwrap();
        let probe = s.probe_1d().unwrap();
        assert_eq!(pseudo_term(&probe, 0.3, 0.0, &units).unwrap(), 0.0);
        // -psi''/psi = k^2 inside the well
        let v = pseudo_term(&probe, 0.3, 1.0, &units).unwrap();
        assert!((v - s.energy()).abs() < 1e-10);
    }
}
