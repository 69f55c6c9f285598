//! First-order energy shifts, critical regulator values and parameter scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::nonlinearity::{self, DensityProbe3D, StateProbe3D};
use crate::params::{validate_params, NonlinearityParams};
use crate::quadrature::{self, IntegrationPlan1D, MCPlan3D, McEstimate, Sampler};
use crate::result::{Method, ShiftResult};
use crate::special;
use crate::wavefunctions::{QuantumState, StateKind, System};

/// Bracket searched by [`critical_eta`].
pub const CRITICAL_ETA_BRACKET: (f64, f64) = (0.05, 0.95);
pub const CRITICAL_ETA_TOL: f64 = 1e-3;

/// Which nonlinear term is treated as the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Nonlinearity {
    /// The regularized information-theoretic term.
    InfoTheoretic,
    /// Gross-Pitaevskii `g p`.
    Gp { g: f64 },
    /// The rescaled kinetic term of strength `eps`.
    Pseudo { eps: f64 },
}

impl Nonlinearity {
    /// Compact tag: `info`, `gp:<g>`, `pseudo:<eps>`.
    pub fn tag(&self) -> String {
        match self {
            Nonlinearity::InfoTheoretic => "info".into(),
            Nonlinearity::Gp { g } => format!("gp:{g}"),
            Nonlinearity::Pseudo { eps } => format!("pseudo:{eps}"),
        }
    }

    pub fn parse_tag(tag: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown nonlinearity '{tag}'"));
        let (kind, value) = match tag.split_once(':') {
            Some((k, v)) => (k, Some(v.parse::<f64>().map_err(|_| bad())?)),
            None => (tag, None),
        };
        match (kind, value) {
            ("info", None) => Ok(Nonlinearity::InfoTheoretic),
            ("gp", Some(g)) => Ok(Nonlinearity::Gp { g }),
            ("pseudo", Some(eps)) => Ok(Nonlinearity::Pseudo { eps }),
            _ => Err(bad()),
        }
    }
}

/// How the hydrogen integral is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HydrogenEstimator {
    /// Each Cartesian term integrated exactly along the line through the
    /// sample point, divided by the line's probability mass.
    LineIntegrated,
    /// The integrand at the sample point divided by the density.
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydrogenOptions {
    pub estimator: HydrogenEstimator,
    /// Use uniform stratified cells in `[-h, h]^3` instead of Metropolis.
    pub stratified_half_width: Option<f64>,
    /// Tolerance of the line integrals, relative to `|E_n|`.
    pub line_rel_tol: f64,
}

impl Default for HydrogenOptions {
    fn default() -> Self {
        HydrogenOptions { estimator: HydrogenEstimator::LineIntegrated, stratified_half_width: None, line_rel_tol: 1e-7 }
    }
}

/// Convert a raw shift to the system's dimensionless form.
pub fn delta_e_dimensionless(raw: f64, state: &QuantumState) -> f64 {
    raw / state.energy_unit()
}

fn finish(state: &QuantumState, value: f64, err: f64, method: Method, evaluations: usize, warnings: Vec<String>) -> ShiftResult {
    let unit = state.energy_unit();
    ShiftResult {
        delta_e: value,
        delta_e_dimensionless: value / unit,
        err_estimate: err,
        err_dimensionless: err / unit,
        method,
        evaluations,
        warnings,
    }
}

fn perturbative_warnings(state: &QuantumState, params: &NonlinearityParams) -> Result<Vec<String>> {
    let checked = validate_params(*params, state.a)?;
    params.check_length()?;
    let mut warnings = Vec::new();
    if checked.warning {
        warnings.push(format!("|L|/a = {:.3e} is outside the perturbative regime", checked.ratio));
    }
    Ok(warnings)
}

/// Integration domain of a 1D state, with oscillator tails cut where the
/// density drops below `tail_cutoff` times its peak.
pub fn integration_domain_1d(state: &QuantumState, cfg: &RunConfig) -> Result<(f64, f64)> {
    let (lo, hi) = state.domain_1d()?;
    let StateKind::Oscillator { n } = state.kind else {
        return Ok((lo, hi));
    };
    let peak = state.peak_density_1d()? * state.a;
    let turning = (2.0 * f64::from(n) + 1.0).sqrt();
    let z_max = hi / state.a;
    let mut z = turning;
    while z < z_max {
        let psi = special::hermite_function(n, z);
        if psi * psi < cfg.tail_cutoff * peak {
            // one extra oscillator length of margin
            let r = ((z + 1.0) * state.a).min(hi);
            return Ok((-r, r));
        }
        z += 0.05;
    }
    Ok((lo, hi))
}

/// Node positions, their images under `x -> x +- s`, and the domain ends.
fn node_breakpoints(state: &QuantumState, shift: f64) -> Result<Vec<f64>> {
    let nodes = state.nodes()?;
    let mut points = Vec::with_capacity(3 * nodes.len());
    for node in &nodes {
        points.push(node.position);
        points.push(node.position + shift);
        points.push(node.position - shift);
    }
    Ok(points)
}

/// First-order shift of the information-theoretic nonlinearity.
///
/// 1D states use breakpointed adaptive quadrature of the node-safe integrand
/// `p Q_nl + (hbar^2/2m) phi phi''`; hydrogen uses line-integrated Monte Carlo.
pub fn delta_e(state: &QuantumState, params: &NonlinearityParams, cfg: &RunConfig) -> Result<ShiftResult> {
    if state.is_1d() {
        delta_e_1d(state, params, cfg)
    } else {
        delta_e_hydrogen(state, params, cfg, &HydrogenOptions::default())
    }
}

/// Shift for any [`Nonlinearity`].
pub fn delta_e_for(
    state: &QuantumState,
    nonlinearity: Nonlinearity,
    params: &NonlinearityParams,
    cfg: &RunConfig,
) -> Result<ShiftResult> {
    match nonlinearity {
        Nonlinearity::InfoTheoretic => delta_e(state, params, cfg),
        Nonlinearity::Gp { g } => delta_e_gp(state, g, cfg),
        Nonlinearity::Pseudo { eps } => delta_e_pseudo(state, eps, cfg),
    }
}

fn delta_e_1d(state: &QuantumState, params: &NonlinearityParams, cfg: &RunConfig) -> Result<ShiftResult> {
    cfg.validate()?;
    let warnings = perturbative_warnings(state, params)?;
    let probe = state.probe_1d()?;
    let (lo, hi) = integration_domain_1d(state, cfg)?;
    let plan = IntegrationPlan1D::new(lo, hi)
        .with_breakpoints(node_breakpoints(state, params.shift())?)
        .with_tolerances(cfg.rel_tol, cfg.abs_tol * state.energy_unit());
    let units = state.units;
    let r = quadrature::try_integrate_1d(|x| nonlinearity::weighted_f_1d(&probe, x, params, &units), &plan)?;
    Ok(finish(state, r.value, r.err, Method::Quadrature, r.evaluations, warnings))
}

/// Gross-Pitaevskii shift `g int p^2` by quadrature.
pub fn delta_e_gp(state: &QuantumState, g: f64, cfg: &RunConfig) -> Result<ShiftResult> {
    cfg.validate()?;
    if !g.is_finite() {
        return Err(Error::InvalidArgument(format!("coupling g = {g}")));
    }
    let probe = state.probe_1d()?;
    let (lo, hi) = integration_domain_1d(state, cfg)?;
    let plan = IntegrationPlan1D::new(lo, hi)
        .with_breakpoints(state.nodes()?.iter().map(|n| n.position))
        .with_tolerances(cfg.rel_tol.min(1e-12), f64::MIN_POSITIVE);
    let r = quadrature::integrate_1d(
        |x| {
            let p = nonlinearity::DensityProbe1D::density(&probe, x);
            p * p
        },
        &plan,
    )?;
    Ok(finish(state, g * r.value, (g * r.err).abs(), Method::Quadrature, r.evaluations, Vec::new()))
}

/// Shift of the rescaled kinetic term, `eps <T>`.
///
/// The closed form is returned; the quadrature of `(hbar^2/2m)(p')^2/4p`
/// (with the value `C^2` at nodes) supplies the error estimate.
pub fn delta_e_pseudo(state: &QuantumState, eps: f64, cfg: &RunConfig) -> Result<ShiftResult> {
    cfg.validate()?;
    if !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("eps = {eps}")));
    }
    let exact = eps * state.kinetic_expectation();
    let probe = state.probe_1d()?;
    let (lo, hi) = integration_domain_1d(state, cfg)?;
    let plan = IntegrationPlan1D::new(lo, hi)
        .with_breakpoints(state.nodes()?.iter().map(|n| n.position))
        .with_tolerances(1e-13, f64::MIN_POSITIVE);
    let h2m = state.units.hbar2_over_m();
    let r = quadrature::integrate_1d(
        |x| {
            let j = nonlinearity::DensityProbe1D::jet(&probe, x);
            let grad = if j.p > 0.0 {
                j.d1 * j.d1 / (4.0 * j.p)
            } else {
                nonlinearity::DensityProbe1D::amplitude(&probe, x).map_or(0.0, |a| a.d1 * a.d1)
            };
            0.5 * h2m * grad
        },
        &plan,
    )?;
    let mismatch = (eps * r.value - exact).abs();
    let mut warnings = Vec::new();
    if mismatch > 1e-8 * exact.abs().max(f64::MIN_POSITIVE) {
        warnings.push(format!("kinetic quadrature differs from the closed form by {mismatch:.3e}"));
    }
    Ok(finish(state, exact, mismatch, Method::ClosedForm, r.evaluations, warnings))
}

/// Node surfaces of a hydrogen density, in the form needed to intersect lines.
#[derive(Debug, Clone)]
struct NodeGeometry {
    radii: Vec<f64>,
    /// `cos theta` of conical nodes (0 is the `z = 0` plane).
    cones: Vec<f64>,
    /// Density vanishes on the z axis (`m != 0`).
    axis_node: bool,
    r_max: f64,
}

impl NodeGeometry {
    fn new(state: &QuantumState) -> Result<Self> {
        let StateKind::Hydrogen { n, m, .. } = state.kind else {
            return Err(Error::Precondition("a hydrogen state".into()));
        };
        let nf = f64::from(n);
        Ok(NodeGeometry {
            radii: state.hydrogen_radial_nodes()?,
            cones: state.hydrogen_angular_nodes()?,
            axis_node: m != 0,
            r_max: 0.5 * nf * state.a * (45.0 + 6.0 * nf),
        })
    }

    /// Parameter values `t` where `r + t e_axis` crosses a node surface or
    /// passes closest to the origin or the z axis.
    fn crossings(&self, r: [f64; 3], axis: usize) -> Vec<f64> {
        let r2: f64 = r.iter().map(|v| v * v).sum();
        let perp2 = r2 - r[axis] * r[axis];
        let mut out = vec![-r[axis]];
        for &rad in &self.radii {
            let d = rad * rad - perp2;
            if d > 0.0 {
                let h = d.sqrt();
                out.push(-r[axis] - h);
                out.push(-r[axis] + h);
            }
        }
        for &c in &self.cones {
            if axis == 2 {
                // z = c s / sqrt(1 - c^2), s fixed
                let s = perp2.sqrt();
                out.push(c * s / (1.0 - c * c).sqrt() - r[2]);
            } else if c != 0.0 && (r[2] > 0.0) == (c > 0.0) {
                // fixed z: x^2 + y^2 = z^2 (1/c^2 - 1)
                let other = r[1 - axis];
                let d = r[2] * r[2] * (1.0 / (c * c) - 1.0) - other * other;
                if d > 0.0 {
                    let h = d.sqrt();
                    out.push(-r[axis] - h);
                    out.push(-r[axis] + h);
                }
            }
        }
        if self.axis_node && axis != 2 {
            out.push(-r[axis]);
        }
        out
    }
}

struct LineContext<'a> {
    state: &'a QuantumState,
    probe: StateProbe3D<'a>,
    geometry: NodeGeometry,
    params: NonlinearityParams,
    rel_tol: f64,
    energy_scale: f64,
}

impl LineContext<'_> {
    /// `int p F_axis dt / int p dt` along the line through `r`.
    fn axis_estimate(&self, r: [f64; 3], axis: usize) -> Result<(f64, usize)> {
        let r2: f64 = r.iter().map(|v| v * v).sum();
        let perp2 = r2 - r[axis] * r[axis];
        let r_max = self.geometry.r_max.max(2.0 * r2.sqrt());
        let half = (r_max * r_max - perp2).max(0.0).sqrt();
        let (lo, hi) = (-r[axis] - half, -r[axis] + half);
        let shift = self.params.shift();
        let mut points = Vec::new();
        for t in self.geometry.crossings(r, axis) {
            points.extend([t, t + shift, t - shift]);
        }
        let at = |t: f64| {
            let mut q = r;
            q[axis] += t;
            q
        };
        let mass_plan = IntegrationPlan1D::new(lo, hi)
            .with_breakpoints(points.iter().copied())
            .with_tolerances(self.rel_tol, f64::MIN_POSITIVE);
        let mass = quadrature::integrate_1d(|t| self.probe.density(at(t)), &mass_plan)?;
        if !(mass.value > 0.0) {
            return Ok((0.0, mass.evaluations));
        }
        let plan = mass_plan.with_tolerances(self.rel_tol, self.rel_tol * self.energy_scale * mass.value);
        let units = self.state.units;
        let line = quadrature::try_integrate_1d(
            |t| nonlinearity::weighted_f_axis(&self.probe, at(t), axis, &self.params, &units),
            &plan,
        )?;
        Ok((line.value / mass.value, mass.evaluations + line.evaluations))
    }
}

/// Hydrogen shift by Monte Carlo over `p`, with the chosen estimator and sampler.
pub fn delta_e_hydrogen(
    state: &QuantumState,
    params: &NonlinearityParams,
    cfg: &RunConfig,
    opts: &HydrogenOptions,
) -> Result<ShiftResult> {
    cfg.validate()?;
    let mut warnings = perturbative_warnings(state, params)?;
    let probe = state.probe_3d()?;
    let n = f64::from(state.n());
    let mut plan = match opts.stratified_half_width {
        Some(h) => MCPlan3D::stratified(cfg.mc_samples, h, cfg.rng_seed),
        None => MCPlan3D::metropolis(cfg.mc_samples, n * state.a, cfg.rng_seed).with_burn_in(cfg.mc_burn_in),
    };
    if cfg.mc_samples < plan.chains * quadrature::MC_BATCHES {
        plan.chains = 1;
    }
    let density = |r: [f64; 3]| probe.density(r);
    let units = state.units;
    let est: McEstimate = match opts.estimator {
        HydrogenEstimator::Pointwise => quadrature::integrate_mc_3d(
            |r| nonlinearity::weighted_f_3d(&probe, r, params, &units).unwrap_or(f64::NAN),
            density,
            &plan,
        )?,
        HydrogenEstimator::LineIntegrated => {
            let ctx = LineContext {
                state,
                probe,
                geometry: NodeGeometry::new(state)?,
                params: *params,
                rel_tol: opts.line_rel_tol,
                energy_scale: state.energy().abs(),
            };
            let estimator = |r: [f64; 3]| -> Result<f64> {
                let mut total = 0.0;
                for axis in 0..3 {
                    total += ctx.axis_estimate(r, axis)?.0;
                }
                Ok(total)
            };
            match plan.sampler {
                Sampler::MetropolisOnP => quadrature::mc_expectation(estimator, density, &plan)?,
                Sampler::StratifiedBox { .. } => {
                    return Err(Error::InvalidArgument(
                        "the line-integrated estimator needs Metropolis sampling".into(),
                    ))
                }
            }
        }
    };
    if !est.value.is_finite() {
        return Err(Error::NonConvergence { best: est.value, err: est.std_error, subdivisions: 0 });
    }
    if let Some(limit) = cfg.mc_max_rel_error {
        if est.std_error > limit * est.value.abs() {
            return Err(Error::McTolerance { std_error: est.std_error, requested: limit * est.value.abs() });
        }
    }
    warnings.extend(est.warnings.iter().cloned());
    Ok(finish(state, est.value, est.std_error, Method::MonteCarlo, est.samples, warnings))
}

/// Outcome of the regulator bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalEta {
    pub eta: f64,
    pub lo: f64,
    pub hi: f64,
    /// The state has no nodes, so the zero found is the ground-state one
    /// rather than the universal node-dominated one.
    pub nodeless: bool,
    pub iterations: usize,
}

/// Whether a 1D state has nodes (walls count for the well).
pub fn has_nodes(state: &QuantumState) -> bool {
    match state.kind {
        StateKind::InfiniteWell { .. } => true,
        StateKind::Oscillator { n } => n >= 1,
        StateKind::Hydrogen { n, .. } => n > 1,
    }
}

/// Regulator value where the shift changes sign, by bisection on `[0.05, 0.95]`.
pub fn critical_eta(state: &QuantumState, length: f64, cfg: &RunConfig) -> Result<CriticalEta> {
    let (mut lo, mut hi) = CRITICAL_ETA_BRACKET;
    let eval = |eta: f64| -> Result<f64> {
        let params = base_params(state, length, eta);
        Ok(delta_e(state, &params, cfg)?.delta_e)
    };
    let mut f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    if f_lo == 0.0 {
        return Ok(CriticalEta { eta: lo, lo, hi: lo, nodeless: !has_nodes(state), iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut iterations = 0;
    while hi - lo > CRITICAL_ETA_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = eval(mid)?;
        iterations += 1;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalEta { eta: 0.5 * (lo + hi), lo, hi, nodeless: !has_nodes(state), iterations })
}

fn base_params(state: &QuantumState, length: f64, eta: f64) -> NonlinearityParams {
    if state.is_1d() {
        NonlinearityParams::new(length, eta)
    } else {
        NonlinearityParams::three_d(length, eta)
    }
}

/// A grid of states and length scales at fixed `L`, `eta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub system: System,
    /// `(n, l, m)` triples; `l = m = 0` for 1D systems.
    pub states: Vec<(u32, u32, i32)>,
    pub a_values: Vec<f64>,
    pub length: f64,
    pub eta: f64,
    pub nonlinearity: Nonlinearity,
}

impl ScanSpec {
    /// 1D scan over `n` values.
    pub fn one_d(system: System, ns: impl IntoIterator<Item = u32>, a_values: Vec<f64>, length: f64, eta: f64) -> Self {
        ScanSpec {
            system,
            states: ns.into_iter().map(|n| (n, 0, 0)).collect(),
            a_values,
            length,
            eta,
            nonlinearity: Nonlinearity::InfoTheoretic,
        }
    }

    pub fn with_nonlinearity(mut self, nonlinearity: Nonlinearity) -> Self {
        self.nonlinearity = nonlinearity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() || self.a_values.is_empty() {
            return Err(Error::InvalidArgument("scan ranges must be non-empty".into()));
        }
        if self.a_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("a grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// `points` values from `lo` to `hi`, equally spaced in `ln a`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || points == 0 || (points > 1 && hi == lo) {
        return Err(Error::InvalidArgument(format!("bad geometric grid ({lo}, {hi}, {points})")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { hi } else { lo * (ratio * i as f64).exp() })
        .collect())
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub system: System,
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub a: f64,
    pub length: f64,
    pub eta: f64,
    pub nonlinearity: Nonlinearity,
    pub seed: u64,
    pub result: std::result::Result<ShiftResult, String>,
}

/// Worker count from `NLSE_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("NLSE_THREADS").ok()?.trim().parse::<usize>().ok().filter(|&n| n > 0)
}

/// Evaluate every grid point; rows come back in grid order (states outer, `a`
/// inner) and failures are recorded per row.
pub fn scan(spec: &ScanSpec, cfg: &RunConfig) -> Result<Vec<ScanRow>> {
    spec.validate()?;
    cfg.validate()?;
    let grid: Vec<((u32, u32, i32), f64)> =
        spec.states.iter().flat_map(|&q| spec.a_values.iter().map(move |&a| (q, a))).collect();
    let run = |&((n, l, m), a): &((u32, u32, i32), f64)| {
        let result = QuantumState::from_parts(spec.system, n, l, m, a)
            .and_then(|state| {
                let params = base_params(&state, spec.length, spec.eta);
                delta_e_for(&state, spec.nonlinearity, &params, cfg)
            })
            .map_err(|e| e.to_string());
        ScanRow {
            system: spec.system,
            n,
            l,
            m,
            a,
            length: spec.length,
            eta: spec.eta,
            nonlinearity: spec.nonlinearity,
            seed: cfg.rng_seed,
            result,
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(cap) = thread_cap() {
        builder = builder.num_threads(cap);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| grid.par_iter().map(run).collect()))
}
