//! Adaptive Gauss-Kronrod integration in 1D and seeded Monte Carlo in 3D.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_SUBDIVISIONS: usize = 1_000_000;
pub const MIN_MC_SAMPLES: usize = 10_000;
pub const MC_BATCHES: usize = 32;

// 21-point Kronrod abscissae and weights with the embedded 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_885_933,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Domain, breakpoints and tolerances for [`integrate_1d`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationPlan1D {
    pub domain: (f64, f64),
    /// Sorted interior points that panels never straddle.
    pub breakpoints: Vec<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl IntegrationPlan1D {
    pub fn new(lo: f64, hi: f64) -> Self {
        IntegrationPlan1D {
            domain: (lo, hi),
            breakpoints: Vec::new(),
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }

    /// Add breakpoints; points outside the open domain are dropped.
    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        let (lo, hi) = self.domain;
        self.breakpoints.extend(points.into_iter().filter(|&x| x > lo && x < hi && x.is_finite()));
        self.breakpoints.sort_by(f64::total_cmp);
        self.breakpoints.dedup();
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, max: usize) -> Self {
        self.max_subdivisions = max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("bad integration domain ({lo}, {hi})")));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Result of a 1D integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub err: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk21<F: FnMut(f64) -> Result<f64>>(f: &mut F, lo: f64, hi: f64) -> Result<Panel> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() || !err.is_finite() {
        return Err(Error::NonConvergence { best: value, err: f64::INFINITY, subdivisions: 0 });
    }
    Ok(Panel { lo, hi, value, err })
}

/// Adaptive 21-point Gauss-Kronrod quadrature of a fallible integrand.
///
/// Panels are bisected globally in order of decreasing error until the summed
/// error estimate drops below `max(rel_tol |value|, abs_tol)`. No panel ever
/// straddles a breakpoint.
pub fn try_integrate_1d<F: FnMut(f64) -> Result<f64>>(mut f: F, plan: &IntegrationPlan1D) -> Result<Integral> {
    plan.validate()?;
    let mut edges = Vec::with_capacity(plan.breakpoints.len() + 2);
    edges.push(plan.domain.0);
    edges.extend(plan.breakpoints.iter().copied());
    edges.push(plan.domain.1);

    let mut heap = BinaryHeap::new();
    let mut parked: Vec<Panel> = Vec::new();
    for w in edges.windows(2) {
        heap.push(gk21(&mut f, w[0], w[1])?);
    }
    let mut evaluations = 21 * heap.len();
    let mut subdivisions = 0usize;
    let totals = |heap: &BinaryHeap<Panel>, parked: &[Panel]| {
        heap.iter().chain(parked.iter()).fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
    };
    let (mut value, mut err) = totals(&heap, &parked);
    loop {
        if subdivisions % 512 == 0 {
            // refresh the running sums to keep rounding drift out
            (value, err) = totals(&heap, &parked);
        }
        let target = (plan.rel_tol * value.abs()).max(plan.abs_tol);
        if err <= target {
            (value, err) = totals(&heap, &parked);
            if err <= (plan.rel_tol * value.abs()).max(plan.abs_tol) {
                return Ok(Integral { value, err, evaluations, subdivisions });
            }
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::NonConvergence { best: value, err, subdivisions });
        };
        if subdivisions >= plan.max_subdivisions {
            return Err(Error::NonConvergence { best: value, err, subdivisions });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let width = worst.hi - worst.lo;
        if width <= 1e3 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs()).max(f64::MIN_POSITIVE) {
            parked.push(worst);
            continue;
        }
        let left = gk21(&mut f, worst.lo, mid)?;
        let right = gk21(&mut f, mid, worst.hi)?;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        evaluations += 42;
        subdivisions += 1;
    }
}

/// Adaptive quadrature of an infallible integrand.
pub fn integrate_1d<F: FnMut(f64) -> f64>(mut f: F, plan: &IntegrationPlan1D) -> Result<Integral> {
    try_integrate_1d(|x| Ok(f(x)), plan)
}

/// Radius beyond which `exp(-z^2) < cutoff`.
pub fn gaussian_tail_radius(cutoff: f64) -> f64 {
    (-cutoff.ln()).max(0.0).sqrt()
}

/// How the 3D sample points are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Random-walk Metropolis with target density `p`.
    MetropolisOnP,
    /// Uniform samples in `k^3` equal cells of the cube `[-h, h]^3`.
    StratifiedBox { half_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCPlan3D {
    pub sampler: Sampler,
    pub n_samples: usize,
    pub burn_in: usize,
    pub proposal_scale: f64,
    pub seed: u64,
    /// Independent Metropolis chains; samples are split evenly.
    pub chains: usize,
}

impl MCPlan3D {
    pub fn metropolis(n_samples: usize, proposal_scale: f64, seed: u64) -> Self {
        MCPlan3D { sampler: Sampler::MetropolisOnP, n_samples, burn_in: 10_000, proposal_scale, seed, chains: 4 }
    }

    pub fn stratified(n_samples: usize, half_width: f64, seed: u64) -> Self {
        MCPlan3D {
            sampler: Sampler::StratifiedBox { half_width },
            n_samples,
            burn_in: 0,
            proposal_scale: half_width,
            seed,
            chains: 1,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_MC_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "n_samples = {} below the minimum {MIN_MC_SAMPLES}",
                self.n_samples
            )));
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return Err(Error::InvalidArgument("proposal_scale must be positive".into()));
        }
        if self.chains == 0 || MC_BATCHES % self.chains != 0 {
            return Err(Error::InvalidArgument(format!("chains must divide {MC_BATCHES}")));
        }
        if let Sampler::StratifiedBox { half_width } = self.sampler {
            if !(half_width > 0.0 && half_width.is_finite()) {
                return Err(Error::InvalidArgument("box half width must be positive".into()));
            }
        }
        Ok(())
    }
}

/// A Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Integrated autocorrelation time from batch means (1 for independent samples).
    pub tau_int: f64,
    pub acceptance: f64,
    pub samples: usize,
    pub warnings: Vec<String>,
}

fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64 + 1);
    rng
}

struct ChainOutput {
    batch_sums: Vec<f64>,
    sum: f64,
    sum_sq: f64,
    count: usize,
    accepted: usize,
}

fn run_chain<G, P>(g: &G, p: &P, plan: &MCPlan3D, chain: usize, per_chain: usize) -> Result<ChainOutput>
where
    G: Fn([f64; 3]) -> Result<f64> + Sync,
    P: Fn([f64; 3]) -> f64 + Sync,
{
    let mut rng = chain_rng(plan.seed, chain);
    let sigma = plan.proposal_scale;
    let gauss = |rng: &mut ChaCha8Rng| -> f64 { rng.sample::<f64, _>(StandardNormal) };
    let mut x = [0.0; 3];
    let mut px = 0.0;
    for _ in 0..10_000 {
        x = [sigma * gauss(&mut rng), sigma * gauss(&mut rng), sigma * gauss(&mut rng)];
        px = p(x);
        if px > 0.0 {
            break;
        }
    }
    if !(px > 0.0) {
        return Err(Error::Precondition("a density with positive mass near the origin".into()));
    }
    let mut accepted = 0usize;
    let step = |rng: &mut ChaCha8Rng, x: &mut [f64; 3], px: &mut f64| -> bool {
        let y = [
            x[0] + sigma * gauss(rng),
            x[1] + sigma * gauss(rng),
            x[2] + sigma * gauss(rng),
        ];
        let py = p(y);
        let u: f64 = rng.gen();
        if py > 0.0 && u * *px < py {
            *x = y;
            *px = py;
            true
        } else {
            false
        }
    };
    for _ in 0..plan.burn_in {
        step(&mut rng, &mut x, &mut px);
    }
    let batches = MC_BATCHES / plan.chains;
    let batch_len = per_chain / batches;
    let mut out = ChainOutput { batch_sums: vec![0.0; batches], sum: 0.0, sum_sq: 0.0, count: 0, accepted: 0 };
    for i in 0..batch_len * batches {
        if step(&mut rng, &mut x, &mut px) {
            accepted += 1;
        }
        let v = g(x)?;
        out.batch_sums[i / batch_len] += v;
        out.sum += v;
        out.sum_sq += v * v;
        out.count += 1;
    }
    out.accepted = accepted;
    Ok(out)
}

/// Expectation `E_p[g]` over a normalized density `p`, by seeded Metropolis
/// chains run in parallel and merged in chain order.
pub fn mc_expectation<G, P>(g: G, p: P, plan: &MCPlan3D) -> Result<McEstimate>
where
    G: Fn([f64; 3]) -> Result<f64> + Sync,
    P: Fn([f64; 3]) -> f64 + Sync,
{
    plan.validate()?;
    if let Sampler::StratifiedBox { half_width } = plan.sampler {
        return stratified(|r| Ok(g(r)? * p(r)), half_width, plan);
    }
    let per_chain = plan.n_samples / plan.chains;
    let outputs: Vec<Result<ChainOutput>> =
        (0..plan.chains).into_par_iter().map(|c| run_chain(&g, &p, plan, c, per_chain)).collect();
    let mut batch_means = Vec::with_capacity(MC_BATCHES);
    let (mut sum, mut sum_sq, mut count, mut accepted) = (0.0, 0.0, 0usize, 0usize);
    for out in outputs {
        let out = out?;
        let batch_len = (out.count / out.batch_sums.len()) as f64;
        batch_means.extend(out.batch_sums.iter().map(|s| s / batch_len));
        sum += out.sum;
        sum_sq += out.sum_sq;
        count += out.count;
        accepted += out.accepted;
    }
    let n = count as f64;
    let value = sum / n;
    let nb = batch_means.len() as f64;
    let bm_mean = batch_means.iter().sum::<f64>() / nb;
    let bm_var = batch_means.iter().map(|b| (b - bm_mean).powi(2)).sum::<f64>() / (nb - 1.0);
    let std_error = (bm_var / nb).sqrt();
    let sample_var = (sum_sq / n - value * value).max(0.0);
    let tau_int = if sample_var > 0.0 { (n / nb) * bm_var / sample_var } else { 1.0 };
    let mut warnings = Vec::new();
    if tau_int > n / 100.0 {
        warnings.push(format!("integrated autocorrelation time {tau_int:.1} exceeds n_samples/100"));
    }
    Ok(McEstimate { value, std_error, tau_int, acceptance: accepted as f64 / n, samples: count, warnings })
}

/// `int f d^3r` as `E_p[f/p]` over a normalized density `p`.
pub fn integrate_mc_3d<F, P>(f: F, p: P, plan: &MCPlan3D) -> Result<McEstimate>
where
    F: Fn([f64; 3]) -> f64 + Sync,
    P: Fn([f64; 3]) -> f64 + Sync,
{
    if let Sampler::StratifiedBox { half_width } = plan.sampler {
        plan.validate()?;
        return stratified(|r| Ok(f(r)), half_width, plan);
    }
    mc_expectation(
        |r| {
            let pr = p(r);
            Ok(if pr > 0.0 { f(r) / pr } else { 0.0 })
        },
        &p,
        plan,
    )
}

/// Stratified uniform estimate of `int f d^3r` over `[-h, h]^3`.
fn stratified<F: Fn([f64; 3]) -> Result<f64>>(f: F, h: f64, plan: &MCPlan3D) -> Result<McEstimate> {
    let per_cell_min = 2usize;
    let k = ((plan.n_samples / per_cell_min) as f64).cbrt().floor().max(1.0) as usize;
    let k = k.min(64);
    let cells = k * k * k;
    let per_cell = (plan.n_samples / cells).max(per_cell_min);
    let width = 2.0 * h / k as f64;
    let vol = width * width * width;
    let mut rng = chain_rng(plan.seed, 0);
    let (mut value, mut var) = (0.0, 0.0);
    for cell in 0..cells {
        let (i, j, l) = (cell % k, (cell / k) % k, cell / (k * k));
        let origin = [-h + i as f64 * width, -h + j as f64 * width, -h + l as f64 * width];
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..per_cell {
            let r = [
                origin[0] + width * rng.gen::<f64>(),
                origin[1] + width * rng.gen::<f64>(),
                origin[2] + width * rng.gen::<f64>(),
            ];
            let v = f(r)?;
            s += v;
            s2 += v * v;
        }
        let m = per_cell as f64;
        let mean = s / m;
        let cell_var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
        value += vol * mean;
        var += vol * vol * cell_var / m;
    }
    Ok(McEstimate {
        value,
        std_error: var.sqrt(),
        tau_int: 1.0,
        acceptance: 1.0,
        samples: cells * per_cell,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_on_unit_interval() {
        let r = integrate_1d(|x| x * x, &IntegrationPlan1D::new(0.0, 1.0)).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_gaussian() {
        let radius = gaussian_tail_radius(1e-18);
        let plan = IntegrationPlan1D::new(-radius, radius).with_tolerances(1e-12, 1e-15);
        let r = integrate_1d(|x| (-x * x).exp(), &plan).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn kink_at_breakpoint() {
        let plan = IntegrationPlan1D::new(-1.0, 1.0).with_breakpoints([0.0]);
        let r = integrate_1d(|x: f64| x.abs(), &plan).unwrap();
        assert!((r.value - 1.0).abs() < 4.0 * f64::EPSILON);
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn polynomial_exactness_single_panel() {
        let f = |x: f64| (0..=15).map(|k| (k as f64 + 1.0) * x.powi(k)).sum::<f64>();
        let exact: f64 = (0..=15).map(|k| (k as f64 + 1.0) * (1.0 - (-1f64).powi(k + 1)) / (k as f64 + 1.0)).sum();
        let r = integrate_1d(f, &IntegrationPlan1D::new(-1.0, 1.0)).unwrap();
        assert!((r.value - exact).abs() < 1e-14 * exact.abs());
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn nonconvergence_carries_estimate() {
        let plan = IntegrationPlan1D::new(0.0, 1.0).with_max_subdivisions(3).with_tolerances(1e-15, 1e-300);
        match integrate_1d(|x: f64| (1.0 / x.max(1e-300)).sqrt() * (50.0 * x).sin(), &plan) {
            Err(Error::NonConvergence { best, subdivisions, .. }) => {
                assert!(best.is_finite());
                assert_eq!(subdivisions, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plan_validation() {
        assert!(IntegrationPlan1D::new(1.0, 0.0).validate().is_err());
        assert!(IntegrationPlan1D::new(0.0, 1.0).with_tolerances(0.0, 1.0).validate().is_err());
        let p = IntegrationPlan1D::new(0.0, 1.0).with_breakpoints([0.5, 2.0, 0.25, 0.5]);
        assert_eq!(p.breakpoints, vec![0.25, 0.5]);
        assert!(MCPlan3D::metropolis(100, 1.0, 1).validate().is_err());
        assert!(MCPlan3D::metropolis(20_000, 0.0, 1).validate().is_err());
    }

    fn ground_state_density(r: [f64; 3]) -> f64 {
        let rad = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        (-2.0 * rad).exp() / PI
    }

    #[test]
    fn mc_normalization() {
        let plan = MCPlan3D::metropolis(100_000, 1.0, 7);
        let est = integrate_mc_3d(ground_state_density, ground_state_density, &plan).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        assert!(est.std_error < 0.01);
        let strat = MCPlan3D::stratified(100_000, 8.0, 7);
        let est = integrate_mc_3d(ground_state_density, ground_state_density, &strat).unwrap();
        // uniform cells resolve the cusp at the origin poorly
        assert!(est.std_error < 0.02, "{est:?}");
        assert!((est.value - 1.0).abs() < 3.0 * est.std_error + 1e-6, "{est:?}");
    }

    #[test]
    fn mc_coulomb_expectation() {
        let v = |r: [f64; 3]| -1.0 / (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let plan = MCPlan3D::metropolis(100_000, 1.0, 11);
        let est = integrate_mc_3d(|r| ground_state_density(r) * v(r), ground_state_density, &plan).unwrap();
        assert!((est.value + 1.0).abs() < 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn mc_same_seed_is_bit_identical() {
        let g = |r: [f64; 3]| r[0] * r[0];
        let plan = MCPlan3D::metropolis(20_000, 1.0, 3);
        let a = integrate_mc_3d(g, ground_state_density, &plan).unwrap();
        let b = integrate_mc_3d(g, ground_state_density, &plan).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = integrate_mc_3d(g, ground_state_density, &MCPlan3D { seed: 4, ..plan }).unwrap();
        assert_ne!(a.value.to_bits(), c.value.to_bits());
    }
}
