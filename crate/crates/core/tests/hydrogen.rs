use nlse_core::perturbation::delta_e;
use nlse_core::{NonlinearityParams, QuantumState, RunConfig, ShiftResult};

fn shift(n: u32, l: u32, m: i32, a: f64) -> ShiftResult {
    let s = QuantumState::hydrogen(n, l, m, a).unwrap();
    let cfg = RunConfig::default().with_mc_samples(10_000).with_seed(42);
    delta_e(&s, &NonlinearityParams::three_d(1.0, 0.5), &cfg).unwrap()
}

fn slope(n: u32, l: u32, m: i32) -> f64 {
    let lo = shift(n, l, m, 100.0).delta_e_dimensionless;
    let hi = shift(n, l, m, 1000.0).delta_e_dimensionless;
    assert!(lo < 0.0 && hi < 0.0);
    (hi / lo).ln() / 10f64.ln()
}

// |psi|^2 ~ rho^2 on the z axis adds a log: dE ~ (L/a)^2 ln(a/L)
#[test]
fn line_node_state_scales_nearly_like_a_nodeless_one() {
    let k = slope(2, 1, 1);
    assert!(k > -2.0 && k < -1.8, "{k}");
}

#[test]
fn radial_node_state_scales_like_inverse_a() {
    let k = slope(3, 0, 0);
    assert!((k + 1.0).abs() < 0.1, "{k}");
}

#[test]
fn shift_is_even_in_m() {
    let up = shift(2, 1, 1, 100.0);
    let down = shift(2, 1, -1, 100.0);
    assert!((up.delta_e - down.delta_e).abs() <= 3.0 * up.err_estimate.hypot(down.err_estimate));
}
