use nlse_core::fitting::power_law_fit;
use nlse_core::nonlinearity::{bracket, bracket_from_changes, q_nl_1d, FnDensity1D};
use nlse_core::perturbation::delta_e;
use nlse_core::quadrature::{integrate_1d, IntegrationPlan1D};
use nlse_core::wavefunctions::{DensityJet, ShiftedChanges};
use nlse_core::{NonlinearityParams, QuantumState, RunConfig, Units};
use proptest::prelude::*;

fn gaussian(scale: f64, width: f64) -> FnDensity1D<impl Fn(f64) -> DensityJet> {
    FnDensity1D(move |x: f64| {
        let z = x / width;
        let p = scale * (-z * z).exp();
        let d1 = -2.0 * z * p / width;
        let d2 = (4.0 * z * z - 2.0) * p / width.powi(2);
        DensityJet { p, d1, d2, d3: 0.0, d4: 0.0 }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_nl_ignores_normalization(lambda in 1e-6f64..1e6, x in -3.0f64..3.0, length in 0.01f64..1.0, eta in 0.05f64..0.95) {
        let params = NonlinearityParams::new(length, eta);
        let units = Units::default();
        let base = q_nl_1d(&gaussian(1.0, 1.3), x, &params, &units).unwrap();
        let scaled = q_nl_1d(&gaussian(lambda, 1.3), x, &params, &units).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-9 * base.abs() + 1e-12);
    }

    #[test]
    fn rearranged_bracket_matches_direct(eta in 0.05f64..0.95, rp in -0.4f64..0.4, rm in -0.4f64..0.4) {
        let v = -rm / (1.0 + rm);
        let direct = bracket(eta, rp, v);
        let c = ShiftedChanges { plus: rp, minus: rm, sum: rp + rm };
        let rearranged = bracket_from_changes(eta, &c);
        prop_assert!((direct - rearranged).abs() <= 1e-13);
    }

    #[test]
    fn fit_ignores_order_and_scale(k in -3.0f64..3.0, c in 0.01f64..100.0, sx in 0.1f64..10.0, sy in 0.1f64..10.0, seed in 0u64..1000) {
        let mut pts: Vec<(f64, f64)> = (1..=7)
            .map(|i| {
                let x = i as f64;
                let wobble = 1.0 + 0.01 * ((i as u64 * 7 + seed) % 5) as f64;
                (x, -c * x.powf(k) * wobble)
            })
            .collect();
        let f = power_law_fit(&pts).unwrap();
        pts.reverse();
        pts.swap(1, 4);
        let g = power_law_fit(&pts).unwrap();
        prop_assert!((f.exponent - g.exponent).abs() < 1e-10);
        let scaled: Vec<_> = pts.iter().map(|&(x, y)| (sx * x, sy * y)).collect();
        let h = power_law_fit(&scaled).unwrap();
        prop_assert!((f.exponent - h.exponent).abs() < 1e-10);
        prop_assert!((h.coefficient / f.coefficient - sy / sx.powf(f.exponent)).abs() < 1e-8 * h.coefficient / f.coefficient);
        prop_assert_eq!(h.sign, -1.0);
    }

    #[test]
    fn quadrature_is_exact_on_low_degree_polynomials(coeffs in prop::collection::vec(-5.0f64..5.0, 16), lo in -2.0f64..0.0, width in 0.1f64..3.0) {
        let hi = lo + width;
        let f = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let exact: f64 = coeffs.iter().enumerate().map(|(k, &c)| c * (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k as f64 + 1.0)).sum();
        let got = integrate_1d(f, &IntegrationPlan1D::new(lo, hi)).unwrap();
        let scale: f64 = coeffs.iter().map(|c| c.abs()).sum::<f64>() * 3f64.powi(15) * width;
        prop_assert!((got.value - exact).abs() <= 1e-14 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shift_is_even_in_length(n in 1u32..12, log_a in 2.0f64..3.5, eta in 0.1f64..0.9, well in any::<bool>()) {
        let a = 10f64.powf(log_a);
        let s = if well { QuantumState::well(n, a) } else { QuantumState::oscillator(n - 1, a) }.unwrap();
        let cfg = RunConfig::default();
        let plus = delta_e(&s, &NonlinearityParams::new(1.0, eta), &cfg).unwrap();
        let minus = delta_e(&s, &NonlinearityParams::new(-1.0, eta), &cfg).unwrap();
        prop_assert!((plus.delta_e - minus.delta_e).abs() <= 2.0 * plus.err_estimate.max(minus.err_estimate));
    }
}

#[test]
fn node_states_change_sign_with_regulator() {
    let cfg = RunConfig::default();
    for n in 1..=10 {
        for s in [QuantumState::well(n, 1000.0).unwrap(), QuantumState::oscillator(n, 1000.0).unwrap()] {
            let small = delta_e(&s, &NonlinearityParams::new(1.0, 0.1), &cfg).unwrap().delta_e;
            let large = delta_e(&s, &NonlinearityParams::new(1.0, 0.5), &cfg).unwrap().delta_e;
            assert!(small > 0.0 && large < 0.0, "{:?}: {small} {large}", s.kind);
        }
    }
}

fn sho_slope(n: u32) -> f64 {
    let cfg = RunConfig::default();
    let pts: Vec<_> = [100.0, 200.0, 400.0, 700.0, 1000.0]
        .iter()
        .map(|&a| {
            let s = QuantumState::oscillator(n, a).unwrap();
            (a, delta_e(&s, &NonlinearityParams::new(1.0, 0.5), &cfg).unwrap().delta_e_dimensionless)
        })
        .collect();
    power_law_fit(&pts).unwrap().exponent
}

#[test]
fn nodeless_and_node_states_scale_differently() {
    assert!((sho_slope(0) + 2.0).abs() < 0.05);
    for n in 1..=5 {
        let k = sho_slope(n);
        assert!((k + 1.0).abs() < 0.03, "n = {n}: {k}");
    }
}

#[test]
fn nodeless_shift_is_quadratic_in_length() {
    let cfg = RunConfig::default();
    let s = QuantumState::oscillator(0, 1.0).unwrap();
    let pts: Vec<_> = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
        .iter()
        .map(|&l| (l, delta_e(&s, &NonlinearityParams::new(l, 0.5), &cfg).unwrap().delta_e))
        .collect();
    let f = power_law_fit(&pts).unwrap();
    assert!((f.exponent - 2.0).abs() < 0.05, "{}", f.exponent);
}
