mod common;

use std::f64::consts::PI;

use common::{e1_oracle, exp_fpi_at_infinity, igamma_oracle};
use finpart::reference::*;
use finpart::stieltjes::{stieltjes_direct, StieltjesProblem};
use finpart::AnalyticFunction;
use proptest::prelude::*;
use statrs::function::gamma as sg;

#[test]
fn e1_oracle_is_continuous_at_the_switch() {
    let below = e1_oracle(1.0);
    let above = e1_oracle(1.0 + 1e-12);
    assert!((below - above).abs() < 1e-11);
    assert!((below - 0.219_383_934_395_520_3).abs() < 1e-15);
}

#[test]
fn reflection_formula() {
    let (g1, _) = gamma_digamma(0.3).unwrap();
    let (g2, _) = gamma_digamma(0.7).unwrap();
    assert!((g1 * g2 * (PI * 0.3).sin() - PI).abs() < 1e-12);
}

#[test]
fn e1_series_matches_oracle() {
    for omega in [0.1, 0.5, 1.0, 2.0, 5.0, 8.0] {
        let series = e1_expansion(omega, 80).unwrap();
        let exact = e1_oracle(omega);
        assert!(
            (series - exact).abs() < 1e-10 * exact.max(1.0),
            "omega = {omega}"
        );
    }
}

#[test]
fn igamma_series_matches_two_oracles() {
    for nu in [0.1, 0.25, 0.5, 0.75, 0.9] {
        for omega in [0.01, 0.5, 1.0, 2.0, 6.0] {
            let series = igamma_expansion(nu, omega, 80).unwrap();
            let quad = igamma_oracle(nu, omega);
            let lib = sg::gamma_ur(nu, omega) * sg::gamma(nu);
            assert!(
                (series - quad).abs() < 1e-10,
                "{nu} {omega}: {series} vs {quad}"
            );
            assert!(
                (series - lib).abs() < 1e-9,
                "{nu} {omega}: {series} vs {lib}"
            );
        }
    }
}

#[test]
fn closed_forms_at_infinity_match_large_a_limits() {
    for j in 0..=4 {
        let (v, err) = exp_fpi_at_infinity(j, 0.0);
        assert!(err < 1e-12);
        assert!((v - fpi_exp_pole_infinite(j)).abs() < 1e-10, "j = {j}");
        for nu in [0.25, 0.5, 0.75] {
            let (v, _) = exp_fpi_at_infinity(j + 1, nu);
            let exact = fpi_exp_branch_infinite(j, nu).unwrap();
            assert!(
                (v - exact).abs() < 1e-10 * (1.0 + exact.abs()),
                "j = {j}, nu = {nu}"
            );
        }
    }
}

/// `FPI ∫₀^∞ x^{-s-ν}/(ω+x) dx = (−1)^s π/(ω^{s+ν} sin πν)`: finite part on
/// `[0, 1]` plus the convergent tail.
#[test]
fn stieltjes_kernel_finite_part_at_infinity() {
    use finpart::finite_part::{fpi_limit, FpiProblem};
    use finpart::make_builtin;
    use finpart::quadrature::{integrate_real, Tolerance};

    for omega in [0.5f64, 2.0] {
        for nu in [0.3, 0.5] {
            let kernel = make_builtin(&format!("geom({omega})")).unwrap();
            for s in 0..=5usize {
                let exact =
                    (-1f64).powi(s as i32) * PI / (omega.powf(s as f64 + nu) * (PI * nu).sin());
                let value = if s == 0 {
                    let p = StieltjesProblem::new(
                        make_builtin("one").unwrap(),
                        nu,
                        omega,
                        f64::INFINITY,
                    )
                    .unwrap();
                    stieltjes_direct(&p, 1e-13).unwrap()
                } else {
                    let head = fpi_limit(&FpiProblem::branch(kernel.clone(), s, nu, 1.0).unwrap())
                        .unwrap()
                        .value
                        / omega;
                    // x = 1/t on the tail
                    let (tail, _) = integrate_real(
                        |t| t.powf(s as f64 + nu - 1.0) / (omega * t + 1.0),
                        0.0,
                        1.0,
                        Tolerance::new(0.0, 1e-14),
                    )
                    .unwrap();
                    head + tail
                };
                assert!(
                    (value - exact).abs() < 1e-10 * (1.0 + exact.abs()),
                    "{omega} {nu} {s}: {value} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn canonical_expansion_is_asymptotic() {
    let nu = 1.0 / 3.0;
    let mut last = f64::INFINITY;
    for omega in [5.0, 10.0, 20.0, 40.0, 80.0] {
        let p = StieltjesProblem::new(
            AnalyticFunction::shifted_power(nu),
            0.0,
            omega,
            f64::INFINITY,
        )
        .unwrap();
        let direct = stieltjes_direct(&p, 1e-14).unwrap();
        let (_, corrected) = canonical_infinity(nu, omega, 6, true).unwrap();
        let err = (corrected - direct).abs();
        assert!(err < last, "omega = {omega}");
        last = err;
    }

    let p = StieltjesProblem::new(
        AnalyticFunction::shifted_power(nu),
        0.0,
        10.0,
        f64::INFINITY,
    )
    .unwrap();
    let direct = stieltjes_direct(&p, 1e-14).unwrap();
    let branch = canonical_branch_integral(nu, 10.0, 1e-14).unwrap();
    for n in [8, 16, 32] {
        let (_, naive) = canonical_infinity(nu, 10.0, n, false).unwrap();
        assert!(
            ((naive - direct).abs() - branch.abs()).abs() < 1e-6,
            "N = {n}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_and_digamma_match_statrs(x in 0.1f64..30.0) {
        let (g, psi) = gamma_digamma(x).unwrap();
        prop_assert!((g - sg::gamma(x)).abs() <= 1e-12 * g.abs());
        prop_assert!((psi - sg::digamma(x)).abs() <= 1e-12 * psi.abs().max(1.0));
    }

    #[test]
    fn gamma_reflection(x in 0.01f64..0.99) {
        let (g1, _) = gamma_digamma(x).unwrap();
        let (g2, _) = gamma_digamma(1.0 - x).unwrap();
        prop_assert!((g1 * g2 * (PI * x).sin() - PI).abs() < 1e-12);
    }

    #[test]
    fn branch_coefficients_match_gamma_ratio(nu in 0.05f64..0.95, s in 0usize..30) {
        let (a, _) = gamma_digamma(s as f64 + 1.0).unwrap();
        let (b, _) = gamma_digamma(1.0 - nu).unwrap();
        let (c, _) = gamma_digamma(s as f64 + 2.0 - nu).unwrap();
        let direct = branch_series_coefficient(nu, s).unwrap();
        prop_assert!((direct - a * b / c).abs() <= 1e-12 * direct);
    }
}
