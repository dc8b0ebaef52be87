//! Independent reference values shared by the integration tests.
#![allow(dead_code)]

use finpart::finite_part::{fpi_limit, FpiProblem};
use finpart::make_builtin;
use finpart::quadrature::{integrate_real, Tolerance};

const EULER: f64 = 0.577_215_664_901_532_9;

/// `E₁(x)`: power series below 1, Lentz continued fraction above.
pub fn e1_oracle(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 1.0 {
        // E₁(x) = −γ − ln x − Σ_{k≥1} (−x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        return -EULER - x.ln() - sum;
    }
    // E₁(x) = e^{-x} / (x + 1 − 1/(x + 3 − 4/(x + 5 − ...)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// `Γ(ν, ω) = ∫_ω^∞ t^{ν−1} e^{−t} dt` by quadrature in `t = ω + u/(1−u)`.
pub fn igamma_oracle(nu: f64, omega: f64) -> f64 {
    let (v, _) = integrate_real(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - u;
            let t = omega + u / w;
            let v = t.powf(nu - 1.0) * (-t).exp() / (w * w);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        Tolerance::new(0.0, 1e-14),
    )
    .unwrap();
    v
}

/// `FPI ∫₀^∞ e^{-x} x^{-s} dx` from finite upper limits `a ∈ {10, 20, 40}`.
/// The tail beyond `a` is `O(e^{-a})`: the spread from `a = 20` to `a = 40`
/// measures the `a = 20` tail, and the `a = 40` tail is `e^{-20}` smaller.
pub fn exp_fpi_at_infinity(n_or_m: usize, nu: f64) -> (f64, f64) {
    let at = |a: f64| {
        let p = FpiProblem::new(make_builtin("exp_neg").unwrap(), n_or_m, nu, a).unwrap();
        fpi_limit(&p).unwrap().value
    };
    let (v10, v20, v40) = (at(10.0), at(20.0), at(40.0));
    // the spreads must shrink like the tails do
    assert!((v40 - v20).abs() <= (v20 - v10).abs() * 1e-3 + 1e-15);
    (v40, (v40 - v20).abs() * (-20f64).exp() + 1e-15)
}
