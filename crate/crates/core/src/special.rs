//! Gamma and digamma on the real line.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn check_pole(x: f64) -> Result<()> {
    if x <= 0.0 && x == x.round() {
        return Err(Error::GammaPole { x });
    }
    Ok(())
}

/// `Γ(x)`; errors at `x = 0, −1, −2, …`.
pub fn gamma(x: f64) -> Result<f64> {
    check_pole(x)?;
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x == x.round() && x <= 171.0 {
        return (1..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // split the power so Γ(x) stays finite up to x ≈ 171
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * sum
}

/// `ψ(x) = Γ'(x)/Γ(x)`; errors at `x = 0, −1, −2, …`.
pub fn digamma(x: f64) -> Result<f64> {
    check_pole(x)?;
    Ok(digamma_unchecked(x))
}

fn digamma_unchecked(mut x: f64) -> f64 {
    if x < 0.5 {
        return digamma_unchecked(1.0 - x) - PI / (PI * x).tan();
    }
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli terms B_{2k}/(2k x^{2k})
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    acc + x.ln() - 0.5 / x - series
}

/// `(Γ(x), ψ(x))` together.
pub fn gamma_digamma(x: f64) -> Result<(f64, f64)> {
    check_pole(x)?;
    Ok((gamma_unchecked(x), digamma_unchecked(x)))
}
