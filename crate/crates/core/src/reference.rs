//! Closed-form targets: finite parts over `[0, ∞)` of `e^{-x}` against
//! negative powers, the resulting series for `E₁` and `Γ(ν, ω)`, and the
//! expansion at infinity of `∫₀^∞ (1+x)^{-ν}/(ω+x) dx`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::function_model::BranchSpec;
use crate::quadrature::{integrate_real, Tolerance};
use crate::special::{digamma, gamma};

pub use crate::special::gamma_digamma;

fn branch_nu(nu: f64) -> Result<f64> {
    let b = BranchSpec::new(nu)?;
    if b.is_pole() {
        return Err(Error::DegenerateBranch { nu });
    }
    Ok(b.nu())
}

fn factorial(j: usize) -> f64 {
    (1..=j).fold(1.0, |acc, k| acc * k as f64)
}

/// `FPI ∫₀^∞ e^{-x}/x^{j+1} dx = (−1)^j ψ(j+1)/j!`.
pub fn fpi_exp_pole_infinite(j: usize) -> f64 {
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * digamma(j as f64 + 1.0).expect("positive argument") / factorial(j)
}

/// `FPI ∫₀^∞ e^{-x}/x^{j+1+ν} dx = (−1)^{j+1} Γ(1−ν)Γ(ν)/Γ(j+ν+1)`.
pub fn fpi_exp_branch_infinite(j: usize, nu: f64) -> Result<f64> {
    let nu = branch_nu(nu)?;
    let sign = if j.is_multiple_of(2) { -1.0 } else { 1.0 };
    Ok(sign * PI / ((PI * nu).sin() * gamma(j as f64 + nu + 1.0)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    E1Origin,
    IgammaOrigin,
    InfinityCanonicalNaive,
    InfinityCanonicalCorrected,
}

/// `coeff · ω^power`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub power: f64,
    pub coeff: f64,
}

/// `value = offset + scale · Σ coeff·ω^power`, summed in stored order.
///
/// Origin series are stored with increasing powers, series at infinity with
/// decreasing powers, so both run from the leading term outward.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub kind: SeriesKind,
    pub omega: f64,
    pub offset: f64,
    pub scale: f64,
    pub terms: Vec<SeriesTerm>,
}

impl SeriesExpansion {
    pub fn value(&self) -> f64 {
        let sum: f64 = self
            .terms
            .iter()
            .map(|t| t.coeff * self.omega.powf(t.power))
            .sum();
        self.offset + self.scale * sum
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "omega must be positive and finite, got {omega}"
        )));
    }
    Ok(())
}

/// `E₁(ω) = −ln ω + e^{−ω} Σ_{j<N} ψ(j+1) ω^j / j!`.
pub fn e1_series(omega: f64, terms: usize) -> Result<SeriesExpansion> {
    check_omega(omega)?;
    let mut inv_fact = 1.0;
    let mut psi = digamma(1.0)?;
    let mut out = Vec::with_capacity(terms);
    for j in 0..terms {
        if j > 0 {
            inv_fact /= j as f64;
            psi += 1.0 / j as f64;
        }
        out.push(SeriesTerm {
            power: j as f64,
            coeff: psi * inv_fact,
        });
    }
    Ok(SeriesExpansion {
        kind: SeriesKind::E1Origin,
        omega,
        offset: -omega.ln(),
        scale: (-omega).exp(),
        terms: out,
    })
}

pub fn e1_expansion(omega: f64, terms: usize) -> Result<f64> {
    Ok(e1_series(omega, terms)?.value())
}

/// `Γ(ν, ω) = Γ(ν)[1 − e^{−ω} Σ_{j<N} ω^{j+ν}/Γ(j+ν+1)]`.
pub fn igamma_series(nu: f64, omega: f64, terms: usize) -> Result<SeriesExpansion> {
    let nu = branch_nu(nu)?;
    check_omega(omega)?;
    let g = gamma(nu)?;
    let mut inv = 1.0 / gamma(nu + 1.0)?;
    let mut out = Vec::with_capacity(terms);
    for j in 0..terms {
        if j > 0 {
            inv /= j as f64 + nu;
        }
        out.push(SeriesTerm {
            power: j as f64 + nu,
            coeff: inv,
        });
    }
    Ok(SeriesExpansion {
        kind: SeriesKind::IgammaOrigin,
        omega,
        offset: g,
        scale: -g * (-omega).exp(),
        terms: out,
    })
}

pub fn igamma_expansion(nu: f64, omega: f64, terms: usize) -> Result<f64> {
    Ok(igamma_series(nu, omega, terms)?.value())
}

/// Generalized binomial coefficients `C(−ν, s)`, `s < n`.
fn binomials_neg(nu: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 1.0;
    for s in 0..n {
        if s > 0 {
            c *= (-nu - s as f64 + 1.0) / s as f64;
        }
        out.push(c);
    }
    out
}

/// `Γ(s+1)Γ(1−ν)/Γ(s−ν+2)`, the coefficient of `−ω^{−s−1}` in the branch
/// contribution.
pub fn branch_series_coefficient(nu: f64, s: usize) -> Result<f64> {
    let nu = branch_nu(nu)?;
    // Γ(s+2−ν) = Γ(1−ν) Π_{k=0}^{s} (k+1−ν)
    let mut ratio = 1.0;
    for k in 0..=s {
        ratio *= (k + 1) as f64 / (k as f64 + 1.0 - nu);
    }
    Ok(ratio / (s + 1) as f64)
}

/// `3^s (s−1)! / (2·5⋯(3s−1))` for `s ≥ 1`: the branch coefficient of
/// `ω^{−s}` at `ν = 1/3`, with the odd product taken directly.
pub fn odd_product_coefficient(s: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".to_string()));
    }
    let mut value = 1.0;
    for k in 1..=s {
        value *= 3.0 / (3 * k - 1) as f64;
        if k < s {
            value *= k as f64;
        }
    }
    Ok(value)
}

/// Expansion of `∫₀^∞ (1+x)^{-ν}/(ω+x) dx` for large `ω` with `N` terms per
/// series. The naive variant keeps only the term-by-term series
/// `(π/sin πν) Σ (−1)^s C(−ν,s) ω^{−s−ν}`; the corrected one adds
/// `−Σ Γ(s+1)Γ(1−ν)/Γ(s−ν+2) ω^{−s−1}` from the branch cut on `[−1, 0]`.
pub fn canonical_infinity(
    nu: f64,
    omega: f64,
    terms: usize,
    corrected: bool,
) -> Result<(SeriesExpansion, f64)> {
    let nu = branch_nu(nu)?;
    if !(omega > 1.0) || !omega.is_finite() {
        return Err(Error::ExpansionInvalid(format!(
            "expansion at infinity needs omega > 1, got {omega}"
        )));
    }
    let csc = PI / (PI * nu).sin();
    let mut out = Vec::new();
    for (s, c) in binomials_neg(nu, terms).into_iter().enumerate() {
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        out.push(SeriesTerm {
            power: -(s as f64) - nu,
            coeff: csc * sign * c,
        });
        if corrected {
            out.push(SeriesTerm {
                power: -(s as f64) - 1.0,
                coeff: -branch_series_coefficient(nu, s)?,
            });
        }
    }
    let kind = if corrected {
        SeriesKind::InfinityCanonicalCorrected
    } else {
        SeriesKind::InfinityCanonicalNaive
    };
    let series = SeriesExpansion {
        kind,
        omega,
        offset: 0.0,
        scale: 1.0,
        terms: out,
    };
    let value = series.value();
    Ok((series, value))
}

/// The branch-cut contribution `−∫₀¹ (1−x)^{−ν}(ω−x)^{−1} dx`.
pub fn canonical_branch_integral(nu: f64, omega: f64, tol: f64) -> Result<f64> {
    let nu = branch_nu(nu)?;
    if !(omega > 1.0) || !omega.is_finite() {
        return Err(Error::ExpansionInvalid(format!(
            "pole at x = {omega} lies in [0, 1]"
        )));
    }
    // 1 − x = u^p removes the endpoint singularity: (1−x)^{−ν} dx = p du
    let p = 1.0 / (1.0 - nu);
    let (v, _) = integrate_real(
        |u| p / (omega - 1.0 + u.powf(p)),
        0.0,
        1.0,
        Tolerance::new(0.0, tol),
    )?;
    Ok(-v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn exp_finite_parts_at_infinity() {
        assert!((fpi_exp_pole_infinite(0) + EULER).abs() < 1e-14);
        assert!((fpi_exp_pole_infinite(1) + (1.0 - EULER)).abs() < 1e-14);
        assert!((fpi_exp_pole_infinite(3) + 0.209_352_944_738_633).abs() < 1e-14);
        assert!((fpi_exp_branch_infinite(0, 0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((fpi_exp_branch_infinite(1, 0.5).unwrap() - 4.0 * PI.sqrt() / 3.0).abs() < 1e-13);
        assert!((fpi_exp_branch_infinite(0, 0.25).unwrap() + 4.901_666_809_860_71).abs() < 1e-12);
        assert!(matches!(
            fpi_exp_branch_infinite(0, 0.0),
            Err(Error::DegenerateBranch { .. })
        ));
    }

    #[test]
    fn e1_and_igamma_examples() {
        assert!((e1_expansion(1.0, 30).unwrap() - 0.219_383_934_395_520).abs() < 1e-10);
        assert!((e1_expansion(0.1, 20).unwrap() - 1.822_923_958_419_391).abs() < 1e-10);
        assert!((e1_expansion(5.0, 60).unwrap() - 0.001_148_295_591_275).abs() < 1e-10);
        assert!((igamma_expansion(0.5, 1.0, 40).unwrap() - 0.278_805_585_280_662).abs() < 1e-12);
        assert!((igamma_expansion(0.5, 1e-8, 40).unwrap() - PI.sqrt()).abs() < 1e-3);
        assert!((igamma_expansion(0.25, 2.0, 50).unwrap() - 0.062_672_335_871_505_4).abs() < 1e-12);
    }

    #[test]
    fn series_term_order() {
        let s = e1_series(0.5, 5).unwrap();
        assert!(s.terms.windows(2).all(|w| w[0].power < w[1].power));
        let (c, _) = canonical_infinity(1.0 / 3.0, 10.0, 6, true).unwrap();
        let mut powers: Vec<f64> = c.terms.iter().map(|t| t.power).collect();
        powers.sort_by(f64::total_cmp);
        powers.dedup();
        assert_eq!(powers.len(), 12);
    }

    #[test]
    fn canonical_examples() {
        let nu = 1.0 / 3.0;
        let (_, corrected) = canonical_infinity(nu, 10.0, 12, true).unwrap();
        let (_, naive) = canonical_infinity(nu, 10.0, 12, false).unwrap();
        assert!((corrected - 1.584_232_149_018_502).abs() < 1e-10);
        assert!((naive - 1.743_967_569_126_970).abs() < 1e-10);
        let branch = canonical_branch_integral(nu, 10.0, 1e-13).unwrap();
        assert!((branch + 0.159_735_420_097_550).abs() < 1e-12);
        assert!(matches!(
            canonical_infinity(nu, 1.0, 5, true),
            Err(Error::ExpansionInvalid(_))
        ));
        assert!(canonical_branch_integral(nu, 0.5, 1e-10).is_err());
    }

    #[test]
    fn branch_integral_matches_its_series() {
        let series: f64 = (0..40)
            .map(|s| -branch_series_coefficient(0.5, s).unwrap() * 2f64.powi(-(s as i32) - 1))
            .sum();
        let quad = canonical_branch_integral(0.5, 2.0, 1e-13).unwrap();
        assert!((series - quad).abs() < 1e-8, "{series} vs {quad}");
    }

    #[test]
    fn odd_product_matches_gamma_ratio() {
        for s in 1..=10 {
            let direct = odd_product_coefficient(s).unwrap();
            let ratio = branch_series_coefficient(1.0 / 3.0, s - 1).unwrap();
            assert!((direct - ratio).abs() < 1e-12 * ratio, "s = {s}");
        }
    }
}
