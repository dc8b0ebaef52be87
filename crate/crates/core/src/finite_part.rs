//! Hadamard finite part of `∫₀^a f(x) x^{-(m+ν)} dx` for `f` analytic near
//! `[0, a]`.
//!
//! Two independent routes are provided:
//!
//! * the **limit** route evaluates `lim_{ε→0} [∫_ε^a f x^{-s} dx − D_ε]`
//!   exactly: on `[0, δ]` the Taylor series of `f` is integrated term by term
//!   with the divergent primitives dropped, and `[δ, a]` is an ordinary
//!   integral done by adaptive quadrature;
//! * the **contour** route integrates `f(z)(log z − iπ) z^{-n-1} / 2πi`
//!   (pole case) or `f(z) z^{-m-ν} / (e^{-2πiν} − 1)` (branch case) along a
//!   path that straddles the cut and starts and ends at `a`.
//!
//! Both report the same symbolic list of discarded divergences.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::contour::{integrate_contour, Contour, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::function_model::{AnalyticFunction, BranchSpec, CutPoint};
use crate::quadrature::{integrate_real, Tolerance};

/// Upper limit for the Taylor-integrated segment `[0, δ]` of entire
/// integrands; beyond it the series loses digits to cancellation.
const SPLIT_CAP: f64 = 8.0;
const MAX_SERIES_TERMS: usize = 8000;
const MAX_FALLBACK_TERMS: usize = 64;
/// Imaginary residue tolerated in a contour result, relative to `1 + |value|`.
const IMAG_TOL: f64 = 1e-9;

/// `∫₀^a f(x) / x^{n+1} dx` (pole, `ν = 0`) or `∫₀^a f(x) / x^{m+ν} dx`
/// (branch, `0 < ν < 1`).
#[derive(Debug, Clone)]
pub struct FpiProblem {
    pub f: AnalyticFunction,
    pub a: f64,
    /// `n` in the pole case, `m ≥ 1` in the branch case.
    pub n_or_m: usize,
    pub branch: BranchSpec,
}

impl FpiProblem {
    /// Builds a problem; `ν` within `1e-8` of zero selects the pole case.
    pub fn new(f: AnalyticFunction, n_or_m: usize, nu: f64, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "upper limit must be positive and finite, got {a}"
            )));
        }
        let branch = BranchSpec::new(nu)?;
        if !branch.is_pole() && n_or_m == 0 {
            return Err(Error::InvalidParameter(
                "branch case needs m >= 1".to_string(),
            ));
        }
        Ok(Self {
            f,
            a,
            n_or_m,
            branch,
        })
    }

    pub fn pole(f: AnalyticFunction, n: usize, a: f64) -> Result<Self> {
        Self::new(f, n, 0.0, a)
    }

    pub fn branch(f: AnalyticFunction, m: usize, nu: f64, a: f64) -> Result<Self> {
        let p = Self::new(f, m, nu, a)?;
        if p.branch.is_pole() {
            return Err(Error::DegenerateBranch { nu });
        }
        Ok(p)
    }

    /// Exponent `s` of `x^{-s}`.
    pub fn exponent(&self) -> f64 {
        if self.branch.is_pole() {
            self.n_or_m as f64 + 1.0
        } else {
            self.n_or_m as f64 + self.branch.nu()
        }
    }

    /// Number of Taylor terms whose primitives diverge at the origin.
    fn divergent_terms(&self) -> usize {
        if self.branch.is_pole() {
            self.n_or_m + 1
        } else {
            self.n_or_m
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    /// `ε^{-p}`
    InversePower(f64),
    /// `ln ε`
    Log,
}

/// One discarded term `coefficient · ε^{-p}` or `coefficient · ln ε` of `D_ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroppedTerm {
    pub divergence: Divergence,
    pub coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Limit,
    Contour,
    ClosedForm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Limit => "limit",
            Method::Contour => "contour",
            Method::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpiResult {
    pub value: f64,
    pub dropped_divergences: Vec<DroppedTerm>,
    pub method: Method,
    pub error_estimate: f64,
    pub warnings: Vec<String>,
}

/// The divergent part `D_ε` of `∫_ε^a f x^{-s} dx`, coefficients only.
pub fn dropped_divergences(p: &FpiProblem) -> Vec<DroppedTerm> {
    let s = p.exponent();
    let coeffs: Vec<f64> = (0..p.divergent_terms()).map(|k| p.f.taylor(k)).collect();
    let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    // numerically recovered coefficients are never exactly zero
    let negligible = if p.f.has_exact_taylor() {
        0.0
    } else {
        1e-12 * scale
    };

    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > negligible)
        .map(|(k, &c)| {
            let power = s - k as f64 - 1.0;
            if power == 0.0 {
                DroppedTerm {
                    divergence: Divergence::Log,
                    coefficient: -c,
                }
            } else {
                DroppedTerm {
                    divergence: Divergence::InversePower(power),
                    coefficient: c / power,
                }
            }
        })
        .collect()
}

/// Default split point `δ` between the Taylor-integrated and the quadrature
/// segments of the limit route.
pub fn default_split(f: &AnalyticFunction, a: f64) -> f64 {
    if f.has_exact_taylor() {
        a.min(SPLIT_CAP).min(0.9 * f.zeta0())
    } else {
        a.min(0.5 * f.fallback_radius())
    }
}

/// Finite part of `∫₀^δ f(x) x^{-s} dx` from the Taylor series of `f`:
/// `Σ_{k} c_k δ^{k-s+1}/(k-s+1)`, with `c_k ln δ` where `k - s + 1 = 0`.
/// Returns the value and an error estimate.
fn taylor_finite_part(f: &AnalyticFunction, s: f64, delta: f64) -> (f64, f64) {
    let max_terms = if f.has_exact_taylor() {
        MAX_SERIES_TERMS
    } else {
        MAX_FALLBACK_TERMS
    };
    let first_convergent = s.floor() as usize + 1;
    let ln_delta = delta.ln();

    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut quiet = 0;
    let mut last = 0.0f64;
    for k in 0..max_terms {
        let c = f.taylor(k);
        let q = k as f64 - s + 1.0;
        let term = if c == 0.0 {
            0.0
        } else if q == 0.0 {
            c * ln_delta
        } else {
            c * ((q * ln_delta).exp() / q)
        };
        sum += term;
        abs_sum += term.abs();
        last = term.abs();
        if k >= first_convergent {
            if term.abs() <= 1e-17 * abs_sum {
                quiet += 1;
                if quiet >= 8 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    let truncation = if quiet >= 8 { 0.0 } else { 10.0 * last };
    (sum, 4.0 * f64::EPSILON * abs_sum + truncation)
}

/// Limit route with an explicit split point `δ ∈ (0, a]`.
pub fn fpi_limit_with_split(p: &FpiProblem, delta: f64) -> Result<FpiResult> {
    if !(delta > 0.0 && delta <= p.a) {
        return Err(Error::InvalidParameter(format!(
            "split point {delta} outside (0, {}]",
            p.a
        )));
    }
    let s = p.exponent();
    let (series, series_err) = taylor_finite_part(&p.f, s, delta);

    let (tail, tail_err) = if delta < p.a {
        let f = &p.f;
        integrate_real(
            |x| f.eval_real(x) * x.powf(-s),
            delta,
            p.a,
            Tolerance::new(1e-15, 1e-13),
        )?
    } else {
        (0.0, 0.0)
    };

    Ok(FpiResult {
        value: series + tail,
        dropped_divergences: dropped_divergences(p),
        method: Method::Limit,
        error_estimate: series_err + tail_err,
        warnings: p.f.warnings().to_vec(),
    })
}

/// Limit route, dispatching on the pole/branch case.
pub fn fpi_limit(p: &FpiProblem) -> Result<FpiResult> {
    fpi_limit_with_split(p, default_split(&p.f, p.a))
}

/// `FPI ∫₀^a f(x)/x^{n+1} dx = −Σ_{k<n} c_k/((n−k)a^{n−k}) + c_n ln a + ∫₀^a R_{n+1}(x)/x^{n+1} dx`.
pub fn fpi_limit_pole(p: &FpiProblem) -> Result<FpiResult> {
    if !p.branch.is_pole() {
        return Err(Error::InvalidParameter(
            "pole route needs nu = 0".to_string(),
        ));
    }
    fpi_limit(p)
}

/// `FPI ∫₀^a f(x)/x^{m+ν} dx = −Σ_{j<m} c_j/((m+ν−j−1)a^{m+ν−j−1}) + ∫₀^a (f − Σ_{j<m} c_j x^j)/x^{m+ν} dx`.
pub fn fpi_limit_branch(p: &FpiProblem) -> Result<FpiResult> {
    if p.branch.is_pole() {
        return Err(Error::DegenerateBranch { nu: p.branch.nu() });
    }
    fpi_limit(p)
}

/// Circle through `a` when it stays clear of the poles of `f`, otherwise a
/// keyhole whose circle has radius `min(a, ζ₀)/2`.
pub fn default_contour(f: &AnalyticFunction, a: f64) -> Contour {
    let circle = Contour::Circle { radius: a };
    if circle.check_clear_of(f).is_ok() {
        circle
    } else {
        Contour::Keyhole {
            rho: 0.5 * a.min(f.zeta0()),
            a,
        }
    }
}

fn check_contour(p: &FpiProblem, c: &Contour) -> Result<()> {
    if (c.start() - p.a).abs() > 1e-12 * p.a {
        return Err(Error::InvalidContour(format!(
            "{c} does not start at the upper limit a = {}",
            p.a
        )));
    }
    c.check_clear_of(&p.f)
}

fn real_part(value: Complex64, err: f64) -> Result<(f64, f64)> {
    if value.im.abs() > IMAG_TOL * (1.0 + value.re.abs()) + err {
        return Err(Error::NonRealResult {
            real: value.re,
            imag: value.im,
        });
    }
    Ok((value.re, err))
}

/// Contour route with an explicit contour and tolerance.
pub fn fpi_contour_with(p: &FpiProblem, c: &Contour, tol: f64) -> Result<FpiResult> {
    check_contour(p, c)?;
    let f = &p.f;
    let (value, err) = if p.branch.is_pole() {
        let order = -(p.n_or_m as f64 + 1.0);
        let shift = Complex64::new(0.0, PI);
        let r = integrate_contour(
            |pt: CutPoint| f.eval(pt.z) * (pt.log() - shift) * pt.powf(order),
            c,
            tol,
        )?;
        let scale = Complex64::new(0.0, TAU);
        real_part(r.value / scale, r.abs_error_estimate / TAU)?
    } else {
        let order = -p.exponent();
        let r = integrate_contour(|pt: CutPoint| f.eval(pt.z) * pt.powf(order), c, tol)?;
        let denom = p.branch.monodromy() - 1.0;
        real_part(r.value / denom, r.abs_error_estimate / denom.norm())?
    };
    Ok(FpiResult {
        value,
        dropped_divergences: dropped_divergences(p),
        method: Method::Contour,
        error_estimate: err,
        warnings: p.f.warnings().to_vec(),
    })
}

/// Contour route on [`default_contour`] at the default tolerance.
pub fn fpi_contour(p: &FpiProblem) -> Result<FpiResult> {
    fpi_contour_with(p, &default_contour(&p.f, p.a), DEFAULT_TOL)
}

/// `(1/2πi) ∫_C f(z)(log z − iπ)/z^{n+1} dz`.
pub fn fpi_contour_pole(p: &FpiProblem, c: &Contour) -> Result<FpiResult> {
    if !p.branch.is_pole() {
        return Err(Error::InvalidParameter(
            "pole route needs nu = 0".to_string(),
        ));
    }
    fpi_contour_with(p, c, DEFAULT_TOL)
}

/// `(e^{-2πνi} − 1)^{-1} ∫_C f(z)/z^{m+ν} dz`.
pub fn fpi_contour_branch(p: &FpiProblem, c: &Contour) -> Result<FpiResult> {
    if p.branch.is_pole() {
        return Err(Error::DegenerateBranch { nu: p.branch.nu() });
    }
    fpi_contour_with(p, c, DEFAULT_TOL)
}

/// `FPI ∫₀^a x^{-(n+ν)} dx = −1/((n+ν−1) a^{n+ν−1})`, or `ln a` when
/// `n + ν = 1`. Here `n` counts the full integer part of the exponent.
pub fn fpi_monomial_closed(n: usize, nu: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "upper limit must be positive and finite, got {a}"
        )));
    }
    let branch = BranchSpec::new(nu)?;
    let nu = branch.nu();
    match (n, branch.is_pole()) {
        (0, true) => Err(Error::NotDivergent),
        (1, true) => Ok(a.ln()),
        _ => {
            let q = n as f64 + nu - 1.0;
            Ok(-1.0 / (q * a.powf(q)))
        }
    }
}

/// Raw `C_ε = ∫_ε^a f x^{-s} dx − D_ε` on the grid `ε = a·2^{-k}`,
/// `k = 4..=20`, with a Richardson extrapolation to `ε → 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonAudit {
    pub samples: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub error_estimate: f64,
}

const RICHARDSON_LEVELS: usize = 6;

/// Eliminates `h^{first}, h^{first+1}, ...` from samples at `h, h/2, h/4, ...`;
/// returns the top entry and its change from the level below.
fn richardson(values: &[f64], first: f64) -> (f64, f64) {
    let mut row = values.to_vec();
    let mut previous = *row.last().unwrap();
    let mut change = f64::INFINITY;
    for j in 0..values.len() - 1 {
        let factor = (first + j as f64).exp2() - 1.0;
        row = row
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]) / factor)
            .collect();
        let top = *row.last().unwrap();
        change = (top - previous).abs();
        previous = top;
    }
    (previous, change)
}

pub fn fpi_epsilon_audit(p: &FpiProblem) -> Result<EpsilonAudit> {
    let s = p.exponent();
    let dropped = dropped_divergences(p);
    let f = &p.f;
    let ln_a = p.a.ln();

    let mut samples = Vec::new();
    // size of the cancelling pair ∫_ε^a and D_ε: the rounding floor of C_ε
    let mut noise = Vec::new();
    for k in 4..=20 {
        let eps = p.a * (-(k as f64)).exp2();
        // x = e^u flattens the x^{-s} growth toward ε
        let (raw, _) = integrate_real(
            |u| {
                let x = u.exp();
                f.eval_real(x) * ((1.0 - s) * u).exp()
            },
            eps.ln(),
            ln_a,
            Tolerance::new(0.0, 1e-14),
        )?;
        let divergent: f64 = dropped
            .iter()
            .map(|d| match d.divergence {
                Divergence::InversePower(q) => d.coefficient * eps.powf(-q),
                Divergence::Log => d.coefficient * eps.ln(),
            })
            .sum();
        samples.push((eps, raw - divergent));
        noise.push(1e-14 * raw.abs().max(divergent.abs()));
    }

    // C_ε − FPI expands in ε^{1−ν}, ε^{2−ν}, ...; small ε loses digits to
    // the cancellation against D_ε, so take the best-conditioned window
    let first = 1.0 - p.branch.nu();
    let values: Vec<f64> = samples.iter().map(|&(_, c)| c).collect();
    let (extrapolated, error_estimate) = (3..=RICHARDSON_LEVELS + 1)
        .flat_map(|len| (0..=values.len() - len).map(move |start| (start, len)))
        .map(|(start, len)| {
            let (v, change) = richardson(&values[start..start + len], first);
            // each level can double the rounding error
            let floor = noise[start + len - 1] * (len as f64).exp2();
            (v, change + floor)
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("grid longer than the window");
    Ok(EpsilonAudit {
        samples,
        extrapolated,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_model::make_builtin;

    fn f(name: &str) -> AnalyticFunction {
        make_builtin(name).unwrap()
    }

    #[test]
    fn limit_pole_examples() {
        let r = fpi_limit_pole(&FpiProblem::pole(f("one"), 0, 2.0).unwrap()).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-14);
        assert_eq!(
            r.dropped_divergences,
            vec![DroppedTerm {
                divergence: Divergence::Log,
                coefficient: -1.0
            }]
        );
        let r = fpi_limit_pole(&FpiProblem::pole(f("poly(0,1)"), 0, 1.0).unwrap()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        assert!(r.dropped_divergences.is_empty());
    }

    #[test]
    fn limit_branch_examples() {
        let r = fpi_limit_branch(&FpiProblem::branch(f("one"), 1, 0.5, 1.0).unwrap()).unwrap();
        assert!((r.value + 2.0).abs() < 1e-14);
        let r = fpi_limit_branch(&FpiProblem::branch(f("one"), 2, 0.5, 2.0).unwrap()).unwrap();
        assert!((r.value + 1.0 / (1.5 * 2f64.powf(1.5))).abs() < 1e-14);
        let r =
            fpi_limit_branch(&FpiProblem::branch(f("poly(0,1)"), 1, 0.5, 1.0).unwrap()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
        assert!(r
            .dropped_divergences
            .iter()
            .all(|d| matches!(d.divergence, Divergence::InversePower(_))));
    }

    #[test]
    fn dropped_terms_pole_case() {
        // exp(-x)/x^3: D_ε = 1/(2ε²) − 1/ε − (1/2) ln ε
        let p = FpiProblem::pole(f("exp_neg"), 2, 1.0).unwrap();
        let d = dropped_divergences(&p);
        assert_eq!(d.len(), 3);
        assert_eq!(d[0].divergence, Divergence::InversePower(2.0));
        assert!((d[0].coefficient - 0.5).abs() < 1e-16);
        assert_eq!(d[1].divergence, Divergence::InversePower(1.0));
        assert!((d[1].coefficient + 1.0).abs() < 1e-16);
        assert_eq!(d[2].divergence, Divergence::Log);
        assert!((d[2].coefficient + 0.5).abs() < 1e-16);
    }

    #[test]
    fn contour_examples() {
        let p = FpiProblem::pole(f("one"), 0, 2.0).unwrap();
        let r = fpi_contour_pole(&p, &Contour::Circle { radius: 2.0 }).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-9);

        let p = FpiProblem::pole(f("exp_neg"), 2, 1.0).unwrap();
        let c = fpi_contour_pole(&p, &Contour::Circle { radius: 1.0 }).unwrap();
        let l = fpi_limit_pole(&p).unwrap();
        assert!(
            (c.value - l.value).abs() < 1e-9,
            "{} vs {}",
            c.value,
            l.value
        );

        let p = FpiProblem::pole(f("poly(0,1)"), 1, 2.0).unwrap();
        assert!((fpi_contour(&p).unwrap().value - 2f64.ln()).abs() < 1e-9);

        let p = FpiProblem::branch(f("one"), 1, 0.3, 1.0).unwrap();
        let r = fpi_contour_branch(&p, &Contour::Circle { radius: 1.0 }).unwrap();
        assert!((r.value + 1.0 / 0.3).abs() < 1e-9);

        let p = FpiProblem::branch(f("exp_neg"), 1, 0.5, 5.0).unwrap();
        let c = fpi_contour(&p).unwrap();
        let l = fpi_limit_branch(&p).unwrap();
        assert!(
            (c.value - l.value).abs() < 1e-9,
            "{} vs {}",
            c.value,
            l.value
        );

        let p = FpiProblem::branch(f("one"), 1, 0.5, 1.0).unwrap();
        let r = fpi_contour_branch(&p, &Contour::Rectangle { a: 1.0, h: 0.7 }).unwrap();
        assert!((r.value + 2.0).abs() < 1e-9);
    }

    #[test]
    fn contour_must_start_at_a_and_avoid_poles() {
        let p = FpiProblem::pole(f("one"), 0, 2.0).unwrap();
        assert!(matches!(
            fpi_contour_pole(&p, &Contour::Circle { radius: 1.0 }),
            Err(Error::InvalidContour(_))
        ));
        let p = FpiProblem::pole(f("geom(2)"), 1, 2.0).unwrap();
        assert!(matches!(
            fpi_contour_pole(&p, &Contour::Circle { radius: 2.0 }),
            Err(Error::PoleOnContour { .. })
        ));
        let p = FpiProblem::pole(f("geom(1)"), 1, 2.0).unwrap();
        assert!(matches!(
            fpi_contour_pole(&p, &Contour::Circle { radius: 2.0 }),
            Err(Error::InvalidContour(_))
        ));
        // the keyhole fallback handles it
        assert!(matches!(
            default_contour(&p.f, 2.0),
            Contour::Keyhole { .. }
        ));
        let c = fpi_contour(&p).unwrap();
        let l = fpi_limit(&p).unwrap();
        assert!((c.value - l.value).abs() < 1e-9);
    }

    #[test]
    fn route_mismatch_is_rejected() {
        let pole = FpiProblem::pole(f("one"), 1, 1.0).unwrap();
        let branch = FpiProblem::branch(f("one"), 1, 0.5, 1.0).unwrap();
        assert!(fpi_limit_branch(&pole).is_err());
        assert!(fpi_limit_pole(&branch).is_err());
        assert!(matches!(
            FpiProblem::branch(f("one"), 1, 0.0, 1.0),
            Err(Error::DegenerateBranch { .. })
        ));
        assert!(FpiProblem::new(f("one"), 0, 0.5, 1.0).is_err());
        assert!(FpiProblem::pole(f("one"), 0, 0.0).is_err());
    }

    #[test]
    fn monomial_closed_examples() {
        assert!((fpi_monomial_closed(1, 0.5, 1.0).unwrap() + 2.0).abs() < 1e-15);
        assert!((fpi_monomial_closed(1, 0.0, 2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((fpi_monomial_closed(3, 0.25, 1.0).unwrap() + 1.0 / 2.25).abs() < 1e-15);
        assert_eq!(fpi_monomial_closed(0, 0.0, 1.0), Err(Error::NotDivergent));
        assert!(matches!(
            fpi_monomial_closed(2, 1.0 - 1e-10, 1.0),
            Err(Error::DegenerateBranch { .. })
        ));
    }

    #[test]
    fn epsilon_audit_matches_limit() {
        for p in [
            FpiProblem::pole(f("exp_neg"), 1, 1.0).unwrap(),
            FpiProblem::branch(f("cos"), 1, 0.5, 2.0).unwrap(),
            FpiProblem::pole(f("geom(2)"), 0, 1.5).unwrap(),
        ] {
            let audit = fpi_epsilon_audit(&p).unwrap();
            let exact = fpi_limit(&p).unwrap().value;
            assert_eq!(audit.samples.len(), 17);
            assert!(
                (audit.extrapolated - exact).abs() < 1e-8 * (1.0 + exact.abs()),
                "{} vs {exact}",
                audit.extrapolated
            );
        }
    }

    #[test]
    fn split_point_does_not_matter() {
        let p = FpiProblem::pole(f("cos"), 3, 4.0).unwrap();
        let reference = fpi_limit_with_split(&p, 4.0).unwrap().value;
        for delta in [0.25, 1.0, 2.5] {
            let v = fpi_limit_with_split(&p, delta).unwrap().value;
            assert!(
                (v - reference).abs() < 1e-11 * (1.0 + reference.abs()),
                "{delta}"
            );
        }
    }
}
