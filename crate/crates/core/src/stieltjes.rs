//! The incomplete Stieltjes transform `S_a(ω) = ∫₀^a x^{-ν} f(x)/(ω+x) dx`,
//! evaluated directly and through its corrected expansion about the origin
//!
//! ```text
//! S_a(ω) = Σ_j (−ω)^j FPI ∫₀^a f(x)/x^{j+1+ν} dx + correction,
//! ```
//!
//! where the correction is `−f(−ω) ln ω` for `ν = 0` and
//! `π f(−ω)/(ω^ν sin πν)` otherwise.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::finite_part::{fpi_limit_with_split, FpiProblem};
use crate::function_model::{AnalyticFunction, BranchSpec, Builtin, CutPoint};
use crate::quadrature::{integrate_real, Tolerance};
use crate::reference::{fpi_exp_branch_infinite, fpi_exp_pole_infinite};

/// Relative accuracy of the direct reference evaluation inside expansions.
pub const REFERENCE_TOL: f64 = 1e-13;
/// Default truncation: first `n` with `B_n` below this.
pub const DEFAULT_BOUND_TARGET: f64 = 1e-10;
pub const MAX_TERMS: usize = 200;
const SPLIT_CAP: f64 = 8.0;
const THETA_GRID: usize = 1024;

#[derive(Debug, Clone)]
pub struct StieltjesProblem {
    pub f: AnalyticFunction,
    pub branch: BranchSpec,
    pub omega: f64,
    /// Upper limit; `f64::INFINITY` for the complete transform.
    pub a: f64,
}

impl StieltjesProblem {
    pub fn new(f: AnalyticFunction, nu: f64, omega: f64, a: f64) -> Result<Self> {
        let branch = BranchSpec::new(nu)?;
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive and finite, got {omega}"
            )));
        }
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "upper limit must be positive, got {a}"
            )));
        }
        Ok(Self {
            f,
            branch,
            omega,
            a,
        })
    }

    pub fn nu(&self) -> f64 {
        self.branch.nu()
    }

    /// Correction term: `−f(−ω) ln ω` or `π f(−ω)/(ω^ν sin πν)`.
    pub fn correction(&self) -> f64 {
        let f_minus = self.f.eval_real(-self.omega);
        if self.branch.is_pole() {
            -f_minus * self.omega.ln()
        } else {
            let nu = self.nu();
            PI * f_minus / (self.omega.powf(nu) * (PI * nu).sin())
        }
    }
}

/// Power-law growth exponent of `|f(x)|` at infinity, from the declared value
/// or estimated on `x ∈ [10², 10⁴]`.
fn growth_exponent(f: &AnalyticFunction) -> f64 {
    if let Some(g) = f.growth() {
        return g;
    }
    let at = |x: f64| f.eval_real(x).abs().max(f64::MIN_POSITIVE).ln();
    let (l2, l3, l4) = (at(1e2), at(1e3), at(1e4));
    let ln10 = 10f64.ln();
    ((l3 - l2) / ln10).max((l4 - l3) / ln10)
}

/// Direct evaluation by adaptive quadrature; relative accuracy `tol`.
/// Returns the value and an error estimate.
pub fn stieltjes_direct_with_error(p: &StieltjesProblem, tol: f64) -> Result<(f64, f64)> {
    let nu = p.nu();
    let omega = p.omega;
    let f = &p.f;
    let tol = Tolerance::new(1e-300, tol.max(1e-15));

    let c = if p.a.is_finite() { p.a } else { omega.max(1.0) };
    // x = c t^{1/(1−ν)} absorbs x^{−ν} at the origin
    let q = 1.0 / (1.0 - nu);
    let scale = q * c.powf(1.0 - nu);
    let (head, head_err) = integrate_real(
        |t| {
            let x = c * t.powf(q);
            scale * f.eval_real(x) / (omega + x)
        },
        0.0,
        1.0,
        tol,
    )?;
    if p.a.is_finite() {
        return Ok((head, head_err));
    }

    let gamma = growth_exponent(f);
    if gamma >= nu {
        return Err(Error::TailDivergent(format!(
            "|f(x)| grows like x^{gamma}, not integrable against x^-{nu}/(omega+x)"
        )));
    }
    // x = c s^{−r} makes an x^{γ−ν−1} tail bounded in s
    let r = (1.0 / (nu - gamma)).clamp(1.0, 16.0);
    let (tail, tail_err) = integrate_real(
        |s| {
            let x = c * s.powf(-r);
            let v = x.powf(-nu) * f.eval_real(x) / (omega + x) * x * r / s;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok((head + tail, head_err + tail_err))
}

pub fn stieltjes_direct(p: &StieltjesProblem, tol: f64) -> Result<f64> {
    Ok(stieltjes_direct_with_error(p, tol)?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionResult {
    /// `S_n = Σ_{j<n} (−ω)^j FPI_j`, for `n = 1..=N`.
    pub partial_sums: Vec<f64>,
    pub correction_term: f64,
    /// `FPI ∫₀^a f(x)/x^{j+1+ν} dx`, `j = 0..N`.
    pub fpi_terms: Vec<f64>,
    /// `B_n` for `n = 1..=N`; infinite where no bound is available.
    pub remainder_bounds: Vec<f64>,
    /// Direct quadrature value.
    pub reference: f64,
    /// Radius of the bounding circle when `f` is not entire.
    pub rho_used: Option<f64>,
}

impl ExpansionResult {
    pub fn terms(&self) -> usize {
        self.partial_sums.len()
    }

    /// `S_N + correction`.
    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0) + self.correction_term
    }
}

/// `max |f(r e^{iθ})|` over a 1024-point grid refined once around the
/// largest sample, inflated by 1%.
pub fn max_modulus(f: &AnalyticFunction, r: f64) -> f64 {
    let at = |theta: f64| f.eval(Complex64::from_polar(r, theta)).norm();
    let step = TAU / THETA_GRID as f64;
    let (mut best_theta, mut best) = (0.0, at(0.0));
    for i in 1..THETA_GRID {
        let theta = i as f64 * step;
        let v = at(theta);
        if v > best {
            best = v;
            best_theta = theta;
        }
    }
    let fine = step / 32.0;
    for i in -32..=32 {
        best = best.max(at(best_theta + i as f64 * fine));
    }
    1.01 * best
}

/// `n`-independent prefactor `K` and ratio `q` of `B_n = K q^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundShape {
    pub prefactor: f64,
    pub ratio: f64,
    pub rho: Option<f64>,
}

impl BoundShape {
    pub fn bound(&self, n: usize) -> f64 {
        self.prefactor * self.ratio.powi(n as i32)
    }
}

/// The circle `|z| = ρ` plus both edges of `[ρ, a]` bound the remainder:
///
/// * `ν = 0`: `(ω/ρ)^n [M(f,ρ) ρ(|ln ρ| + π/2)/(ρ−ω) + ∫_ρ^a |f|/(ω+x) dx]`,
/// * `ν > 0`: `(ω/ρ)^n [π M(f,ρ) ρ^{1−ν}/((ρ−ω)|sin πν|) + ∫_ρ^a |f| x^{−ν}/(ω+x) dx]`,
///
/// with `ρ = a` for entire `f`, else `ρ = min((ω+a)/2, (ω+ζ₀)/2)`.
pub fn bound_shape(p: &StieltjesProblem) -> Result<BoundShape> {
    if !p.a.is_finite() {
        return Ok(BoundShape {
            prefactor: f64::INFINITY,
            ratio: 1.0,
            rho: None,
        });
    }
    let (omega, a, nu) = (p.omega, p.a, p.nu());
    let rho = if p.f.is_entire() {
        a
    } else {
        (0.5 * (omega + a)).min(0.5 * (omega + p.f.zeta0()))
    };
    let m = max_modulus(&p.f, rho);
    let circle = if p.branch.is_pole() {
        m * rho * (rho.ln().abs() + 0.5 * PI) / (rho - omega)
    } else {
        PI * m * rho.powf(1.0 - nu) / ((rho - omega) * (PI * nu).sin().abs())
    };
    let edges = if rho < a {
        let f = &p.f;
        integrate_real(
            |x| f.eval_real(x).abs() * x.powf(-nu) / (omega + x),
            rho,
            a,
            Tolerance::new(0.0, 1e-10),
        )?
        .0
    } else {
        0.0
    };
    Ok(BoundShape {
        prefactor: circle + edges,
        ratio: omega / rho,
        rho: (rho < a).then_some(rho),
    })
}

fn check_expansion(p: &StieltjesProblem) -> Result<()> {
    if p.omega >= p.a {
        return Err(Error::ExpansionInvalid(format!(
            "omega = {} must be below the upper limit a = {}",
            p.omega, p.a
        )));
    }
    if p.omega >= p.f.zeta0() {
        return Err(Error::ExpansionInvalid(format!(
            "omega = {} must be below the nearest singularity zeta0 = {}",
            p.omega,
            p.f.zeta0()
        )));
    }
    Ok(())
}

/// Split point for the finite parts: at least `ω`, so that `ω^j FPI_j`
/// does not amplify the rounding error of the Taylor segment.
fn expansion_split(p: &StieltjesProblem) -> f64 {
    if p.f.has_exact_taylor() {
        p.a.min(SPLIT_CAP.max(1.5 * p.omega))
            .min(0.5 * (p.omega + p.f.zeta0()))
    } else {
        p.a.min(0.5 * p.f.fallback_radius())
    }
}

/// Closed-form `FPI ∫₀^∞ f(x)/x^{j+1+ν} dx` where one is known.
fn fpi_at_infinity(f: &AnalyticFunction, j: usize, branch: BranchSpec) -> Result<f64> {
    match (f.builtin(), branch.is_pole()) {
        (Some(Builtin::ExpNeg), true) => Ok(fpi_exp_pole_infinite(j)),
        (Some(Builtin::ExpNeg), false) => fpi_exp_branch_infinite(j, branch.nu()),
        (Some(Builtin::One), false) => Ok(0.0),
        _ => Err(Error::ExpansionInvalid(format!(
            "no closed-form finite part on [0, inf) for `{}` with nu = {}",
            f.label(),
            branch.nu()
        ))),
    }
}

fn default_terms(shape: &BoundShape) -> usize {
    (1..=MAX_TERMS)
        .find(|&n| shape.bound(n) < DEFAULT_BOUND_TARGET)
        .unwrap_or(MAX_TERMS)
}

/// Corrected expansion about the origin, pole or branch case by `ν`.
/// `terms = None` picks the smallest `N` with `B_N < 1e-10` (at most 200);
/// at `a = ∞` it sums until the terms fall below rounding level.
pub fn expand_origin(p: &StieltjesProblem, terms: Option<usize>) -> Result<ExpansionResult> {
    check_expansion(p)?;
    if terms == Some(0) {
        return Err(Error::InvalidParameter(
            "need at least one term".to_string(),
        ));
    }
    if p.a.is_infinite() {
        fpi_at_infinity(&p.f, 0, p.branch)?;
    }
    let shape = bound_shape(p)?;
    let correction = p.correction();
    let (reference, _) = stieltjes_direct_with_error(p, REFERENCE_TOL)?;

    let fpi_j = |j: usize| -> Result<f64> {
        if p.a.is_infinite() {
            return fpi_at_infinity(&p.f, j, p.branch);
        }
        let problem = FpiProblem::new(
            p.f.clone(),
            j + usize::from(!p.branch.is_pole()),
            p.nu(),
            p.a,
        )?;
        Ok(fpi_limit_with_split(&problem, expansion_split(p))?.value)
    };

    let limit = match terms {
        Some(n) => n,
        None if p.a.is_finite() => default_terms(&shape),
        None => MAX_TERMS,
    };
    let mut fpi_terms = Vec::new();
    let mut partial_sums = Vec::new();
    let mut sum = 0.0;
    let mut weight = 1.0;
    let mut quiet = 0;
    for j in 0..limit {
        let v = fpi_j(j)?;
        let term = weight * v;
        sum += term;
        weight *= -p.omega;
        fpi_terms.push(v);
        partial_sums.push(sum);
        if terms.is_none() && p.a.is_infinite() {
            if term.abs() <= 1e-17 * (sum.abs() + correction.abs()) {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    let remainder_bounds = (1..=partial_sums.len()).map(|n| shape.bound(n)).collect();

    Ok(ExpansionResult {
        partial_sums,
        correction_term: correction,
        fpi_terms,
        remainder_bounds,
        reference,
        rho_used: shape.rho,
    })
}

/// `Σ_j (−1)^j ω^j FPI ∫₀^a f(x)/x^{j+1} dx − f(−ω) ln ω`.
pub fn expand_origin_pole(p: &StieltjesProblem, terms: Option<usize>) -> Result<ExpansionResult> {
    if !p.branch.is_pole() {
        return Err(Error::InvalidParameter(
            "pole expansion needs nu = 0".to_string(),
        ));
    }
    expand_origin(p, terms)
}

/// `Σ_j (−1)^j ω^j FPI ∫₀^a f(x)/x^{j+ν+1} dx + π f(−ω)/(ω^ν sin πν)`.
pub fn expand_origin_branch(p: &StieltjesProblem, terms: Option<usize>) -> Result<ExpansionResult> {
    if p.branch.is_pole() {
        return Err(Error::DegenerateBranch { nu: p.nu() });
    }
    expand_origin(p, terms)
}

/// What a circle of radius `a` that leaves out `z = −ω` misses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleExclusion {
    /// `−2πi · Res_{z=−ω}` of `(−1)^n ω^n f(z) / [(e^{−2πνi}−1) z^{n+ν} (ω+z)]`.
    pub residue_term: f64,
    /// `(ω/a)^n`
    pub bound_decay: f64,
    /// `direct − S_n`: the remainder once the pole contribution is left out.
    pub excluded_remainder: f64,
}

pub fn pole_exclusion_audit(p: &StieltjesProblem, n: usize) -> Result<PoleExclusion> {
    if p.branch.is_pole() {
        return Err(Error::DegenerateBranch { nu: p.nu() });
    }
    check_expansion(p)?;
    let omega = p.omega;
    let at_pole = CutPoint::with_arg(Complex64::new(-omega, 0.0), PI);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let residue = sign * omega.powi(n as i32) * p.f.eval(at_pole.z)
        / ((p.branch.monodromy() - 1.0) * at_pole.powf(n as f64 + p.nu()));
    let residue_term = (Complex64::new(0.0, -TAU) * residue).re;

    let expansion = expand_origin(p, Some(n.max(1)))?;
    let s_n = if n == 0 {
        0.0
    } else {
        expansion.partial_sums[n - 1]
    };
    Ok(PoleExclusion {
        residue_term,
        bound_decay: (omega / p.a).powi(n as i32),
        excluded_remainder: expansion.reference - s_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveVsCorrected {
    /// `S_N`, the term-by-term sum alone.
    pub naive: f64,
    /// `S_N + correction`.
    pub corrected: f64,
    /// `corrected − naive`.
    pub missing: f64,
    pub direct: f64,
    pub bound: f64,
}

pub fn naive_vs_corrected(p: &StieltjesProblem, terms: Option<usize>) -> Result<NaiveVsCorrected> {
    let e = expand_origin(p, terms)?;
    let naive = *e.partial_sums.last().expect("at least one term");
    Ok(NaiveVsCorrected {
        naive,
        corrected: naive + e.correction_term,
        missing: e.correction_term,
        direct: e.reference,
        bound: *e.remainder_bounds.last().expect("at least one term"),
    })
}
