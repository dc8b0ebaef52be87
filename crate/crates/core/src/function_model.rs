//! Integrands with complex extensions, Taylor data at the origin and a
//! singularity inventory, plus the branch conventions shared by every
//! contour integral in the crate.
//!
//! All cuts lie along the positive real axis and `arg z` runs over
//! `[0, 2π]`: the top edge of the cut has `arg = 0`, the bottom edge
//! `arg = 2π`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

type EvalFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type TaylorFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Largest factorial argument that does not overflow `f64`.
const MAX_FACTORIAL: usize = 170;

/// Branch exponents this close to 0 are treated as the pole case; this close
/// to 1 they are rejected.
pub const BRANCH_EPS: f64 = 1e-8;

/// A point in the plane cut along the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPoint {
    pub z: Complex64,
    /// Argument on the cut plane, in `[0, 2π]`.
    pub arg: f64,
}

impl CutPoint {
    /// Places `z` on the cut plane. Points on the positive real axis land on
    /// the top edge.
    pub fn new(z: Complex64) -> Self {
        let mut arg = z.im.atan2(z.re);
        if arg < 0.0 {
            arg += TAU;
        }
        Self { z, arg }
    }

    pub fn with_arg(z: Complex64, arg: f64) -> Self {
        Self { z, arg }
    }

    pub fn top_edge(x: f64) -> Self {
        Self {
            z: Complex64::new(x, 0.0),
            arg: 0.0,
        }
    }

    pub fn bottom_edge(x: f64) -> Self {
        Self {
            z: Complex64::new(x, 0.0),
            arg: TAU,
        }
    }

    pub fn modulus(&self) -> f64 {
        self.z.norm()
    }

    /// `log z` with the cut on the positive real axis.
    pub fn log(&self) -> Complex64 {
        Complex64::new(self.modulus().ln(), self.arg)
    }

    /// `z^s = |z|^s e^{i s arg z}`.
    pub fn powf(&self, s: f64) -> Complex64 {
        Complex64::from_polar(self.modulus().powf(s), s * self.arg)
    }
}

/// Exponent `ν ∈ [0, 1)` of the factor `z^{-ν}`; `ν = 0` selects the pole case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSpec {
    nu: f64,
}

impl BranchSpec {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || !(-BRANCH_EPS..1.0).contains(&nu) {
            return Err(Error::InvalidParameter(format!(
                "branch exponent nu = {nu} must lie in [0, 1)"
            )));
        }
        if nu < BRANCH_EPS {
            return Ok(Self { nu: 0.0 });
        }
        if nu > 1.0 - BRANCH_EPS {
            return Err(Error::DegenerateBranch { nu });
        }
        Ok(Self { nu })
    }

    pub fn pole() -> Self {
        Self { nu: 0.0 }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn is_pole(&self) -> bool {
        self.nu == 0.0
    }

    /// `e^{-2πiν}`: the factor `z^{-ν}` picks up crossing from the top edge
    /// to the bottom edge.
    pub fn monodromy(&self) -> Complex64 {
        Complex64::from_polar(1.0, -TAU * self.nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    pub order: u32,
}

/// Built-in integrands; their Taylor coefficients and singularities are exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    One,
    ExpNeg,
    Cos,
    /// `1/(1 + x/p)`
    Geom(f64),
    /// `c₀ + c₁x + … + c_K x^K`
    Poly(Vec<f64>),
    /// `(1 + x)^{-ν}` on the principal branch
    ShiftedPower(f64),
}

/// An integrand `f` given through its complex extension.
///
/// Values are immutable once built and cheap to clone.
#[derive(Clone)]
pub struct AnalyticFunction {
    label: String,
    eval: EvalFn,
    taylor: Option<TaylorFn>,
    zeta0: f64,
    poles: Vec<Pole>,
    growth: Option<f64>,
    builtin: Option<Builtin>,
    warnings: Vec<String>,
}

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunction")
            .field("label", &self.label)
            .field("exact_taylor", &self.taylor.is_some())
            .field("zeta0", &self.zeta0)
            .field("poles", &self.poles)
            .field("growth", &self.growth)
            .finish()
    }
}

impl AnalyticFunction {
    /// A user-supplied function. Without further information it is assumed
    /// entire and a warning is attached; use the builder methods to declare
    /// Taylor coefficients and singularities.
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let label = label.into();
        let warning = format!(
            "`{label}`: no singularity data supplied, assuming an entire function (zeta0 = inf)"
        );
        Self {
            label,
            eval: Arc::new(eval),
            taylor: None,
            zeta0: f64::INFINITY,
            poles: Vec::new(),
            growth: None,
            builtin: None,
            warnings: vec![warning],
        }
    }

    /// Exact Taylor coefficients `c_k = f^{(k)}(0)/k!`.
    pub fn with_taylor<T>(mut self, taylor: T) -> Self
    where
        T: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        self.taylor = Some(Arc::new(taylor));
        self
    }

    /// Declares the singularities. `zeta0` is the distance from the origin to
    /// the nearest one (pole or branch point); it is clamped to the nearest
    /// declared pole.
    pub fn with_singularities(mut self, zeta0: f64, poles: Vec<Pole>) -> Self {
        let nearest = poles
            .iter()
            .map(|p| p.location.norm())
            .fold(f64::INFINITY, f64::min);
        self.zeta0 = zeta0.min(nearest);
        self.poles = poles;
        self.warnings.clear();
        self
    }

    /// `|f(x)| = O(x^growth)` as `x → +∞`; `-inf` for exponential decay.
    pub fn with_growth(mut self, growth: f64) -> Self {
        self.growth = Some(growth);
        self
    }

    fn with_builtin(mut self, builtin: Builtin) -> Self {
        self.builtin = Some(builtin);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(Complex64::new(x, 0.0)).re
    }

    pub fn has_exact_taylor(&self) -> bool {
        self.taylor.is_some()
    }

    /// `c_k = f^{(k)}(0)/k!`, exact for built-ins and otherwise recovered by
    /// [`cauchy_taylor`] at radius `min(0.5, zeta0/2)`.
    pub fn taylor(&self, k: usize) -> f64 {
        match &self.taylor {
            Some(t) => t(k),
            None => cauchy_taylor(self, k, self.fallback_radius())
                .map(|c| c.re)
                .unwrap_or(f64::NAN),
        }
    }

    /// Radius used to recover Taylor coefficients numerically.
    pub fn fallback_radius(&self) -> f64 {
        (0.5f64).min(self.zeta0 / 2.0)
    }

    pub fn zeta0(&self) -> f64 {
        self.zeta0
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn growth(&self) -> Option<f64> {
        self.growth
    }

    pub fn builtin(&self) -> Option<&Builtin> {
        self.builtin.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_entire(&self) -> bool {
        self.zeta0.is_infinite()
    }

    /// `x^m f(x)`.
    pub fn times_power(&self, m: usize) -> Self {
        let inner = self.clone();
        let taylor_src = self.clone();
        let exact = self.taylor.is_some();
        let mut out = Self {
            label: format!("x^{m}*{}", self.label),
            eval: Arc::new(move |z: Complex64| z.powu(m as u32) * inner.eval(z)),
            taylor: None,
            zeta0: self.zeta0,
            poles: self.poles.clone(),
            growth: self.growth.map(|g| g + m as f64),
            builtin: None,
            warnings: self.warnings.clone(),
        };
        if exact {
            out.taylor = Some(Arc::new(
                move |k| {
                    if k < m {
                        0.0
                    } else {
                        taylor_src.taylor(k - m)
                    }
                },
            ));
        }
        out
    }

    /// `αf + βg`.
    pub fn linear_combination(alpha: f64, f: &Self, beta: f64, g: &Self) -> Self {
        let (fe, ge) = (f.clone(), g.clone());
        let mut poles = f.poles.clone();
        poles.extend(g.poles.iter().copied());
        let mut warnings = f.warnings.clone();
        warnings.extend(g.warnings.iter().cloned());
        let growth = match (f.growth, g.growth) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        let mut out = Self {
            label: format!("{alpha}*{} + {beta}*{}", f.label, g.label),
            eval: Arc::new(move |z| alpha * fe.eval(z) + beta * ge.eval(z)),
            taylor: None,
            zeta0: f.zeta0.min(g.zeta0),
            poles,
            growth,
            builtin: None,
            warnings,
        };
        if f.has_exact_taylor() && g.has_exact_taylor() {
            let (ft, gt) = (f.clone(), g.clone());
            out.taylor = Some(Arc::new(move |k| {
                alpha * ft.taylor(k) + beta * gt.taylor(k)
            }));
        }
        out
    }

    /// `(1 + x)^{-ν}`, branch point at `z = -1`.
    pub fn shifted_power(nu: f64) -> Self {
        Self::new(format!("(1+x)^-{nu}"), move |z: Complex64| {
            (Complex64::new(1.0, 0.0) + z).powf(-nu)
        })
        .with_taylor(move |k| {
            // C(-ν, k) by the product recurrence
            (0..k).fold(1.0, |c, i| c * (-nu - i as f64) / (i as f64 + 1.0))
        })
        .with_singularities(1.0, Vec::new())
        .with_growth(-nu)
        .with_builtin(Builtin::ShiftedPower(nu))
    }
}

fn inv_factorial(k: usize) -> f64 {
    if k > MAX_FACTORIAL {
        return 0.0;
    }
    (1..=k).fold(1.0, |acc, i| acc / i as f64)
}

fn parse_literals(args: &str) -> Result<Vec<f64>> {
    args.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("bad real literal `{}`", s.trim())))
        })
        .collect()
}

/// Parses one of `one`, `exp_neg`, `cos`, `geom(p)`, `poly(c0,c1,...)`.
pub fn make_builtin(name: &str) -> Result<AnalyticFunction> {
    let name = name.trim();
    let unknown = || Error::UnknownFunction(name.to_string());
    let (head, args) = match name.find('(') {
        Some(open) => {
            let inner = name[open + 1..].strip_suffix(')').ok_or_else(unknown)?;
            (&name[..open], Some(inner))
        }
        None => (name, None),
    };

    let f = match (head, args) {
        ("one", None) => AnalyticFunction::new("one", |_| Complex64::new(1.0, 0.0))
            .with_taylor(|k| if k == 0 { 1.0 } else { 0.0 })
            .with_singularities(f64::INFINITY, Vec::new())
            .with_growth(0.0)
            .with_builtin(Builtin::One),
        ("exp_neg", None) => AnalyticFunction::new("exp_neg", |z: Complex64| (-z).exp())
            .with_taylor(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * inv_factorial(k)
            })
            .with_singularities(f64::INFINITY, Vec::new())
            .with_growth(f64::NEG_INFINITY)
            .with_builtin(Builtin::ExpNeg),
        ("cos", None) => AnalyticFunction::new("cos", |z: Complex64| z.cos())
            .with_taylor(|k| match k % 4 {
                0 => inv_factorial(k),
                2 => -inv_factorial(k),
                _ => 0.0,
            })
            .with_singularities(f64::INFINITY, Vec::new())
            .with_growth(0.0)
            .with_builtin(Builtin::Cos),
        ("geom", Some(args)) => {
            let p = match parse_literals(args)?.as_slice() {
                [p] => *p,
                _ => return Err(unknown()),
            };
            if p <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "geom(p) needs p > 0, got {p}"
                )));
            }
            AnalyticFunction::new(format!("geom({p})"), move |z: Complex64| {
                1.0 / (1.0 + z / p)
            })
            .with_taylor(move |k| (-1.0 / p).powi(k as i32))
            .with_singularities(
                p,
                vec![Pole {
                    location: Complex64::new(-p, 0.0),
                    order: 1,
                }],
            )
            .with_growth(-1.0)
            .with_builtin(Builtin::Geom(p))
        }
        ("poly", Some(args)) => {
            let coeffs = parse_literals(args)?;
            let degree = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
            let label = format!(
                "poly({})",
                coeffs
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            let eval_coeffs = coeffs.clone();
            let taylor_coeffs = coeffs.clone();
            AnalyticFunction::new(label, move |z: Complex64| {
                eval_coeffs
                    .iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
            })
            .with_taylor(move |k| taylor_coeffs.get(k).copied().unwrap_or(0.0))
            .with_singularities(f64::INFINITY, Vec::new())
            .with_growth(degree as f64)
            .with_builtin(Builtin::Poly(coeffs))
        }
        _ => return Err(unknown()),
    };
    Ok(f)
}

/// Taylor coefficient `c_k = (1/2πi)∮ f(z) z^{-k-1} dz` on the circle of
/// radius `r`, by the trapezoidal rule (spectrally accurate for this periodic
/// integrand). Node count doubles until two successive estimates agree.
pub fn cauchy_taylor(f: &AnalyticFunction, k: usize, r: f64) -> Result<Complex64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )));
    }
    if r >= f.zeta0() {
        return Err(Error::ContourHitsSingularity {
            radius: r,
            zeta0: f.zeta0(),
        });
    }

    let estimate = |nodes: usize| {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        for i in 0..nodes {
            let theta = TAU * i as f64 / nodes as f64;
            let term = f.eval(Complex64::from_polar(r, theta))
                * Complex64::from_polar(1.0, -(k as f64) * theta);
            scale = scale.max(term.norm());
            sum += term;
        }
        let rk = r.powi(k as i32);
        (sum / (nodes as f64 * rk), scale / rk)
    };

    let mut nodes = 2 * (k + 16).next_power_of_two();
    let (mut prev, _) = estimate(nodes);
    loop {
        nodes *= 2;
        let (next, scale) = estimate(nodes);
        let diff = (next - prev).norm();
        if diff <= 1e-14 * scale.max(next.norm()) || nodes >= 1 << 16 {
            return Ok(next);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn builtin_taylor_and_singularities() {
        let e = make_builtin("exp_neg").unwrap();
        assert!((e.taylor(3) + 1.0 / 6.0).abs() < 1e-16);
        assert!(make_builtin("one").unwrap().zeta0().is_infinite());
        let g = make_builtin("geom(2)").unwrap();
        assert_eq!(
            g.poles(),
            &[Pole {
                location: c(-2.0),
                order: 1
            }]
        );
        assert_eq!(g.zeta0(), 2.0);
        let p = make_builtin("poly(1, 2, 3)").unwrap();
        assert_eq!(p.taylor(2), 3.0);
        assert_eq!(p.taylor(7), 0.0);
        assert!((p.eval_real(2.0) - 17.0).abs() < 1e-15);
        assert_eq!(p.growth(), Some(2.0));
    }

    #[test]
    fn unknown_names_are_rejected() {
        for name in ["sin", "geom", "geom(1,2)", "poly(a)", "geom(2", "one(1)"] {
            assert!(
                matches!(
                    make_builtin(name),
                    Err(Error::UnknownFunction(_)) | Err(Error::InvalidParameter(_))
                ),
                "{name}"
            );
        }
        assert!(matches!(
            make_builtin("sin"),
            Err(Error::UnknownFunction(_))
        ));
        assert!(matches!(
            make_builtin("geom(-1)"),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn cauchy_examples() {
        let e = make_builtin("exp_neg").unwrap();
        assert!((cauchy_taylor(&e, 0, 0.5).unwrap() - 1.0).norm() < 1e-10);
        assert!((cauchy_taylor(&e, 2, 0.5).unwrap() - 0.5).norm() < 1e-9);
        // 1/(1+x/2) = 1 - x/2 + x²/4 - ...
        let g = make_builtin("geom(2)").unwrap();
        assert!((cauchy_taylor(&g, 1, 1.0).unwrap() + 0.5).norm() < 1e-9);
    }

    #[test]
    fn cauchy_rejects_radius_past_singularity() {
        let g = make_builtin("geom(2)").unwrap();
        assert!(matches!(
            cauchy_taylor(&g, 1, 2.0),
            Err(Error::ContourHitsSingularity { .. })
        ));
    }

    #[test]
    fn user_function_falls_back_to_cauchy() {
        let f = AnalyticFunction::new("sinh", |z: Complex64| z.sinh());
        assert!(!f.warnings().is_empty());
        assert!(f.zeta0().is_infinite());
        assert!((f.taylor(3) - 1.0 / 6.0).abs() < 1e-12);
        assert!(f.taylor(2).abs() < 1e-12);
    }

    #[test]
    fn combinators() {
        let e = make_builtin("exp_neg").unwrap();
        let x2e = e.times_power(2);
        assert_eq!(x2e.taylor(1), 0.0);
        assert!((x2e.taylor(3) + 1.0).abs() < 1e-16);
        assert!((x2e.eval_real(2.0) - 4.0 * (-2.0f64).exp()).abs() < 1e-15);
        let g = make_builtin("geom(3)").unwrap();
        let h = AnalyticFunction::linear_combination(2.0, &e, -1.0, &g);
        assert_eq!(h.zeta0(), 3.0);
        assert!((h.taylor(1) - (-2.0 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn shifted_power_taylor() {
        let f = AnalyticFunction::shifted_power(1.0 / 3.0);
        // (1+x)^{-1/3} = 1 - x/3 + 2x²/9 - ...
        assert!((f.taylor(1) + 1.0 / 3.0).abs() < 1e-15);
        assert!((f.taylor(2) - 2.0 / 9.0).abs() < 1e-15);
        assert!((f.eval_real(7.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn branch_conventions() {
        let top = CutPoint::top_edge(2.0);
        let bottom = CutPoint::bottom_edge(2.0);
        assert_eq!(top.powf(-0.3).im, 0.0);
        assert!(top.powf(-0.3).re > 0.0);
        let nu = 0.3;
        let ratio = bottom.powf(-nu) / top.powf(-nu);
        assert!((ratio - BranchSpec::new(nu).unwrap().monodromy()).norm() < 1e-15);
        let jump = bottom.log() - top.log();
        assert!((jump - Complex64::new(0.0, TAU)).norm() < 1e-15);
        // lower half plane maps into (π, 2π)
        let p = CutPoint::new(Complex64::new(1.0, -1e-300));
        assert!(p.arg > PI);
    }

    #[test]
    fn branch_spec_thresholds() {
        assert!(BranchSpec::new(5e-9).unwrap().is_pole());
        assert!(matches!(
            BranchSpec::new(1.0 - 1e-9),
            Err(Error::DegenerateBranch { .. })
        ));
        assert!(BranchSpec::new(1.0).is_err());
        assert!(BranchSpec::new(-0.1).is_err());
    }
}
