//! Closed contours that start at `a` on the top edge of the positive-real
//! cut, wind once counterclockwise around the origin and come back to `a` on
//! the bottom edge, plus quadrature along them.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function_model::{AnalyticFunction, CutPoint};
use crate::quadrature::{integrate_pieces, QuadResult, Tolerance, DEFAULT_MAX_PANELS};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MIN_TOL: f64 = 1e-13;

/// Relative distance under which a pole counts as sitting on the path.
const ON_PATH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contour {
    /// `z(θ) = a·e^{iθ}`, `θ ∈ [0, 2π]`.
    Circle { radius: f64 },
    /// Boundary of the box `[-h, a] × [-h, h]`, entered and left at `a`.
    Rectangle { a: f64, h: f64 },
    /// Top edge of `[ρ, a]` inward, the circle of radius `ρ`, then the
    /// bottom edge of `[ρ, a]` outward.
    Keyhole { rho: f64, a: f64 },
}

impl fmt::Display for Contour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contour::Circle { radius } => write!(f, "circle:{radius}"),
            Contour::Rectangle { a, h } => write!(f, "rect:{a},{h}"),
            Contour::Keyhole { rho, a } => write!(f, "rho:{rho},{a}"),
        }
    }
}

impl FromStr for Contour {
    type Err = Error;

    /// `circle:a`, `rect:a,h` or `rho:ρ,a`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidContour(format!("cannot parse `{s}`"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums = args
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let c = match (kind.trim(), nums.as_slice()) {
            ("circle", [r]) => Contour::Circle { radius: *r },
            ("rect", [a, h]) => Contour::Rectangle { a: *a, h: *h },
            ("rho", [rho, a]) => Contour::Keyhole { rho: *rho, a: *a },
            _ => return Err(bad()),
        };
        c.validate()?;
        Ok(c)
    }
}

impl Contour {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Contour::Circle { radius } => radius > 0.0 && radius.is_finite(),
            Contour::Rectangle { a, h } => a > 0.0 && h > 0.0 && a.is_finite() && h.is_finite(),
            Contour::Keyhole { rho, a } => rho > 0.0 && rho < a && a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidContour(format!("degenerate contour {self}")))
        }
    }

    /// Point where the contour meets the positive real axis.
    pub fn start(&self) -> f64 {
        match *self {
            Contour::Circle { radius } => radius,
            Contour::Rectangle { a, .. } | Contour::Keyhole { a, .. } => a,
        }
    }

    /// Largest modulus reached along the path.
    pub fn max_modulus(&self) -> f64 {
        match *self {
            Contour::Circle { radius } => radius,
            Contour::Rectangle { a, h } => a.max(h).hypot(h),
            Contour::Keyhole { a, .. } => a,
        }
    }

    /// Radius of the disc swept around the origin (for keyholes only the
    /// small circle encloses anything).
    pub fn enclosed_radius(&self) -> f64 {
        match *self {
            Contour::Circle { radius } => radius,
            Contour::Rectangle { a, h } => a.min(h),
            Contour::Keyhole { rho, .. } => rho,
        }
    }

    fn pieces(&self) -> Vec<(f64, f64)> {
        match self {
            Contour::Circle { .. } => vec![(0.0, TAU)],
            Contour::Rectangle { .. } => vec![(0.0, 1.0); 5],
            Contour::Keyhole { .. } => vec![(0.0, 1.0), (0.0, TAU), (0.0, 1.0)],
        }
    }

    /// Position on the cut plane and `dz/dt` for parameter `t` of `piece`.
    fn point(&self, piece: usize, t: f64) -> (CutPoint, Complex64) {
        match *self {
            Contour::Circle { radius } => {
                let z = Complex64::from_polar(radius, t);
                (CutPoint::with_arg(z, t), Complex64::i() * z)
            }
            Contour::Rectangle { a, h } => {
                let corners = [
                    Complex64::new(a, 0.0),
                    Complex64::new(a, h),
                    Complex64::new(-h, h),
                    Complex64::new(-h, -h),
                    Complex64::new(a, -h),
                    Complex64::new(a, 0.0),
                ];
                let (p0, p1) = (corners[piece], corners[piece + 1]);
                let z = p0 + (p1 - p0) * t;
                let mut cp = CutPoint::new(z);
                // the last edge approaches the cut from below
                if piece == 4 && cp.arg < FRAC_PI_2 {
                    cp.arg += TAU;
                }
                (cp, p1 - p0)
            }
            Contour::Keyhole { rho, a } => match piece {
                0 => {
                    let x = a + (rho - a) * t;
                    (CutPoint::top_edge(x), Complex64::new(rho - a, 0.0))
                }
                1 => {
                    let z = Complex64::from_polar(rho, t);
                    (CutPoint::with_arg(z, t), Complex64::i() * z)
                }
                _ => {
                    let x = rho + (a - rho) * t;
                    (CutPoint::bottom_edge(x), Complex64::new(a - rho, 0.0))
                }
            },
        }
    }

    /// Whether `z` lies strictly inside the region the contour winds around.
    pub fn encloses(&self, z: Complex64) -> bool {
        match *self {
            Contour::Circle { radius } => z.norm() < radius,
            Contour::Rectangle { a, h } => z.re > -h && z.re < a && z.im.abs() < h,
            Contour::Keyhole { rho, .. } => z.norm() < rho,
        }
    }

    /// Euclidean distance from `z` to the path.
    pub fn distance_to_path(&self, z: Complex64) -> f64 {
        fn segment(z: Complex64, p: Complex64, q: Complex64) -> f64 {
            let d = q - p;
            let t = (((z - p) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
            (z - (p + d * t)).norm()
        }
        match *self {
            Contour::Circle { radius } => (z.norm() - radius).abs(),
            Contour::Rectangle { a, h } => {
                let c = [
                    Complex64::new(a, h),
                    Complex64::new(-h, h),
                    Complex64::new(-h, -h),
                    Complex64::new(a, -h),
                ];
                (0..4)
                    .map(|i| segment(z, c[i], c[(i + 1) % 4]))
                    .fold(f64::INFINITY, f64::min)
            }
            Contour::Keyhole { rho, a } => (z.norm() - rho).abs().min(segment(
                z,
                Complex64::new(rho, 0.0),
                Complex64::new(a, 0.0),
            )),
        }
    }

    fn on_path(&self, z: Complex64) -> bool {
        self.distance_to_path(z) <= ON_PATH_EPS * self.max_modulus()
    }

    /// Checks that no pole of `f` lies on or inside the contour.
    pub fn check_clear_of(&self, f: &AnalyticFunction) -> Result<()> {
        self.validate()?;
        for pole in f.poles() {
            if self.on_path(pole.location) {
                return Err(Error::PoleOnContour {
                    location: pole.location,
                });
            }
            if self.encloses(pole.location) {
                return Err(Error::InvalidContour(format!(
                    "{self} encloses the pole of {} at {}",
                    f.label(),
                    pole.location
                )));
            }
        }
        // singularities known only through zeta0 (branch points)
        if f.poles().is_empty() && f.zeta0().is_finite() {
            let reach = match *self {
                Contour::Keyhole { rho, .. } => rho,
                _ => self.max_modulus(),
            };
            if reach >= f.zeta0() {
                return Err(Error::ContourHitsSingularity {
                    radius: reach,
                    zeta0: f.zeta0(),
                });
            }
        }
        Ok(())
    }
}

/// `∫_C g(z) dz`. The integrand receives points on the cut plane so it can
/// evaluate `log z` and `z^s` on the right sheet.
pub fn integrate_contour<G>(g: G, c: &Contour, tol: f64) -> Result<QuadResult>
where
    G: Fn(CutPoint) -> Complex64,
{
    c.validate()?;
    if !(tol >= MIN_TOL) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol:e} below the supported minimum {MIN_TOL:e}"
        )));
    }
    integrate_pieces(
        |piece, t| {
            let (p, dz) = c.point(piece, t);
            g(p) * dz
        },
        &c.pieces(),
        Tolerance::mixed(tol),
        DEFAULT_MAX_PANELS,
    )
}

/// Poles of `f(z)/(ω + z)` strictly inside `c`, including `-ω` when enclosed.
pub fn enclosed_poles(c: &Contour, f: &AnalyticFunction, omega: f64) -> Result<Vec<Complex64>> {
    c.validate()?;
    let candidates = f
        .poles()
        .iter()
        .map(|p| p.location)
        .chain(std::iter::once(Complex64::new(-omega, 0.0)));
    let mut inside = Vec::new();
    for z in candidates {
        if c.on_path(z) {
            return Err(Error::PoleOnContour { location: z });
        }
        if c.encloses(z) {
            inside.push(z);
        }
    }
    Ok(inside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_model::make_builtin;

    fn circle(r: f64) -> Contour {
        Contour::Circle { radius: r }
    }

    #[test]
    fn residue_theorem_examples() {
        let r = integrate_contour(|p| 1.0 / p.z, &circle(1.0), DEFAULT_TOL).unwrap();
        assert!((r.value - Complex64::new(0.0, TAU)).norm() < 1e-12);
        let r = integrate_contour(|p| p.z, &circle(1.0), DEFAULT_TOL).unwrap();
        assert!(r.value.norm() < 1e-12);
        let r = integrate_contour(|p| 1.0 / (p.z * p.z), &circle(2.0), DEFAULT_TOL).unwrap();
        assert!(r.value.norm() < 1e-12);
        assert!(r.abs_error_estimate >= 0.0 && r.evaluations > 0);
    }

    #[test]
    fn every_shape_winds_once() {
        for c in [
            circle(0.7),
            Contour::Rectangle { a: 1.5, h: 0.4 },
            Contour::Keyhole { rho: 0.3, a: 2.0 },
        ] {
            let r = integrate_contour(|p| 1.0 / p.z, &c, 1e-12).unwrap();
            assert!((r.value - Complex64::new(0.0, TAU)).norm() < 1e-11, "{c}");
        }
    }

    #[test]
    fn log_jump_on_keyhole() {
        // log z / z is analytic on the cut plane, so both paths from the top
        // edge at 1 to the bottom edge at 1 give the same value.
        let k = Contour::Keyhole { rho: 0.5, a: 1.0 };
        let c = circle(1.0);
        let g = |p: CutPoint| p.log() / p.z;
        let a = integrate_contour(g, &k, 1e-12).unwrap().value;
        let b = integrate_contour(g, &c, 1e-12).unwrap().value;
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn tolerance_floor() {
        assert!(integrate_contour(|p| p.z, &circle(1.0), 1e-14).is_err());
    }

    #[test]
    fn parse_contours() {
        assert_eq!("circle:2".parse::<Contour>().unwrap(), circle(2.0));
        assert_eq!(
            "rect:1,0.5".parse::<Contour>().unwrap(),
            Contour::Rectangle { a: 1.0, h: 0.5 }
        );
        assert_eq!(
            "rho:0.25,1".parse::<Contour>().unwrap(),
            Contour::Keyhole { rho: 0.25, a: 1.0 }
        );
        for bad in ["circle", "circle:-1", "rho:2,1", "square:1", "rect:1"] {
            assert!(bad.parse::<Contour>().is_err(), "{bad}");
        }
    }

    #[test]
    fn enclosed_pole_examples() {
        let one = make_builtin("one").unwrap();
        let geom = make_builtin("geom(2)").unwrap();
        let m = Complex64::new(-0.5, 0.0);
        assert_eq!(enclosed_poles(&circle(1.0), &one, 0.5).unwrap(), vec![m]);
        assert!(enclosed_poles(&circle(1.0), &one, 2.0).unwrap().is_empty());
        assert_eq!(enclosed_poles(&circle(1.0), &geom, 0.5).unwrap(), vec![m]);
        assert!(matches!(
            enclosed_poles(&circle(1.0), &one, 1.0),
            Err(Error::PoleOnContour { .. })
        ));
        assert!(matches!(
            enclosed_poles(&Contour::Rectangle { a: 3.0, h: 2.0 }, &geom, 0.5),
            Err(Error::PoleOnContour { .. })
        ));
    }

    #[test]
    fn clearance_checks() {
        let geom = make_builtin("geom(2)").unwrap();
        assert!(circle(1.9).check_clear_of(&geom).is_ok());
        assert!(matches!(
            circle(2.0).check_clear_of(&geom),
            Err(Error::PoleOnContour { .. })
        ));
        assert!(matches!(
            circle(3.0).check_clear_of(&geom),
            Err(Error::InvalidContour(_))
        ));
        assert!(Contour::Rectangle { a: 2.0, h: 1.0 }
            .check_clear_of(&geom)
            .is_ok());
        assert!(Contour::Keyhole { rho: 1.0, a: 5.0 }
            .check_clear_of(&geom)
            .is_ok());
    }
}
