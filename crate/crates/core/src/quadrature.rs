//! Globally adaptive 21-point Gauss–Kronrod quadrature for complex-valued
//! integrands over one or more parameter intervals.
//!
//! Several smooth pieces (the edges of a contour, say) share one priority
//! queue, so refinement always goes to the panel with the largest error
//! estimate wherever it sits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub const DEFAULT_MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Stop once the summed error estimate is at most `abs + rel·|value|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    /// `abs = rel = tol`, i.e. the target `tol·(1 + |value|)`.
    pub fn mixed(tol: f64) -> Self {
        Self { abs: tol, rel: tol }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs + self.rel * value
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    piece: usize,
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
    // error estimate is the round-off floor; bisection cannot improve it
    roundoff: bool,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F>(f: &mut F, piece: usize, lo: f64, hi: f64) -> Panel
where
    F: FnMut(usize, f64) -> Complex64,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(piece, center);

    let mut kronrod = f_center * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut res_abs = WGK[10] * f_center.norm();
    let mut samples = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];

    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(piece, center - dx);
        let f2 = f(piece, center + dx);
        *sample = (f1, f2);
        kronrod += (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for (j, (f1, f2)) in samples.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }

    let abs_half = half.abs();
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut error = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let mut roundoff = false;
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor >= error {
        error = floor;
        roundoff = true;
    }
    if !kronrod.re.is_finite() || !kronrod.im.is_finite() || !error.is_finite() {
        error = f64::INFINITY;
        roundoff = false;
    }

    Panel {
        piece,
        lo,
        hi,
        value: kronrod * half,
        error,
        roundoff,
        floor,
    }
}

/// Integrates `f(piece, t)` over every `pieces[piece] = (t0, t1)` and sums.
pub fn integrate_pieces<F>(
    mut f: F,
    pieces: &[(f64, f64)],
    tol: Tolerance,
    max_panels: usize,
) -> Result<QuadResult>
where
    F: FnMut(usize, f64) -> Complex64,
{
    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    // Panels at the round-off floor or too narrow to bisect; they still
    // count toward the sum.
    let mut frozen: Vec<Panel> = Vec::new();

    for (i, &(lo, hi)) in pieces.iter().enumerate() {
        if lo == hi {
            continue;
        }
        heap.push(gauss_kronrod(&mut f, i, lo, hi));
        evaluations += 21;
    }

    let totals = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| {
        heap.iter()
            .chain(frozen.iter())
            .fold((Complex64::new(0.0, 0.0), 0.0, 0.0), |(v, e, r), p| {
                (v + p.value, e + p.error, r + p.floor)
            })
    };

    loop {
        let (value, error, floor) = totals(&heap, &frozen);
        // never ask for less than the accumulated rounding error
        let target = tol.target(value.norm()).max(2.0 * floor);
        if error.is_finite() && error <= target {
            return Ok(QuadResult {
                value,
                abs_error_estimate: error,
                evaluations: evaluations.max(1),
            });
        }

        let worst = match heap.pop() {
            Some(p) => p,
            None if error.is_finite() && frozen.iter().all(|p| p.roundoff) => {
                return Ok(QuadResult {
                    value,
                    abs_error_estimate: error,
                    evaluations: evaluations.max(1),
                })
            }
            None => {
                return Err(Error::QuadratureFailure {
                    value,
                    abs_error: error,
                    evaluations,
                })
            }
        };

        let mid = 0.5 * (worst.lo + worst.hi);
        let width = (worst.hi - worst.lo).abs();
        let scale = worst.lo.abs().max(worst.hi.abs()).max(f64::MIN_POSITIVE);
        if worst.roundoff || width <= 1e-13 * scale || mid == worst.lo || mid == worst.hi {
            frozen.push(worst);
            continue;
        }
        if heap.len() + frozen.len() + 2 > max_panels {
            heap.push(worst);
            let (value, error, _) = totals(&heap, &frozen);
            return Err(Error::QuadratureFailure {
                value,
                abs_error: error,
                evaluations,
            });
        }
        heap.push(gauss_kronrod(&mut f, worst.piece, worst.lo, mid));
        heap.push(gauss_kronrod(&mut f, worst.piece, mid, worst.hi));
        evaluations += 42;
    }
}

/// Complex-valued integrand on a single interval.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_pieces(|_, t| f(t), &[(lo, hi)], tol, DEFAULT_MAX_PANELS)
}

/// Real-valued integrand on a single interval; returns `(value, error estimate)`.
pub fn integrate_real<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate(|t| Complex64::new(f(t), 0.0), lo, hi, tol)?;
    Ok((r.value.re, r.abs_error_estimate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let (v, _) =
            integrate_real(|x| 3.0 * x * x + 1.0, 0.0, 2.0, Tolerance::mixed(1e-14)).unwrap();
        assert!((v - 10.0).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_refines() {
        // ∫_{-1}^{1} dx/(x² + 1e-4) = 2·100·atan(100)
        let (v, e) = integrate_real(
            |x| 1.0 / (x * x + 1e-4),
            -1.0,
            1.0,
            Tolerance::new(0.0, 1e-12),
        )
        .unwrap();
        let exact = 200.0 * 100f64.atan();
        assert!((v - exact).abs() < 1e-10 * exact, "{v} vs {exact}");
        assert!(e <= 1e-12 * exact);
    }

    #[test]
    fn pieces_are_summed() {
        let r = integrate_pieces(
            |i, t| Complex64::new(if i == 0 { 1.0 } else { t }, 0.0),
            &[(0.0, 1.0), (0.0, 2.0)],
            Tolerance::mixed(1e-13),
            100,
        )
        .unwrap();
        assert!((r.value.re - 3.0).abs() < 1e-14);
        assert!(r.evaluations > 0);
    }

    #[test]
    fn divergent_integrand_fails() {
        let err = integrate_real(|x| 1.0 / x, 0.0, 1.0, Tolerance::mixed(1e-12)).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }
}
