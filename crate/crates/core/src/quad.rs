//! Adaptive Gauss–Kronrod quadrature, log-panel radial integration and a
//! few scalar root finders used throughout the crate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{LevyError, Result};

/// Absolute / relative tolerance pair for quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
        }
    }
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn tight() -> Self {
        Tolerance::new(1e-14, 1e-12)
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn norm(self) -> f64;

    fn finite(self) -> bool {
        self.norm().is_finite()
    }
}

impl QuadValue for f64 {
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn norm(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod rule with embedded 7-point Gauss error estimate.
fn gk15<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> (V, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv = [V::default(); 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).norm() + (fv[2 * j + 1] - mean).norm());
    }
    asc *= half.abs();
    let result = kronrod * half;
    let mut err = ((kronrod - gauss) * half).norm();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let res_abs = result.norm();
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

const MAX_SEGMENTS: usize = 4000;

/// Global adaptive Gauss–Kronrod integration of `f` over `[a, b]`, starting
/// from `initial` equal-width pieces.
pub fn adaptive<V: QuadValue, F: Fn(f64) -> V>(
    f: &F,
    a: f64,
    b: f64,
    initial: usize,
    tol: Tolerance,
) -> Result<(V, f64)> {
    if a == b {
        return Ok((V::default(), 0.0));
    }
    let pieces = initial.max(1);
    let width = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(pieces * 4);
    let mut total = V::default();
    let mut total_err = 0.0;
    for k in 0..pieces {
        let lo = a + width * k as f64;
        let hi = if k + 1 == pieces { b } else { lo + width };
        let (value, err) = gk15(f, lo, hi);
        total = total + value;
        total_err += err;
        heap.push(Segment {
            a: lo,
            b: hi,
            value,
            err,
        });
    }
    if !total.finite() {
        return Err(LevyError::Divergent(format!(
            "non-finite integrand on [{a:e}, {b:e}]"
        )));
    }
    let mut count = heap.len();
    while total_err > tol.target(total.norm()) {
        if count >= MAX_SEGMENTS {
            return Err(LevyError::Quadrature {
                estimate: total.norm(),
                achieved: total_err,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a).abs() <= 1e-13 * worst.a.abs().max(worst.b.abs()).max(1e-300) {
            // cannot split further; accept the remaining error
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.err;
        if !total.finite() {
            return Err(LevyError::Divergent(format!(
                "non-finite integrand near {mid:e}"
            )));
        }
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        count += 1;
    }
    // re-sum to limit accumulated cancellation in the running total
    let mut sum = V::default();
    let mut err = 0.0;
    for s in heap.iter() {
        sum = sum + s.value;
        err += s.err;
    }
    if err > 10.0 * tol.target(sum.norm()) {
        return Err(LevyError::Quadrature {
            estimate: sum.norm(),
            achieved: err,
        });
    }
    Ok((sum, err))
}

/// Integrate over a finite interval.
pub fn integrate<V: QuadValue, F: Fn(f64) -> V>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<V> {
    adaptive(&f, a, b, 1, tol).map(|(v, _)| v)
}

const LN10: f64 = std::f64::consts::LN_10;
const MAX_DECADES: usize = 330;

/// Integrate `f(r) dr` over `(lo, hi)` with `0 <= lo < hi <= inf`, working
/// in `y = ln r` on decade panels. Infinite ends are handled by marching
/// decades outward until the panel contributions become negligible.
/// `scale` locates the bulk of the integrand when `lo = 0` and `hi = inf`.
pub fn integrate_radial<V: QuadValue, F: Fn(f64) -> V>(
    f: F,
    lo: f64,
    hi: f64,
    scale: f64,
    tol: Tolerance,
) -> Result<V> {
    if !(lo >= 0.0 && hi > lo) {
        if hi == lo {
            return Ok(V::default());
        }
        return Err(crate::error::invalid("annulus", format!("need 0 <= lo < hi, got ({lo}, {hi})")));
    }
    let g = |y: f64| {
        let r = y.exp();
        f(r) * r
    };
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let core_lo = if lo > 0.0 {
        lo
    } else if hi.is_finite() {
        (hi * 1e-3).min(scale)
    } else {
        scale * 1e-3
    };
    let core_hi = if hi.is_finite() {
        hi
    } else {
        (scale * 1e3).max(core_lo * 1e3)
    };
    let (ylo, yhi) = (core_lo.ln(), core_hi.ln());
    let decades = ((yhi - ylo) / LN10).ceil().clamp(1.0, 400.0) as usize;
    let (mut total, _) = adaptive(&g, ylo, yhi, decades, tol)?;

    let march = |start: f64, step: f64, total: &mut V| -> Result<()> {
        let mut y = start;
        let mut small_run = 0;
        let mut first_norm = None;
        let mut last_norm = 0.0;
        for _ in 0..MAX_DECADES {
            let y_next = y + step;
            if y_next.abs() > 700.0 {
                break;
            }
            let local_tol = Tolerance::new(0.1 * tol.target(total.norm()), tol.rel);
            let (panel, _) = adaptive(&g, y.min(y_next), y.max(y_next), 1, local_tol)?;
            if !panel.finite() {
                return Err(LevyError::Divergent(format!(
                    "non-finite contribution near r = {:e}",
                    y_next.exp()
                )));
            }
            *total = *total + panel;
            let n = panel.norm();
            first_norm.get_or_insert(n);
            last_norm = n;
            if n <= 1e-3 * tol.target(total.norm()) {
                small_run += 1;
                if small_run >= 2 {
                    return Ok(());
                }
            } else {
                small_run = 0;
            }
            y = y_next;
        }
        let first = first_norm.unwrap_or(0.0);
        if last_norm >= 0.5 * first && first > 0.0 {
            Err(LevyError::Divergent(format!(
                "contributions do not decay toward r = {:e}",
                y.exp()
            )))
        } else {
            Err(LevyError::Quadrature {
                estimate: total.norm(),
                achieved: last_norm,
            })
        }
    };
    if !hi.is_finite() {
        march(yhi, LN10, &mut total)?;
    }
    if lo == 0.0 {
        march(ylo, -LN10, &mut total)?;
    }
    Ok(total)
}

/// `∫_a^hi f(r) dr` for an integrand oscillating with angular frequency
/// `omega` (e.g. `h(r) e^{i omega r}`). Half-period panels are summed and,
/// for an infinite upper limit, the partial sums are accelerated with Wynn's
/// epsilon algorithm.
pub fn integrate_oscillatory<F: Fn(f64) -> Complex64>(
    f: F,
    omega: f64,
    a: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<Complex64> {
    if hi <= a {
        return Ok(Complex64::default());
    }
    let width = std::f64::consts::PI / omega.abs().max(1e-300);
    let mut partial = Complex64::default();
    let mut sums: Vec<Complex64> = Vec::new();
    let mut last_extrap: Option<Complex64> = None;
    let mut stable_run = 0;
    let mut small_run = 0;
    let max_panels = if hi.is_finite() { 5_000_000 } else { 20_000 };
    let mut x = a;
    for k in 0..max_panels {
        let x_next = (x + width).min(hi);
        let local = Tolerance::new(0.01 * tol.abs.max(tol.rel * partial.norm()), tol.rel);
        let (panel, _) = adaptive(&f, x, x_next, 1, local)?;
        partial += panel;
        x = x_next;
        if x >= hi {
            return Ok(partial);
        }
        if panel.norm() <= 1e-3 * tol.target(partial.norm()) {
            small_run += 1;
            if small_run >= 3 {
                return Ok(partial);
            }
        } else {
            small_run = 0;
        }
        if hi.is_finite() {
            continue;
        }
        sums.push(partial);
        if sums.len() > 60 {
            sums.remove(0);
        }
        if k >= 8 {
            let est = wynn_epsilon(&sums);
            if let Some(prev) = last_extrap {
                if (est - prev).norm() <= 0.1 * tol.target(est.norm()) {
                    stable_run += 1;
                    if stable_run >= 3 {
                        return Ok(est);
                    }
                } else {
                    stable_run = 0;
                }
            }
            last_extrap = Some(est);
        }
    }
    Err(LevyError::Quadrature {
        estimate: partial.norm(),
        achieved: last_extrap.map(|e| (e - partial).norm()).unwrap_or(f64::INFINITY),
    })
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
pub fn wynn_epsilon(sums: &[Complex64]) -> Complex64 {
    let n = sums.len();
    if n < 3 {
        return *sums.last().unwrap_or(&Complex64::default());
    }
    // eps[k] holds column k of the epsilon table
    let mut prev: Vec<Complex64> = vec![Complex64::default(); n + 1];
    let mut cur: Vec<Complex64> = sums.to_vec();
    let mut best = *sums.last().unwrap();
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let inv = if diff.norm() < 1e-300 {
                Complex64::new(1e300, 0.0)
            } else {
                diff.inv()
            };
            next.push(prev[i + 1] + inv);
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 {
            if let Some(v) = cur.last() {
                if v.norm().is_finite() && v.norm() < 1e200 {
                    best = *v;
                }
            }
        }
    }
    best
}

/// Brent's method for a sign-changing bracket `[a, b]`.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(LevyError::RootFinding(format!(
            "no sign change on [{a:e}, {b:e}] ({fa:e}, {fb:e})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(LevyError::RootFinding("Brent iteration limit".into()))
}

/// Solve `g(r) = target` for a nonincreasing `g` on `(0, inf)`, searching
/// geometrically from `guess`. Works in `ln r`.
pub fn solve_decreasing<F: Fn(f64) -> f64>(g: F, target: f64, guess: f64) -> Result<f64> {
    let h = |y: f64| g(y.exp()) - target;
    let mut y0 = guess.max(1e-300).ln();
    let mut y1 = y0;
    let mut step = 1.0;
    let h0 = h(y0);
    if h0 == 0.0 {
        return Ok(guess);
    }
    // g decreasing: h > 0 means r is too small
    let dir = if h0 > 0.0 { 1.0 } else { -1.0 };
    for _ in 0..200 {
        y1 = y0 + dir * step;
        let h1 = h(y1);
        if h1 == 0.0 {
            return Ok(y1.exp());
        }
        if h1.signum() != h0.signum() && h1.is_finite() {
            break;
        }
        y0 = y1;
        step *= 1.6;
        if y1.abs() > 690.0 {
            return Err(LevyError::RootFinding(format!(
                "could not bracket level {target:e}"
            )));
        }
    }
    let (a, b) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
    brent(h, a, b, 1e-14, 300).map(f64::exp)
}
