//! One-dimensional radial measures.
//!
//! Every supported Lévy or Rosiński measure is a finite sum of
//! `weight · (law along a fixed direction u)`, so all evaluation primitives
//! reduce to operations on a radial measure `ν` on `(0, ∞)`:
//! `M(A) = Σ_j w_j ν_j({r : r u_j ∈ A})`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{LevyError, Result};
use crate::geometry::Direction;
use crate::quad::{integrate_oscillatory, integrate_radial, QuadValue, Tolerance};
use crate::specfun::{
    g_tail, g_tail_inverse, k_const, ln_tempered_tail, tempered_window, TemperingParams,
};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A radial measure on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialPart {
    /// Unit point mass at `r`.
    Point { r: f64 },
    /// Density `coef · (r/anchor)^{-1-eta}` on `(lo, hi)`.
    Power {
        coef: f64,
        eta: f64,
        lo: f64,
        hi: f64,
        anchor: f64,
    },
    /// Image of `t^{-1-α} e^{-t^p} dt` under `t ↦ rho·t`.
    TemperedPoint { rho: f64, params: TemperingParams },
    /// Tempering of a `Power` density:
    /// `∫ coef (s/anchor)^{-1-eta} 1_{(lo,hi)}(s) [image of the kernel under t ↦ s t] ds`.
    TemperedPower {
        coef: f64,
        eta: f64,
        lo: f64,
        hi: f64,
        anchor: f64,
        params: TemperingParams,
    },
}

/// `∫_{x1}^{x2} x^k dx` with infinite values for divergent ends.
pub(crate) fn power_integral(k: f64, x1: f64, x2: f64) -> f64 {
    if !(x2 > x1) {
        return 0.0;
    }
    if k == -1.0 {
        if x1 == 0.0 || x2.is_infinite() {
            return f64::INFINITY;
        }
        return (x2 / x1).ln();
    }
    let e = k + 1.0;
    if x2.is_infinite() && e >= 0.0 {
        return f64::INFINITY;
    }
    if x1 == 0.0 && e <= 0.0 {
        return f64::INFINITY;
    }
    let upper = if x2.is_infinite() { 0.0 } else { x2.powf(e) };
    let lower = if x1 == 0.0 { 0.0 } else { x1.powf(e) };
    (upper - lower) / e
}

/// `ψ(c) = ∫_0^∞ (e^{icr} - 1 - icr/(1+r²)) r^{-1-η} dr`, closed form.
pub fn stable_radial_exponent(eta: f64, c: f64) -> Complex64 {
    if c == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let ac = c.abs();
    if (eta - 1.0).abs() < 1e-12 {
        let re = -ac * std::f64::consts::FRAC_PI_2;
        let im = c * (1.0 - EULER_GAMMA) - c * ac.ln();
        return Complex64::new(re, im);
    }
    let g = crate::specfun::gamma(1.0 - eta) / eta;
    let half = std::f64::consts::FRAC_PI_2 * eta;
    let pow = ac.powf(eta);
    let re = -pow * g * half.cos();
    let im = c.signum() * pow * g * half.sin() - c * std::f64::consts::FRAC_PI_2 / half.cos();
    Complex64::new(re, im)
}

/// `e^{icr} - 1 - icr/(1+r²)` evaluated without cancellation for small `cr`.
fn levy_khintchine_kernel(c: f64, r: f64) -> Complex64 {
    let x = c * r;
    let half = 0.5 * x;
    let re = -2.0 * half.sin() * half.sin();
    let sin_minus = if x.abs() < 1e-2 {
        let x2 = x * x;
        -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() - x
    };
    let r2 = r * r;
    let im = sin_minus + x * r2 / (1.0 + r2);
    Complex64::new(re, im)
}

impl RadialPart {
    pub fn power(eta: f64, lo: f64, hi: f64) -> Self {
        RadialPart::Power {
            coef: 1.0,
            eta,
            lo,
            hi,
            anchor: 1.0,
        }
    }

    pub fn is_tempered(&self) -> bool {
        matches!(
            self,
            RadialPart::TemperedPoint { .. } | RadialPart::TemperedPower { .. }
        )
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            RadialPart::Point { r } => (r, r),
            RadialPart::Power { lo, hi, .. } => (lo, hi),
            _ => (0.0, f64::INFINITY),
        }
    }

    fn scale_hint(&self) -> f64 {
        match *self {
            RadialPart::Point { r } => r,
            RadialPart::Power { lo, hi, anchor, .. } => {
                if lo > 0.0 && hi.is_finite() {
                    (lo * hi).sqrt()
                } else if lo > 0.0 {
                    lo
                } else if hi.is_finite() {
                    hi
                } else {
                    anchor
                }
            }
            RadialPart::TemperedPoint { rho, .. } => rho,
            RadialPart::TemperedPower { lo, hi, anchor, .. } => {
                if lo > 0.0 && hi.is_finite() {
                    (lo * hi).sqrt()
                } else if lo > 0.0 {
                    lo
                } else if hi.is_finite() {
                    hi
                } else {
                    anchor
                }
            }
        }
    }

    /// Density with respect to `dr`; zero for point masses.
    pub fn density(&self, r: f64) -> f64 {
        match *self {
            RadialPart::Point { .. } => 0.0,
            RadialPart::Power {
                coef,
                eta,
                lo,
                hi,
                anchor,
            } => {
                if r > lo && r < hi {
                    coef * (r / anchor).powf(-1.0 - eta)
                } else {
                    0.0
                }
            }
            RadialPart::TemperedPoint { rho, params } => {
                let x = r / rho;
                ((-1.0 - params.alpha) * x.ln() - x.powf(params.p)).exp() / rho
            }
            RadialPart::TemperedPower {
                coef,
                eta,
                lo,
                hi,
                anchor,
                params,
            } => {
                if r <= 0.0 {
                    return 0.0;
                }
                let u1 = if hi.is_infinite() { 0.0 } else { r / hi };
                let u2 = if lo == 0.0 { f64::INFINITY } else { r / lo };
                let w = tempered_window(params.alpha - eta, params.p, u1, u2);
                coef * (r / anchor).powf(-1.0 - eta) * w
            }
        }
    }

    /// `ν((r, ∞))`; `+inf` when infinite.
    pub fn tail(&self, r: f64) -> Result<f64> {
        match *self {
            RadialPart::Point { r: rho } => Ok(if rho > r { 1.0 } else { 0.0 }),
            RadialPart::Power {
                coef,
                eta,
                lo,
                hi,
                anchor,
            } => {
                let a = r.max(lo);
                if a >= hi {
                    return Ok(0.0);
                }
                Ok(coef * anchor * power_integral(-1.0 - eta, a / anchor, hi / anchor))
            }
            RadialPart::TemperedPoint { rho, params } => Ok(g_tail(r / rho, &params)),
            RadialPart::TemperedPower {
                coef,
                eta,
                lo,
                hi,
                anchor,
                params,
            } => {
                if lo == 0.0 && hi.is_infinite() {
                    let k = k_const(eta, &params)?;
                    return Ok(coef * anchor.powf(1.0 + eta) * k * power_integral(-1.0 - eta, r, f64::INFINITY));
                }
                if r == 0.0 {
                    let c = g_tail(0.0, &params);
                    if c.is_infinite() {
                        return Ok(f64::INFINITY);
                    }
                    return Ok(c * coef * anchor * power_integral(-1.0 - eta, lo / anchor, hi / anchor));
                }
                let f = |s: f64| coef * (s / anchor).powf(-1.0 - eta) * g_tail(r / s, &params);
                integrate_radial(f, lo, hi, r.max(lo).min(if hi.is_finite() { hi } else { f64::MAX }), Tolerance::new(1e-300, 1e-11))
            }
        }
    }

    /// `∫_{a < r <= b} r^m ν(dr)`; `+inf` when divergent.
    pub fn moment(&self, m: f64, a: f64, b: f64) -> Result<f64> {
        if !(b > a) {
            return Ok(0.0);
        }
        match *self {
            RadialPart::Point { r } => Ok(if r > a && r <= b { r.powf(m) } else { 0.0 }),
            RadialPart::Power {
                coef,
                eta,
                lo,
                hi,
                anchor,
            } => {
                let a = a.max(lo);
                let b = b.min(hi);
                if a >= b {
                    return Ok(0.0);
                }
                Ok(coef * anchor.powf(1.0 + m) * power_integral(m - 1.0 - eta, a / anchor, b / anchor))
            }
            RadialPart::TemperedPoint { rho, params } => {
                let v = tempered_window(params.alpha - m, params.p, a / rho, b / rho);
                Ok(rho.powf(m) * v)
            }
            RadialPart::TemperedPower {
                eta, lo, hi, params, ..
            } => {
                if a == 0.0 {
                    let e0 = if lo == 0.0 { eta.min(params.alpha) } else { params.alpha };
                    if m <= e0 {
                        return Ok(f64::INFINITY);
                    }
                }
                if b.is_infinite() && hi.is_infinite() && (m >= eta || eta <= params.alpha) {
                    return Ok(f64::INFINITY);
                }
                let scale = self.scale_hint();
                integrate_radial(
                    |r: f64| r.powf(m) * self.density(r),
                    a,
                    b,
                    scale,
                    Tolerance::new(1e-300, 1e-10),
                )
            }
        }
    }

    /// `∫_{a < r < b} g(r) ν(dr)`.
    pub fn integrate<V: QuadValue, G: Fn(f64) -> V>(&self, g: G, a: f64, b: f64, tol: Tolerance) -> Result<V> {
        match *self {
            RadialPart::Point { r } => Ok(if r > a && r < b { g(r) } else { V::default() }),
            _ => {
                let (lo, hi) = self.support();
                let (a, b) = (a.max(lo), b.min(hi));
                if a >= b {
                    return Ok(V::default());
                }
                integrate_radial(|r| g(r) * self.density(r), a, b, self.scale_hint(), tol)
            }
        }
    }

    /// `ψ(c) = ∫ (e^{icr} - 1 - icr/(1+r²)) ν(dr)`.
    pub fn char_exponent(&self, c: f64, tol: Tolerance) -> Result<Complex64> {
        if c == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        match *self {
            RadialPart::Point { r } => Ok(levy_khintchine_kernel(c, r)),
            RadialPart::Power {
                coef,
                eta,
                lo,
                hi,
                anchor,
            } if lo == 0.0 && hi.is_infinite() && eta > 0.0 && eta < 2.0 => {
                Ok(stable_radial_exponent(eta, c) * (coef * anchor.powf(1.0 + eta)))
            }
            RadialPart::TemperedPower {
                coef,
                eta,
                lo,
                hi,
                anchor,
                params,
            } if lo == 0.0 && hi.is_infinite() => {
                let k = k_const(eta, &params)?;
                Ok(stable_radial_exponent(eta, c) * (coef * anchor.powf(1.0 + eta) * k))
            }
            _ => self.char_exponent_quadrature(c, tol),
        }
    }

    fn char_exponent_quadrature(&self, c: f64, tol: Tolerance) -> Result<Complex64> {
        let (lo, hi) = self.support();
        let split = (4.0 * std::f64::consts::PI / c.abs()).clamp(lo, hi);
        let near = if split > lo {
            integrate_radial(
                |r: f64| levy_khintchine_kernel(c, r) * self.density(r),
                lo,
                split,
                self.scale_hint().min(split),
                tol,
            )?
        } else {
            Complex64::default()
        };
        if split >= hi {
            return Ok(near);
        }
        let osc = integrate_oscillatory(
            |r: f64| Complex64::from_polar(self.density(r), c * r),
            c,
            split,
            hi,
            tol,
        )?;
        let mass = integrate_radial(|r: f64| self.density(r), split, hi, split, tol)?;
        let comp = integrate_radial(|r: f64| r / (1.0 + r * r) * self.density(r), split, hi, split, tol)?;
        Ok(near + osc - Complex64::new(mass, c * comp))
    }

    /// β-inversion `x ↦ x/|x|²` with weight `|x|^{2+β}`; returns the image
    /// part and the factor applied to the component weight.
    pub fn beta_invert(&self, beta: f64) -> Result<(RadialPart, f64)> {
        match *self {
            RadialPart::Point { r } => Ok((RadialPart::Point { r: 1.0 / r }, r.powf(2.0 + beta))),
            RadialPart::Power {
                coef,
                eta,
                lo,
                hi,
                anchor,
            } => Ok((
                RadialPart::Power {
                    coef: coef * anchor.powf(4.0 + beta),
                    eta: 2.0 + beta - eta,
                    lo: if hi.is_infinite() { 0.0 } else { 1.0 / hi },
                    hi: if lo == 0.0 { f64::INFINITY } else { 1.0 / lo },
                    anchor: 1.0 / anchor,
                },
                1.0,
            )),
            _ => Err(LevyError::Unsupported(
                "tempered-stable Lévy measures are inverted at the Rosiński level (rosinski_inversion), or flattened to a polar table first".into(),
            )),
        }
    }

    /// Log-inversion weight `|x|²(1+|ln|x||)^{κ(|x|)}`, point masses only.
    pub fn log_invert(&self) -> Result<(RadialPart, f64)> {
        match *self {
            RadialPart::Point { r } => {
                let l = 1.0 + r.ln().abs();
                let factor = if r >= 1.0 { r * r * l } else { r * r / l };
                Ok((RadialPart::Point { r: 1.0 / r }, factor))
            }
            _ => Err(LevyError::Unsupported(
                "the log-inversion is implemented for atomic Rosiński measures".into(),
            )),
        }
    }

    /// Prepare a sampler for `ν` restricted to `(eps, ∞)`.
    pub fn sampler(&self, eps: f64) -> Result<RadialSampler> {
        let rate = self.tail(eps)?;
        if !rate.is_finite() {
            return Err(LevyError::Divergent(format!(
                "infinite jump rate above eps = {eps:e}"
            )));
        }
        let kind = match *self {
            RadialPart::TemperedPower {
                coef,
                eta,
                lo,
                hi,
                anchor,
                params,
            } if rate > 0.0 => {
                let scales = ScaleTable::build(coef, eta, lo, hi, anchor, params, eps)?;
                let s_max = scales.ln_s.last().unwrap().exp();
                let g = GTable::build(params, eps / s_max)?;
                SamplerKind::Table(scales, g)
            }
            RadialPart::TemperedPoint { rho, params } if rate > 0.0 => {
                SamplerKind::Inverse(GTable::build(params, eps / rho)?)
            }
            _ => SamplerKind::Direct,
        };
        Ok(RadialSampler {
            part: self.clone(),
            eps,
            rate,
            kind,
        })
    }
}

/// Inverse-transform sampler for the jump radius above a cutoff.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    part: RadialPart,
    eps: f64,
    rate: f64,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Direct,
    Inverse(GTable),
    Table(ScaleTable, GTable),
}

impl RadialSampler {
    /// `ν((eps, ∞))`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // u in (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        match (&self.part, &self.kind) {
            (RadialPart::Point { r }, _) => *r,
            (
                RadialPart::Power {
                    coef,
                    eta,
                    lo,
                    hi,
                    anchor,
                },
                _,
            ) => {
                let a = self.eps.max(*lo);
                let mass = u * self.rate / (coef * anchor);
                let top = hi / anchor;
                let x = if *eta == 0.0 {
                    top * (-mass).exp()
                } else {
                    let top_term = if top.is_infinite() { 0.0 } else { top.powf(-eta) };
                    (top_term + eta * mass).powf(-1.0 / eta)
                };
                (x * anchor).clamp(a, *hi)
            }
            (RadialPart::TemperedPoint { rho, .. }, SamplerKind::Inverse(g)) => {
                rho * g.inverse(u.ln() + self.rate.ln()).unwrap_or(self.eps / rho)
            }
            (RadialPart::TemperedPower { .. }, SamplerKind::Table(table, g)) => {
                let s = table.sample(rng);
                let top = g.ln_g((self.eps / s).ln());
                let v: f64 = 1.0 - rng.random::<f64>();
                s * g.inverse(v.ln() + top).unwrap_or(self.eps / s)
            }
            _ => self.eps,
        }
    }
}

/// `ln G_{α,p}` on a grid in `ln u` from `u_min` to where `e^{-u^p}` is
/// negligible, with cubic Hermite interpolation of `ln G` and of its inverse
/// using the exact slopes. Outside the grid, and on nearly flat segments
/// where the inverse is ill-conditioned, the exact functions are used.
#[derive(Debug, Clone)]
struct GTable {
    params: TemperingParams,
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl GTable {
    const PER_DECADE: f64 = 64.0;
    const FLAT: f64 = 1e-3;

    fn build(params: TemperingParams, u_min: f64) -> Result<Self> {
        let top = 60f64.powf(1.0 / params.p).ln();
        let bottom = u_min.ln().min(top - 1.0);
        // the curvature of ln G in ln u grows like p near the top of the grid
        let h = std::f64::consts::LN_10 / (Self::PER_DECADE * params.p.max(1.0));
        let count = ((top - bottom) / h).ceil() as usize + 1;
        let (alpha, p) = (params.alpha, params.p);
        let mut x = Vec::with_capacity(count);
        let mut y = Vec::with_capacity(count);
        let mut dy = Vec::with_capacity(count);
        for i in 0..count {
            let xi = (bottom + h * i as f64).min(top);
            let yi = ln_tempered_tail(alpha, p, xi.exp());
            if !yi.is_finite() {
                return Err(LevyError::Divergent(format!("tempered tail at u = {:e}", xi.exp())));
            }
            x.push(xi);
            y.push(yi);
            // d ln G / d ln u = -u^{-α} e^{-u^p} / G(u)
            dy.push(-(-alpha * xi - (p * xi).exp() - yi).exp());
        }
        Ok(GTable { params, x, y, dy })
    }

    fn ln_g(&self, x: f64) -> f64 {
        let n = self.x.len();
        if !(x >= self.x[0] && x <= self.x[n - 1]) {
            return ln_tempered_tail(self.params.alpha, self.params.p, x.exp());
        }
        let k = self.x.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        hermite(x, self.x[k], self.x[k + 1], self.y[k], self.y[k + 1], self.dy[k], self.dy[k + 1])
    }

    /// `u` with `ln G(u) = y`.
    fn inverse(&self, y: f64) -> Result<f64> {
        let n = self.y.len();
        if y <= self.y[0] && y >= self.y[n - 1] {
            let k = self.y.partition_point(|&v| v > y).clamp(1, n - 1) - 1;
            let (d0, d1) = (self.dy[k], self.dy[k + 1]);
            if d0.abs() > Self::FLAT && d1.abs() > Self::FLAT {
                let x = hermite(y, self.y[k], self.y[k + 1], self.x[k], self.x[k + 1], 1.0 / d0, 1.0 / d1);
                return Ok(x.clamp(self.x[k], self.x[k + 1]).exp());
            }
        }
        g_tail_inverse(y.exp(), &self.params)
    }
}

/// Cubic Hermite interpolant through `(a, fa)` and `(b, fb)` with slopes
/// `da` and `db`.
fn hermite(x: f64, a: f64, b: f64, fa: f64, fb: f64, da: f64, db: f64) -> f64 {
    let h = b - a;
    if h == 0.0 {
        return fa;
    }
    let s = (x - a) / h;
    let (s2, s3) = (s * s, s * s * s);
    (2.0 * s3 - 3.0 * s2 + 1.0) * fa
        + (s3 - 2.0 * s2 + s) * h * da
        + (-2.0 * s3 + 3.0 * s2) * fb
        + (s3 - s2) * h * db
}

/// Tabulated distribution of the Rosiński radius `s` of a jump exceeding
/// `eps`: density `∝ coef (s/anchor)^{-1-η} G(eps/s)`, piecewise linear in
/// `ln s` on a grid of 64 points per decade.
#[derive(Debug, Clone)]
struct ScaleTable {
    ln_s: Vec<f64>,
    cdf: Vec<f64>,
}

impl ScaleTable {
    fn build(
        coef: f64,
        eta: f64,
        lo: f64,
        hi: f64,
        anchor: f64,
        params: TemperingParams,
        eps: f64,
    ) -> Result<Self> {
        let q = |s: f64| coef * (s / anchor).powf(-1.0 - eta) * g_tail(eps / s, &params) * s;
        let cut = 60f64.powf(1.0 / params.p);
        let s_min = lo.max(eps / cut);
        let per_decade = 64.0;
        let step = std::f64::consts::LN_10 / per_decade;
        let mut ln_s = vec![s_min.ln()];
        let mut vals = vec![q(s_min)];
        let mut cdf = vec![0.0];
        let s_hi_cap = if hi.is_finite() { hi } else { s_min * 1e60 };
        loop {
            let last = *ln_s.last().unwrap();
            let next = (last + step).min(s_hi_cap.ln());
            let v = q(next.exp());
            let area = 0.5 * (vals.last().unwrap() + v) * (next - last);
            let total = cdf.last().unwrap() + area;
            ln_s.push(next);
            vals.push(v);
            cdf.push(total);
            if next >= s_hi_cap.ln() {
                break;
            }
            if hi.is_infinite() && next - s_min.ln() > 2.0 * std::f64::consts::LN_10 && area < 1e-12 * total {
                break;
            }
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) || !total.is_finite() {
            return Err(LevyError::Divergent("empty or infinite jump-scale table".into()));
        }
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(ScaleTable { ln_s, cdf })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        (self.ln_s[k - 1] + frac * (self.ln_s[k] - self.ln_s[k - 1])).exp()
    }
}

/// One directional term `weight · ν(r) along u` of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialComponent {
    pub direction: Direction,
    pub weight: f64,
    pub part: RadialPart,
}
