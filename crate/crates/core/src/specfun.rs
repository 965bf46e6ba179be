//! Special functions for p-tempered α-stable calculus: the normalizing
//! constant `K_{η,α,p}`, the tail function `G_{α,p}` and its inverse.
//!
//! Everything reduces to the upper incomplete gamma function with a real
//! (possibly negative) index: substituting `y = x^p` gives
//!
//! ```text
//! G_{α,p}(u) = ∫_u^∞ x^{-1-α} e^{-x^p} dx = Γ(-α/p, u^p) / p
//! K_{η,α,p}  = ∫_0^∞ t^{η-α-1} e^{-t^p} dt = Γ((η-α)/p) / p
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LevyError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

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

/// Gamma function (Lanczos approximation, reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        if x == x.floor() {
            return f64::NAN;
        }
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else if x > 171.6 {
        f64::INFINITY
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return gamma(x).abs().ln();
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Lower incomplete gamma `γ(s, x)` by its power series, `s > 0`.
fn lower_gamma_series(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut a = s;
    for _ in 0..10_000 {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (s * x.ln() - x).exp()
}

/// `ln Γ(s, x)` by the continued fraction (modified Lentz); any real `s`,
/// converges quickly for `x >= 1`.
fn ln_upper_gamma_cf(s: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    -x + s * x.ln() + h.ln()
}

/// Exponential integral `E_1(x) = Γ(0, x)` for `0 < x < 1` by series.
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Upper incomplete gamma `Γ(s, x) = ∫_x^∞ y^{s-1} e^{-y} dy` for any real
/// `s` and `x >= 0`. Returns `+inf` for `x = 0, s <= 0`.
pub fn upper_gamma(s: f64, x: f64) -> f64 {
    if x < 0.0 || x.is_nan() || s.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        return if s > 0.0 { gamma(s) } else { f64::INFINITY };
    }
    if x.is_infinite() {
        return 0.0;
    }
    if s > 0.0 && x < s + 1.0 {
        return gamma(s) - lower_gamma_series(s, x);
    }
    if x >= 1.0 {
        return ln_upper_gamma_cf(s, x).exp();
    }
    // s <= 0, x < 1: recur upward from an index in [0, 1)
    let n = (-s).ceil();
    let base = s + n;
    let mut value = if base == 0.0 {
        e1_series(x)
    } else {
        gamma(base) - lower_gamma_series(base, x)
    };
    let lnx = x.ln();
    let mut k = n as i64 - 1;
    while k >= 0 {
        let a = s + k as f64;
        value = (value - (a * lnx - x).exp()) / a;
        k -= 1;
    }
    value
}

/// `ln Γ(s, x)`, accurate also where `Γ(s, x)` underflows.
pub fn ln_upper_gamma(s: f64, x: f64) -> f64 {
    if x >= 1.0 && !(s > 0.0 && x < s + 1.0) {
        ln_upper_gamma_cf(s, x)
    } else {
        upper_gamma(s, x).ln()
    }
}

/// Fixed tempering parameters `p > 0`, `α ∈ (-∞, 2) \ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperingParams {
    pub p: f64,
    pub alpha: f64,
}

impl TemperingParams {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(invalid("p", format!("must be positive, got {p}")));
        }
        if !(alpha < 2.0) || alpha == 0.0 || !alpha.is_finite() {
            return Err(invalid("alpha", format!("must lie in (-inf, 2) \\ {{0}}, got {alpha}")));
        }
        Ok(TemperingParams { p, alpha })
    }

    /// `γ = α ∨ 0`, the moment order required of Rosiński measures.
    pub fn gamma(&self) -> f64 {
        self.alpha.max(0.0)
    }
}

/// `K_{η,α,p} = ∫_0^∞ t^{η-α-1} e^{-t^p} dt = Γ((η-α)/p)/p`.
pub fn k_const(eta: f64, params: &TemperingParams) -> Result<f64> {
    let s = (eta - params.alpha) / params.p;
    if !(s > 0.0) {
        return Err(LevyError::Divergent(format!(
            "K_{{{eta},{},{}}} diverges: need eta > alpha",
            params.alpha, params.p
        )));
    }
    if s > 171.0 {
        return Ok((ln_gamma(s) - params.p.ln()).exp());
    }
    Ok(gamma(s) / params.p)
}

/// `∫_u^∞ x^{-1-a} e^{-x^p} dx` for any real `a` (the tail function with a
/// shifted index). `+inf` when `u = 0` and `a >= 0`.
pub fn tempered_tail(a: f64, p: f64, u: f64) -> f64 {
    if u.is_infinite() {
        return 0.0;
    }
    let s = -a / p;
    if u == 0.0 {
        return if s > 0.0 { gamma(s) / p } else { f64::INFINITY };
    }
    upper_gamma(s, u.powf(p)) / p
}

/// `ln ∫_u^∞ x^{-1-a} e^{-x^p} dx`, for `u > 0`.
pub fn ln_tempered_tail(a: f64, p: f64, u: f64) -> f64 {
    ln_upper_gamma(-a / p, u.powf(p)) - p.ln()
}

/// `∫_{u1}^{u2} x^{-1-a} e^{-x^p} dx` for `0 <= u1 <= u2 <= inf`, avoiding
/// cancellation on narrow intervals.
pub fn tempered_window(a: f64, p: f64, u1: f64, u2: f64) -> f64 {
    if !(u2 > u1) {
        return 0.0;
    }
    if u1 > 0.0 && u2.is_finite() && u2 < 2.0 * u1 {
        let f = |x: f64| (-(1.0 + a) * x.ln() - x.powf(p)).exp();
        if let Ok(v) = crate::quad::integrate(f, u1, u2, crate::quad::Tolerance::new(0.0, 1e-14)) {
            return v;
        }
    }
    tempered_tail(a, p, u1) - tempered_tail(a, p, u2)
}

/// `G_{α,p}(u) = ∫_u^∞ x^{-1-α} e^{-x^p} dx`. At `u = 0` this is the finite
/// constant `c_{α,p}` when `α < 0` and `+inf` (divergence flag) otherwise.
pub fn g_tail(u: f64, params: &TemperingParams) -> f64 {
    if u < 0.0 || u.is_nan() {
        return f64::NAN;
    }
    tempered_tail(params.alpha, params.p, u)
}

/// `c_{α,p} = G_{α,p}(0)`, finite only for `α < 0`.
pub fn c_const(params: &TemperingParams) -> f64 {
    g_tail(0.0, params)
}

/// Inverse `G*_{α,p}` of the (strictly decreasing) tail function.
pub fn g_tail_inverse(t: f64, params: &TemperingParams) -> Result<f64> {
    let upper = c_const(params);
    if !(t > 0.0) || t >= upper || !t.is_finite() {
        return Err(LevyError::OutOfRange { value: t, upper });
    }
    let (alpha, p) = (params.alpha, params.p);
    let ln_t = t.ln();
    let ln_g = |y: f64| ln_tempered_tail(alpha, p, y.exp());
    // initial guess from the small-u asymptote (α > 0) or the large-u one
    let guess = if alpha > 0.0 && t > 1.0 {
        (alpha * t).powf(-1.0 / alpha)
    } else if alpha < 0.0 && t > 0.5 * upper {
        // G(u) ≈ c - u^{-α}/(-α) near 0
        ((upper - t) * (-alpha)).powf(-1.0 / alpha).max(1e-300)
    } else {
        (-ln_t).max(1.0).powf(1.0 / p)
    };
    let mut lo = guess.ln();
    let mut hi = lo;
    let f0 = ln_g(lo) - ln_t;
    if f0 == 0.0 {
        return Ok(guess);
    }
    let mut step = 0.5;
    if f0 > 0.0 {
        // G too large: move right
        loop {
            hi += step;
            step *= 2.0;
            if ln_g(hi) - ln_t <= 0.0 {
                break;
            }
            if hi > 710.0 {
                return Err(LevyError::RootFinding(format!("cannot bracket G*({t:e})")));
            }
        }
        lo = hi - step / 2.0;
    } else {
        loop {
            lo -= step;
            step *= 2.0;
            if ln_g(lo) - ln_t >= 0.0 {
                break;
            }
            if lo < -745.0 {
                return Err(LevyError::RootFinding(format!("cannot bracket G*({t:e})")));
            }
        }
        hi = lo + step / 2.0;
    }
    // safeguarded Newton in y = ln u
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let lg = ln_g(y);
        let f = lg - ln_t;
        if f > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let u = y.exp();
        // d ln G / dy = -u^{-α} e^{-u^p} / G(u)
        let slope = -((-alpha) * y - u.powf(p) - lg).exp();
        let mut y_new = y - f / slope;
        if !(y_new > lo && y_new < hi) || !y_new.is_finite() {
            y_new = 0.5 * (lo + hi);
        }
        let done = (y_new - y).abs() <= 1e-15 * y.abs().max(1.0) || (hi - lo) <= 1e-15 * y.abs().max(1.0);
        y = y_new;
        if done {
            break;
        }
    }
    Ok(y.exp())
}
