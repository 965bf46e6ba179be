//! Stable laws `S_η(σ, b)` with Lévy measure `r^{-1-η} dr σ(du)`: mapping
//! to the `S1` (Nolan/Zolotarev) parametrization and the
//! Chambers–Mallows–Stuck sampler.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{invalid, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// One-dimensional stable law in the `S1` parametrization, with
/// characteristic function
/// `exp(-γ^α|t|^α(1 - iβ sign(t) tan(πα/2)) + iδt)` for `α ≠ 1` and
/// `exp(-γ|t|(1 + iβ(2/π) sign(t) ln|t|) + iδt)` for `α = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S1Params {
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    pub location: f64,
}

fn is_one(eta: f64) -> bool {
    (eta - 1.0).abs() < 1e-12
}

impl S1Params {
    /// Parameters of the law with Lévy measure `w₊ r^{-1-η}dr` on the
    /// positive and `w₋ r^{-1-η}dr` on the negative half-line and shift `b`
    /// (centering `x/(1+x²)`).
    pub fn from_levy(eta: f64, w_plus: f64, w_minus: f64, b: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 2.0) {
            return Err(invalid("eta", format!("must lie in (0, 2), got {eta}")));
        }
        let total = w_plus + w_minus;
        if !(w_plus >= 0.0 && w_minus >= 0.0 && total > 0.0) {
            return Err(invalid("sigma", "half-line weights must be nonnegative with positive total"));
        }
        let skew = (w_plus - w_minus) / total;
        if is_one(eta) {
            return Ok(S1Params {
                alpha: 1.0,
                beta: skew,
                scale: total * FRAC_PI_2,
                location: b + (w_plus - w_minus) * (1.0 - EULER_GAMMA),
            });
        }
        let c = total * crate::specfun::gamma(1.0 - eta) * (FRAC_PI_2 * eta).cos() / eta;
        Ok(S1Params {
            alpha: eta,
            beta: skew,
            scale: c.powf(1.0 / eta),
            location: b - (w_plus - w_minus) * FRAC_PI_2 / (FRAC_PI_2 * eta).cos(),
        })
    }

    /// One Chambers–Mallows–Stuck draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * (rng.random::<f64>() - 0.5);
        let w: f64 = Exp1.sample(rng);
        let (a, b) = (self.alpha, self.beta);
        if a == 1.0 {
            let shifted = FRAC_PI_2 + b * v;
            let x = (shifted * v.tan() - b * (FRAC_PI_2 * w * v.cos() / shifted).ln()) / FRAC_PI_2;
            return self.scale * x + b * self.scale * self.scale.ln() / FRAC_PI_2 + self.location;
        }
        let t = b * (FRAC_PI_2 * a).tan();
        let shift = t.atan() / a;
        let s = (1.0 + t * t).powf(0.5 / a);
        let x = s * (a * (v + shift)).sin() / v.cos().powf(1.0 / a)
            * ((v - a * (v + shift)).cos() / w).powf((1.0 - a) / a);
        self.scale * x + self.location
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphericalMeasure;
    use crate::measure::{ID0Law, LevyMeasure};
    use num_complex::Complex64;

    fn s1_exponent(p: &S1Params, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (a, b, g, d) = (p.alpha, p.beta, p.scale, p.location);
        if a == 1.0 {
            Complex64::new(-g * t.abs(), -g * b * t * t.abs().ln() / FRAC_PI_2 + d * t)
        } else {
            let ga = g.powf(a) * t.abs().powf(a);
            Complex64::new(-ga, ga * b * t.signum() * (FRAC_PI_2 * a).tan() + d * t)
        }
    }

    #[test]
    fn s1_mapping_matches_levy_khintchine() {
        for &eta in &[0.4, 1.0, 1.5] {
            let (wp, wm, b) = (0.7, 0.2, -0.3);
            let p = S1Params::from_levy(eta, wp, wm, b).unwrap();
            let law = ID0Law::new(
                LevyMeasure::stable(eta, SphericalMeasure::two_sided(wp, wm).unwrap()).unwrap(),
                vec![b],
            )
            .unwrap();
            for &t in &[-3.0, -0.5, 0.2, 2.0] {
                let lk = law.char_exponent(&[t]).unwrap();
                assert!((lk - s1_exponent(&p, t)).norm() < 1e-12 * (1.0 + lk.norm()), "eta {eta} t {t}");
            }
        }
    }

    #[test]
    fn cauchy_scale_convention() {
        let p = S1Params::from_levy(1.0, 1.0 / PI, 1.0 / PI, 0.0).unwrap();
        assert!((p.scale - 1.0).abs() < 1e-15);
        assert_eq!(p.location, 0.0);
    }
}
