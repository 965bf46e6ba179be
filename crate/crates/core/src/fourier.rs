//! Gil-Pelaez inversion of one-dimensional characteristic functions:
//! `F(x) = 1/2 - (1/π) ∫_0^∞ Im(e^{-izx} φ(z))/z dz`.

use num_complex::Complex64;

use crate::error::{invalid, LevyError, Result};
use crate::geometry::DirectionSet;
use crate::measure::ID0Law;
use crate::quad::{adaptive, integrate_radial, Tolerance};

/// Number of grid points of the cached CDF.
pub const GRID_POINTS: usize = 2048;
/// `|φ(z)|` below which the inversion integral is truncated.
pub const ENVELOPE: f64 = 1e-10;

/// A CDF tabulated by Gil-Pelaez inversion on the grid `x = s tan θ`,
/// interpolated linearly in `θ`, with Lévy-tail asymptotes outside the grid.
#[derive(Debug, Clone)]
pub struct GilPelaezCdf {
    scale: f64,
    xs: Vec<f64>,
    fs: Vec<f64>,
    // right tail ≈ M((x, ∞)), left tail ≈ M((-∞, -x)), tabulated on the
    // same outer radii as (radius, right, left)
    tails: Vec<(f64, f64, f64)>,
}

fn cutoff(psi: &(dyn Fn(f64) -> Complex64 + Sync), level: f64) -> Result<f64> {
    // smallest z with Re ψ(z) <= level, located by doubling then bisection
    let re = |z: f64| psi(z).re;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut n = 0;
    while re(hi) > level {
        lo = hi;
        hi *= 2.0;
        n += 1;
        if n > 200 {
            return Err(LevyError::Unsupported(
                "characteristic function does not decay; the law has an atom or a lattice part".into(),
            ));
        }
    }
    if lo == 0.0 {
        lo = hi;
        while re(lo) <= level {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(invalid("law", "characteristic function decays at the origin"));
            }
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if re(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `F(x)` by direct integration with log panels below the first
/// half-period and half-period panels above, up to `z_max`.
fn gil_pelaez_point(psi: &(dyn Fn(f64) -> Complex64 + Sync), x: f64, z_max: f64, tol: Tolerance) -> Result<f64> {
    let g = |z: f64| {
        if z == 0.0 {
            return 0.0;
        }
        let e = psi(z) + Complex64::new(0.0, -z * x);
        Complex64::from_polar(e.re.exp(), e.im).im / z
    };
    let half = if x == 0.0 { z_max } else { (std::f64::consts::PI / x.abs()).min(z_max) };
    let first = half.min(z_max * 0.05).max(z_max * 1e-3).min(half);
    let mut total = integrate_radial(g, 0.0, first, first, tol)?;
    let mut a = first;
    while a < z_max {
        let b = (a + half).min(z_max);
        total += adaptive(&g, a, b, 1, tol)?.0;
        a = b;
    }
    Ok(0.5 - total / std::f64::consts::PI)
}

impl GilPelaezCdf {
    /// Tabulate the CDF of a one-dimensional `ID_0` law.
    pub fn new(law: &ID0Law) -> Result<Self> {
        if law.dim() != 1 {
            return Err(LevyError::DimensionMismatch {
                expected: 1,
                got: law.dim(),
            });
        }
        let psi = |z: f64| law.char_exponent(&[z]).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        let neg = DirectionSet::cap(crate::geometry::Direction::axis(1, 0, false), 0.1)?;
        let pos = DirectionSet::cap(crate::geometry::Direction::axis(1, 0, true), 0.1)?;
        let tails = |r: f64| -> (f64, f64) {
            (
                law.measure.tail_mass(r, &pos).unwrap_or(0.0),
                law.measure.tail_mass(r, &neg).unwrap_or(0.0),
            )
        };
        Self::from_exponent(&psi, &tails)
    }

    /// Tabulate from a log characteristic function and the Lévy tails
    /// `r ↦ (M((r, ∞)), M((-∞, -r)))` used beyond the grid.
    pub fn from_exponent(
        psi: &(dyn Fn(f64) -> Complex64 + Sync),
        tails: &(dyn Fn(f64) -> (f64, f64) + Sync),
    ) -> Result<Self> {
        let z1 = cutoff(psi, -1.0)?;
        let z_max = cutoff(psi, ENVELOPE.ln())?;
        let s = 1.0 / z1;
        let tol = Tolerance::new(1e-11, 1e-9);
        let xs: Vec<f64> = (0..GRID_POINTS)
            .map(|k| {
                let theta = -std::f64::consts::FRAC_PI_2
                    + std::f64::consts::PI * (k as f64 + 0.5) / GRID_POINTS as f64;
                s * theta.tan()
            })
            .collect();
        let eval = |x: &f64| gil_pelaez_point(psi, *x, z_max, tol);
        #[cfg(feature = "parallel")]
        let fs: Vec<f64> = {
            use rayon::prelude::*;
            xs.par_iter().map(eval).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let fs: Vec<f64> = xs.iter().map(eval).collect::<Result<_>>()?;
        // the numerical CDF is monotone up to quadrature noise; enforce it
        let mut fs = fs;
        for f in fs.iter_mut() {
            *f = f.clamp(0.0, 1.0);
        }
        for k in 1..fs.len() {
            if fs[k] < fs[k - 1] {
                fs[k] = fs[k - 1];
            }
        }
        let edge = xs[GRID_POINTS - 1];
        let tails = (0..=60)
            .map(|k| {
                let r = edge * 10f64.powf(k as f64 / 4.0);
                let (p, m) = tails(r);
                (r, p, m)
            })
            .collect();
        Ok(GilPelaezCdf { scale: s, xs, fs, tails })
    }

    fn tail_at(&self, r: f64, right: bool) -> f64 {
        let k = self.tails.partition_point(|t| t.0 <= r).clamp(1, self.tails.len() - 1);
        let (r0, r1) = (self.tails[k - 1].0, self.tails[k].0);
        let pick = |t: &(f64, f64, f64)| if right { t.1 } else { t.2 };
        let (a, b) = (pick(&self.tails[k - 1]), pick(&self.tails[k]));
        if a <= 0.0 || b <= 0.0 {
            return 0.0;
        }
        // log-log interpolation
        let w = (r / r0).ln() / (r1 / r0).ln();
        (a.ln() + w * (b.ln() - a.ln())).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            let t = self.tail_at(-x, false);
            return t.min(self.fs[0]);
        }
        if x >= self.xs[n - 1] {
            let t = self.tail_at(x, true);
            return (1.0 - t).max(self.fs[n - 1]);
        }
        // nodes sit at θ_k = -π/2 + π(k + 1/2)/n
        let theta = (x / self.scale).atan();
        let pos = (theta + std::f64::consts::FRAC_PI_2) * n as f64 / std::f64::consts::PI - 0.5;
        let k = (pos.floor() as usize).min(n - 2);
        let w = (pos - k as f64).clamp(0.0, 1.0);
        self.fs[k] + w * (self.fs[k + 1] - self.fs[k])
    }

    /// Grid nodes and values.
    pub fn grid(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.fs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphericalMeasure;
    use crate::measure::LevyMeasure;

    #[test]
    fn cauchy_cdf() {
        let w = 1.0 / std::f64::consts::PI;
        let law = ID0Law::centered(LevyMeasure::stable(1.0, SphericalMeasure::two_sided(w, w).unwrap()).unwrap());
        let cdf = GilPelaezCdf::new(&law).unwrap();
        for &x in &[-30.0f64, -2.0, -0.3, 0.0, 0.7, 5.0, 1e4] {
            let exact = 0.5 + x.atan() / std::f64::consts::PI;
            assert!((cdf.cdf(x) - exact).abs() < 2e-6, "x {x}: {} vs {exact}", cdf.cdf(x));
        }
    }

    #[test]
    fn gaussian_limit_shape_via_levy_stable_half() {
        // one-sided 1/2-stable with w = 1/sqrt(2π) is the Lévy distribution
        // with scale 1 shifted by the centering constant
        let w = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let m = LevyMeasure::stable(0.5, SphericalMeasure::two_sided(w, 0.0).unwrap()).unwrap();
        // the compensator shift -w π/(2 cos(π/4)) is undone by b
        let b = w * std::f64::consts::FRAC_PI_2 / (std::f64::consts::FRAC_PI_4).cos();
        let law = ID0Law::new(m, vec![b]).unwrap();
        let cdf = GilPelaezCdf::new(&law).unwrap();
        for &x in &[0.2f64, 1.0, 4.0, 50.0] {
            let exact = statrs_erfc((1.0 / (2.0 * x)).sqrt());
            // linear interpolation across the square-root tail costs ~1e-5
            assert!((cdf.cdf(x) - exact).abs() < 5e-5, "x {x}: {} vs {exact}", cdf.cdf(x));
        }
        assert!(cdf.cdf(-1.0) < 1e-6);
    }

    // erfc via the complementary incomplete gamma: erfc(x) = Γ(1/2, x²)/√π
    fn statrs_erfc(x: f64) -> f64 {
        crate::specfun::upper_gamma(0.5, x * x) / std::f64::consts::PI.sqrt()
    }
}
