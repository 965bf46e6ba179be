//! The β-inversion `x ↦ x/|x|²` with weight `|x|^{2+β}`, its Rosiński-level
//! counterpart, the log-inversion and the `σ′` rescaling.

use crate::error::{invalid, LevyError, Result};
use crate::geometry::{norm, SphericalMeasure};
use crate::measure::{Atom, LevyMeasure, MeasureRepr, RadialProfile, RosinskiMeasure};
use crate::specfun::{k_const, TemperingParams};

/// `M^β(A) = ∫ 1_A(x/|x|²) |x|^{2+β} M(dx)`.
///
/// Stable inputs map to stable inputs in closed form, power-law profiles to
/// power-law profiles, and tables node by node (the log-log interpolant is
/// mapped exactly). Tempered inputs are rejected: invert the Rosiński
/// measure with [`rosinski_inversion`] or flatten to a table first.
pub fn beta_inversion(m: &LevyMeasure, beta: f64) -> Result<LevyMeasure> {
    let report = m.moment_class_check(beta)?;
    if !report.member {
        return Err(LevyError::NotInMomentClass {
            beta,
            integral: if report.small_ball_integral.is_finite() {
                "tail integral ∫_{|x|>1}|x|^β M(dx)"
            } else {
                "small-ball integral ∫_{|x|<=1}|x|² M(dx)"
            },
        });
    }
    invert_repr(m, beta)
}

fn invert_repr(m: &LevyMeasure, beta: f64) -> Result<LevyMeasure> {
    match m.repr() {
        MeasureRepr::Atomic { atoms } => {
            let atoms = atoms
                .iter()
                .map(|a| {
                    let r = norm(&a.x);
                    let r2 = r * r;
                    Atom::new(a.x.iter().map(|v| v / r2).collect(), a.w * r.powf(2.0 + beta))
                })
                .collect();
            LevyMeasure::atomic(atoms, Some(m.dim()))
        }
        MeasureRepr::Stable { eta, sigma } => LevyMeasure::stable(2.0 + beta - eta, sigma.clone()),
        MeasureRepr::Polar { sigma, radial } => {
            LevyMeasure::polar(sigma.clone(), invert_profile(radial, beta))
        }
        MeasureRepr::Tempered { .. } => Err(LevyError::Unsupported(
            "tempered-stable Lévy measures are inverted at the Rosiński level: use rosinski_inversion, or flatten_to_polar for a numerical Lévy-level inversion".into(),
        )),
        MeasureRepr::Sum { parts } => {
            LevyMeasure::sum(parts.iter().map(|p| invert_repr(p, beta)).collect::<Result<_>>()?)
        }
    }
}

fn invert_profile(radial: &RadialProfile, beta: f64) -> RadialProfile {
    match radial {
        RadialProfile::PowerLaw { index, lo, hi } => RadialProfile::PowerLaw {
            index: 2.0 + beta - index,
            lo: if hi.is_infinite() { 0.0 } else { 1.0 / hi },
            hi: if *lo == 0.0 { f64::INFINITY } else { 1.0 / lo },
        },
        RadialProfile::Table { r, density } => RadialProfile::Table {
            r: r.iter().rev().map(|x| 1.0 / x).collect(),
            density: r
                .iter()
                .zip(density)
                .rev()
                .map(|(x, f)| x.powf(4.0 + beta) * f)
                .collect(),
        },
    }
}

/// `R^γ` with `γ = α ∨ 0`; the result is again a Rosiński measure in `𝔐^γ`.
pub fn rosinski_inversion(r: &RosinskiMeasure, gamma: f64) -> Result<RosinskiMeasure> {
    RosinskiMeasure::new(beta_inversion(r.as_measure(), gamma)?)
}

/// `R^log(A) = ∫ 1_A(x/|x|²) |x|²(1+|log|x||)^{κ(|x|)} R(dx)` with
/// `κ = 1` on `|x| >= 1` and `-1` on `|x| < 1`. Atomic measures only.
pub fn log_inversion(r: &RosinskiMeasure) -> Result<RosinskiMeasure> {
    let m = r.as_measure();
    let MeasureRepr::Atomic { atoms } = m.repr() else {
        return Err(LevyError::Unsupported(
            "the log-inversion is implemented for atomic Rosiński measures".into(),
        ));
    };
    let atoms = atoms
        .iter()
        .map(|a| {
            let n = norm(&a.x);
            let l = 1.0 + n.ln().abs();
            let factor = if n >= 1.0 { n * n * l } else { n * n / l };
            let n2 = n * n;
            Atom::new(a.x.iter().map(|v| v / n2).collect(), a.w * factor)
        })
        .collect();
    RosinskiMeasure::new(LevyMeasure::atomic(atoms, Some(m.dim()))?)
}

/// `K_{2+γ-η,α,p} / K_{η,α,p}`: the `σ′` ratio, which is also the `κ` of
/// the tempered short-time norming.
pub fn k_ratio(eta: f64, params: &TemperingParams) -> Result<f64> {
    let gamma = params.gamma();
    if !(eta > gamma && eta < 2.0) {
        return Err(invalid("eta", format!("must lie in (γ, 2) = ({gamma}, 2), got {eta}")));
    }
    Ok(k_const(2.0 + gamma - eta, params)? / k_const(eta, params)?)
}

/// `σ′ = (K_{2+γ-η,α,p} / K_{η,α,p}) σ`.
pub fn sigma_prime(sigma: &SphericalMeasure, eta: f64, params: &TemperingParams) -> Result<SphericalMeasure> {
    sigma.scaled(k_ratio(eta, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Direction, DirectionSet};
    use approx::assert_relative_eq;

    fn atoms(m: &LevyMeasure) -> Vec<Atom> {
        match m.repr() {
            MeasureRepr::Atomic { atoms } => atoms.clone(),
            _ => panic!("not atomic"),
        }
    }

    #[test]
    fn atomic_examples() {
        let m = LevyMeasure::atomic(vec![Atom::new(vec![2.0, 0.0], 3.0)], None).unwrap();
        let inv = atoms(&beta_inversion(&m, 0.0).unwrap());
        assert_eq!(inv[0].x, vec![0.5, 0.0]);
        assert_eq!(inv[0].w, 12.0);
        let unit = LevyMeasure::atomic(vec![Atom::new(vec![0.6, -0.8], 1.5)], None).unwrap();
        for beta in [0.0, 0.7, 2.0] {
            let a = atoms(&beta_inversion(&unit, beta).unwrap());
            assert_relative_eq!(a[0].w, 1.5, max_relative = 1e-15);
            assert_relative_eq!(a[0].x[1], -0.8, max_relative = 1e-15);
        }
    }

    #[test]
    fn stable_closed_form() {
        let s = LevyMeasure::stable(1.2, SphericalMeasure::two_sided(1.0, 2.0).unwrap()).unwrap();
        match beta_inversion(&s, 0.0).unwrap().repr() {
            MeasureRepr::Stable { eta, sigma } => {
                assert_relative_eq!(*eta, 0.8, epsilon = 1e-15);
                assert_eq!(sigma, &SphericalMeasure::two_sided(1.0, 2.0).unwrap());
            }
            _ => panic!(),
        }
        // β >= η is outside the moment class
        assert!(matches!(beta_inversion(&s, 1.2), Err(LevyError::NotInMomentClass { .. })));
    }

    #[test]
    fn rosinski_examples() {
        let r = RosinskiMeasure::new(LevyMeasure::atomic(vec![Atom::new(vec![3.0, 0.0], 1.0)], None).unwrap()).unwrap();
        let inv = rosinski_inversion(&r, 0.5).unwrap();
        let a = atoms(inv.as_measure());
        assert_relative_eq!(a[0].x[0], 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(a[0].w, 3f64.powf(2.5), max_relative = 1e-15);
    }

    #[test]
    fn log_inversion_examples() {
        let e = std::f64::consts::E;
        let r = RosinskiMeasure::new(LevyMeasure::atomic(vec![Atom::new(vec![e, 0.0], 1.0)], None).unwrap()).unwrap();
        let a = atoms(log_inversion(&r).unwrap().as_measure());
        assert_relative_eq!(a[0].x[0], 1.0 / e, max_relative = 1e-15);
        assert_relative_eq!(a[0].w, 2.0 * e * e, max_relative = 1e-15);
        let back = atoms(log_inversion(&log_inversion(&r).unwrap()).unwrap().as_measure());
        assert_relative_eq!(back[0].w, 1.0, max_relative = 1e-14);
        let unit = RosinskiMeasure::new(LevyMeasure::atomic(vec![Atom::new(vec![0.0, -1.0], 2.0)], None).unwrap()).unwrap();
        assert_eq!(atoms(log_inversion(&unit).unwrap().as_measure())[0].w, 2.0);
    }

    #[test]
    fn sigma_prime_examples() {
        let params = TemperingParams::new(1.0, 0.5).unwrap();
        let sigma = SphericalMeasure::two_sided(1.0, 3.0).unwrap();
        assert_eq!(sigma_prime(&sigma, 1.25, &params).unwrap(), sigma);
        let sp = sigma_prime(&sigma, 1.5, &params).unwrap();
        let ratio = std::f64::consts::PI.sqrt();
        assert_relative_eq!(sp.total(), 4.0 * ratio, max_relative = 1e-13);
        let (p, m) = sp.half_line_weights().unwrap();
        assert_relative_eq!(m / p, 3.0, max_relative = 1e-14);
        assert!(sigma_prime(&sigma, 0.4, &params).is_err());
    }

    #[test]
    fn table_inversion_is_exact_against_moments() {
        let radial = RadialProfile::Table {
            r: vec![0.1, 0.4, 2.0, 7.0],
            density: vec![3.0, 1.0, 0.2, 0.01],
        };
        let sigma = SphericalMeasure::point(Direction::axis(1, 0, true), 1.5).unwrap();
        let m = LevyMeasure::polar(sigma, radial).unwrap();
        let beta = 0.5;
        let inv = beta_inversion(&m, beta).unwrap();
        for &t in &[0.2, 1.0, 3.0, 9.0] {
            let lhs = inv.tail_mass(t, &DirectionSet::All).unwrap();
            let rhs = m.radial_moment(2.0 + beta, 0.0, 1.0 / t).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
        let back = beta_inversion(&inv, beta).unwrap();
        match (back.repr(), m.repr()) {
            (MeasureRepr::Polar { radial: RadialProfile::Table { r: r1, density: d1 }, .. }, MeasureRepr::Polar { radial: RadialProfile::Table { r: r0, density: d0 }, .. }) => {
                for k in 0..r0.len() {
                    assert_relative_eq!(r1[k], r0[k], max_relative = 1e-15);
                    assert_relative_eq!(d1[k], d0[k], max_relative = 1e-13);
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn tempered_levy_inversion_is_rejected() {
        let r = RosinskiMeasure::new(LevyMeasure::atomic(vec![Atom::new(vec![1.0], 1.0)], None).unwrap()).unwrap();
        let ts = crate::measure::rosinski_to_levy(&r, 1.0, -0.5).unwrap();
        assert!(matches!(beta_inversion(&ts, 0.0), Err(LevyError::Unsupported(_))));
    }
}
