//! Lévy measures and Rosiński measures in four concrete representations,
//! with tail functionals, integrals, moment-class membership and the
//! characteristic exponent.

use num_complex::Complex64;

use crate::error::{invalid, LevyError, Result};
use crate::geometry::{norm, CapPartition, Direction, DirectionSet, SphericalMeasure};
use crate::quad::Tolerance;
use crate::radial::{RadialComponent, RadialPart};
use crate::specfun::TemperingParams;

/// A weighted point mass `w δ_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub x: Vec<f64>,
    pub w: f64,
}

impl Atom {
    pub fn new(x: Vec<f64>, w: f64) -> Self {
        Atom { x, w }
    }
}

/// Direction-independent radial density against `dr` used by the polar
/// representation.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// Density `r^{-1-index}` on `(lo, hi)`; `hi` may be infinite.
    PowerLaw { index: f64, lo: f64, hi: f64 },
    /// Tabulated density, interpolated linearly in log-log coordinates
    /// between nodes and zero outside `[r_0, r_n]`. A segment touching a
    /// zero density value is treated as zero.
    Table { r: Vec<f64>, density: Vec<f64> },
}

impl RadialProfile {
    fn validate(&self) -> Result<()> {
        match self {
            RadialProfile::PowerLaw { index, lo, hi } => {
                if !index.is_finite() {
                    return Err(invalid("index", "must be finite"));
                }
                if !(*lo >= 0.0 && hi > lo) || lo.is_infinite() {
                    return Err(invalid("cutoffs", format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
                }
                Ok(())
            }
            RadialProfile::Table { r, density } => {
                if r.len() < 2 || r.len() != density.len() {
                    return Err(invalid(
                        "radial",
                        "table needs at least two nodes and matching r/density lengths",
                    ));
                }
                if !r.iter().all(|v| *v > 0.0 && v.is_finite()) || r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("r", "nodes must be positive, finite and strictly increasing"));
                }
                if !density.iter().all(|v| *v >= 0.0 && v.is_finite()) {
                    return Err(invalid("density", "values must be finite and nonnegative"));
                }
                Ok(())
            }
        }
    }

    /// Decomposition into power-law pieces.
    pub fn parts(&self) -> Vec<RadialPart> {
        match self {
            RadialProfile::PowerLaw { index, lo, hi } => vec![RadialPart::power(*index, *lo, *hi)],
            RadialProfile::Table { r, density } => r
                .windows(2)
                .zip(density.windows(2))
                .filter(|(_, f)| f[0] > 0.0 && f[1] > 0.0)
                .map(|(r, f)| {
                    let slope = (f[1] / f[0]).ln() / (r[1] / r[0]).ln();
                    RadialPart::Power {
                        coef: f[0],
                        eta: -1.0 - slope,
                        lo: r[0],
                        hi: r[1],
                        anchor: r[0],
                    }
                })
                .collect(),
        }
    }

    /// Density at radius `r`.
    pub fn density(&self, r: f64) -> f64 {
        self.parts().iter().map(|p| p.density(r)).sum()
    }
}

/// The representation behind a [`LevyMeasure`].
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureRepr {
    Atomic { atoms: Vec<Atom> },
    Polar { sigma: SphericalMeasure, radial: RadialProfile },
    /// Radial density `r^{-1-η}` on `(0, ∞)` along each atom of `sigma`.
    Stable { eta: f64, sigma: SphericalMeasure },
    /// Image of `t^{-1-α} e^{-t^p} dt R(dx)` under `(t, x) ↦ t x`.
    Tempered { params: TemperingParams, rosinski: Box<RosinskiMeasure> },
    /// Finite sum of measures of equal dimension.
    Sum { parts: Vec<LevyMeasure> },
}

/// A Lévy measure on `R^d \ {0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    repr: MeasureRepr,
    dim: usize,
    components: Vec<RadialComponent>,
}

/// A Rosiński measure: any representation other than tempered.
#[derive(Debug, Clone, PartialEq)]
pub struct RosinskiMeasure(LevyMeasure);

/// Membership report for the moment class `𝔐^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentClassReport {
    pub beta: f64,
    pub member: bool,
    /// `∫_{|x|<=1} |x|² M(dx)`, `+inf` when divergent.
    pub small_ball_integral: f64,
    /// `∫_{|x|>1} |x|^β M(dx)`, `+inf` when divergent.
    pub tail_integral: f64,
}

/// `ID_0(M, b)`: the infinitely divisible law without Gaussian part.
#[derive(Debug, Clone, PartialEq)]
pub struct ID0Law {
    pub measure: LevyMeasure,
    pub shift: Vec<f64>,
}

impl LevyMeasure {
    fn build(repr: MeasureRepr, dim: usize) -> Result<Self> {
        let components = match &repr {
            MeasureRepr::Atomic { atoms } => atoms
                .iter()
                .map(|a| {
                    Ok(RadialComponent {
                        direction: Direction::of(&a.x)?,
                        weight: a.w,
                        part: RadialPart::Point { r: norm(&a.x) },
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            MeasureRepr::Polar { sigma, radial } => {
                let parts = radial.parts();
                sigma
                    .atoms()
                    .iter()
                    .flat_map(|(u, w)| {
                        parts.iter().map(move |p| RadialComponent {
                            direction: u.clone(),
                            weight: *w,
                            part: p.clone(),
                        })
                    })
                    .collect()
            }
            MeasureRepr::Stable { eta, sigma } => sigma
                .atoms()
                .iter()
                .map(|(u, w)| RadialComponent {
                    direction: u.clone(),
                    weight: *w,
                    part: RadialPart::power(*eta, 0.0, f64::INFINITY),
                })
                .collect(),
            MeasureRepr::Tempered { params, rosinski } => rosinski
                .components()
                .iter()
                .map(|c| RadialComponent {
                    direction: c.direction.clone(),
                    weight: c.weight,
                    part: temper(&c.part, *params),
                })
                .collect(),
            MeasureRepr::Sum { parts } => parts.iter().flat_map(|p| p.components.iter().cloned()).collect(),
        };
        Ok(LevyMeasure { repr, dim, components })
    }

    /// Finite sum of weighted point masses. `dim` is required only when
    /// `atoms` is empty (the zero measure).
    pub fn atomic(atoms: Vec<Atom>, dim: Option<usize>) -> Result<Self> {
        let dim = match (atoms.first(), dim) {
            (Some(a), Some(d)) if a.x.len() != d => {
                return Err(LevyError::DimensionMismatch {
                    expected: d,
                    got: a.x.len(),
                })
            }
            (Some(a), _) => a.x.len(),
            (None, Some(d)) => d,
            (None, None) => return Err(invalid("dim", "an empty atomic measure needs an explicit dimension")),
        };
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        for a in &atoms {
            if a.x.len() != dim {
                return Err(LevyError::DimensionMismatch {
                    expected: dim,
                    got: a.x.len(),
                });
            }
            if !a.x.iter().all(|v| v.is_finite()) {
                return Err(LevyError::InvalidMeasure(format!("atom {:?} is not finite", a.x)));
            }
            if norm(&a.x) == 0.0 {
                return Err(LevyError::InvalidMeasure("atoms at the origin are not allowed (M({0}) = 0)".into()));
            }
            if !(a.w > 0.0) || !a.w.is_finite() {
                return Err(invalid("w", format!("atom weights must be positive and finite, got {}", a.w)));
            }
        }
        LevyMeasure::build(MeasureRepr::Atomic { atoms }, dim)
    }

    pub fn polar(sigma: SphericalMeasure, radial: RadialProfile) -> Result<Self> {
        radial.validate()?;
        let dim = sigma.dim();
        let m = LevyMeasure::build(MeasureRepr::Polar { sigma, radial }, dim)?;
        let report = m.moment_class_check(0.0)?;
        if !report.member {
            return Err(LevyError::InvalidMeasure(format!(
                "polar profile is not a Lévy measure: ∫(|x|²∧1) M(dx) = {:e} + {:e}",
                report.small_ball_integral, report.tail_integral
            )));
        }
        Ok(m)
    }

    pub fn stable(eta: f64, sigma: SphericalMeasure) -> Result<Self> {
        if !(eta > 0.0 && eta < 2.0) {
            return Err(invalid("eta", format!("must lie in (0, 2), got {eta}")));
        }
        let dim = sigma.dim();
        LevyMeasure::build(MeasureRepr::Stable { eta, sigma }, dim)
    }

    /// The tempered-stable Lévy measure with Rosiński measure `R`.
    pub fn tempered(params: TemperingParams, rosinski: RosinskiMeasure) -> Result<Self> {
        let params = TemperingParams::new(params.p, params.alpha)?;
        let gamma = params.gamma();
        let report = rosinski.as_measure().moment_class_check(gamma)?;
        if !report.member {
            return Err(LevyError::NotInMomentClass {
                beta: gamma,
                integral: if report.small_ball_integral.is_finite() {
                    "tail integral ∫_{|x|>1}|x|^γ R(dx)"
                } else {
                    "small-ball integral ∫_{|x|<=1}|x|² R(dx)"
                },
            });
        }
        let dim = rosinski.dim();
        LevyMeasure::build(
            MeasureRepr::Tempered {
                params,
                rosinski: Box::new(rosinski),
            },
            dim,
        )
    }

    pub fn sum(parts: Vec<LevyMeasure>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(invalid("parts", "a sum needs at least one part"));
        };
        let dim = first.dim;
        for p in &parts {
            if p.dim != dim {
                return Err(LevyError::DimensionMismatch { expected: dim, got: p.dim });
            }
        }
        LevyMeasure::build(MeasureRepr::Sum { parts }, dim)
    }

    pub fn repr(&self) -> &MeasureRepr {
        &self.repr
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Decomposition into weighted radial measures along fixed directions.
    pub fn components(&self) -> &[RadialComponent] {
        &self.components
    }

    /// Whether any part is tempered.
    pub fn is_tempered(&self) -> bool {
        self.components.iter().any(|c| c.part.is_tempered())
    }

    /// The positive multiple `c M`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("scale", format!("must be positive and finite, got {c}")));
        }
        let repr = match &self.repr {
            MeasureRepr::Atomic { atoms } => MeasureRepr::Atomic {
                atoms: atoms.iter().map(|a| Atom::new(a.x.clone(), a.w * c)).collect(),
            },
            MeasureRepr::Polar { sigma, radial } => MeasureRepr::Polar {
                sigma: sigma.scaled(c)?,
                radial: radial.clone(),
            },
            MeasureRepr::Stable { eta, sigma } => MeasureRepr::Stable {
                eta: *eta,
                sigma: sigma.scaled(c)?,
            },
            MeasureRepr::Tempered { params, rosinski } => MeasureRepr::Tempered {
                params: *params,
                rosinski: Box::new(RosinskiMeasure(rosinski.as_measure().scaled(c)?)),
            },
            MeasureRepr::Sum { parts } => MeasureRepr::Sum {
                parts: parts.iter().map(|p| p.scaled(c)).collect::<Result<_>>()?,
            },
        };
        LevyMeasure::build(repr, self.dim)
    }

    /// `M(|x| > r, x/|x| ∈ D)`; `+inf` when infinite.
    pub fn tail_mass(&self, r: f64, set: &DirectionSet) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(invalid("r", format!("must be nonnegative, got {r}")));
        }
        let mut total = 0.0;
        for c in self.components.iter().filter(|c| set.contains(&c.direction)) {
            total += c.weight * c.part.tail(r)?;
        }
        Ok(total)
    }

    /// `∫ 1{r_lo < |x| < r_hi} f(x) M(dx)`.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F, r_lo: f64, r_hi: f64) -> Result<f64> {
        self.integrate_with(f, r_lo, r_hi, Tolerance::default())
    }

    pub fn integrate_with<F: Fn(&[f64]) -> f64>(&self, f: F, r_lo: f64, r_hi: f64, tol: Tolerance) -> Result<f64> {
        if !(r_lo >= 0.0 && r_hi > r_lo) {
            return Err(invalid("annulus", format!("need 0 <= r_lo < r_hi, got ({r_lo}, {r_hi})")));
        }
        let mut total = 0.0;
        let mut x = vec![0.0; self.dim];
        for c in &self.components {
            let u = c.direction.as_slice();
            let g = |r: f64| {
                let mut y = x.clone();
                for (yi, ui) in y.iter_mut().zip(u) {
                    *yi = r * ui;
                }
                f(&y)
            };
            let v = c.part.integrate(g, r_lo, r_hi, tol)?;
            if !v.is_finite() {
                return Err(LevyError::Divergent(format!(
                    "integral over ({r_lo}, {r_hi}) is infinite"
                )));
            }
            total += c.weight * v;
            x.fill(0.0);
        }
        Ok(total)
    }

    /// `∫_{a < |x| <= b} |x|^m M(dx)`, `+inf` when divergent.
    pub fn radial_moment(&self, m: f64, a: f64, b: f64) -> Result<f64> {
        let mut total = 0.0;
        for c in &self.components {
            let v = match c.part.moment(m, a, b) {
                Err(LevyError::Divergent(_)) => f64::INFINITY,
                other => other?,
            };
            total += c.weight * v;
        }
        Ok(total)
    }

    /// `∫_{a < |x| <= b, x/|x| ∈ D} |x|^m M(dx)`, `+inf` when divergent.
    pub fn radial_moment_in(&self, m: f64, a: f64, b: f64, set: &DirectionSet) -> Result<f64> {
        let mut total = 0.0;
        for c in self.components.iter().filter(|c| set.contains(&c.direction)) {
            let v = match c.part.moment(m, a, b) {
                Err(LevyError::Divergent(_)) => f64::INFINITY,
                other => other?,
            };
            total += c.weight * v;
        }
        Ok(total)
    }

    /// `M(|x| > r, x/|x| ∈ D_k)` for each cell `D_k` of a cap partition.
    pub fn tail_mass_partition(&self, r: f64, partition: &CapPartition) -> Result<Vec<f64>> {
        let mut out = vec![0.0; partition.len()];
        for c in &self.components {
            out[partition.index_of(&c.direction)] += c.weight * c.part.tail(r)?;
        }
        Ok(out)
    }

    /// Membership in `𝔐^β`: `∫(|x|² ∧ |x|^β) M(dx) < ∞`.
    pub fn moment_class_check(&self, beta: f64) -> Result<MomentClassReport> {
        if !(0.0..=2.0).contains(&beta) {
            return Err(invalid("beta", format!("must lie in [0, 2], got {beta}")));
        }
        let small = self.radial_moment(2.0, 0.0, 1.0)?;
        let tail = self.radial_moment(beta, 1.0, f64::INFINITY)?;
        Ok(MomentClassReport {
            beta,
            member: small.is_finite() && tail.is_finite(),
            small_ball_integral: small,
            tail_integral: tail,
        })
    }

    /// `∫ (e^{i⟨z,x⟩} - 1 - i⟨z,x⟩/(1+|x|²)) M(dx)`.
    pub fn char_exponent(&self, z: &[f64]) -> Result<Complex64> {
        if z.len() != self.dim {
            return Err(LevyError::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        let tol = Tolerance::default();
        let mut total = Complex64::new(0.0, 0.0);
        for c in &self.components {
            let proj = c.direction.dot(z);
            total += c.part.char_exponent(proj, tol)? * c.weight;
        }
        Ok(total)
    }
}

fn temper(part: &RadialPart, params: TemperingParams) -> RadialPart {
    match *part {
        RadialPart::Point { r } => RadialPart::TemperedPoint { rho: r, params },
        RadialPart::Power {
            coef,
            eta,
            lo,
            hi,
            anchor,
        } => RadialPart::TemperedPower {
            coef,
            eta,
            lo,
            hi,
            anchor,
            params,
        },
        // Rosiński measures never contain tempered parts
        ref other => other.clone(),
    }
}

impl RosinskiMeasure {
    pub fn new(m: LevyMeasure) -> Result<Self> {
        if m.is_tempered() {
            return Err(LevyError::InvalidMeasure(
                "a Rosiński measure cannot itself be tempered".into(),
            ));
        }
        Ok(RosinskiMeasure(m))
    }

    pub fn as_measure(&self) -> &LevyMeasure {
        &self.0
    }

    pub fn into_measure(self) -> LevyMeasure {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn components(&self) -> &[RadialComponent] {
        &self.0.components
    }
}

/// The tempered-stable Lévy measure of `R` (checks `R ∈ 𝔐^γ`).
pub fn rosinski_to_levy(r: &RosinskiMeasure, p: f64, alpha: f64) -> Result<LevyMeasure> {
    LevyMeasure::tempered(TemperingParams::new(p, alpha)?, r.clone())
}

impl ID0Law {
    pub fn new(measure: LevyMeasure, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != measure.dim() {
            return Err(LevyError::DimensionMismatch {
                expected: measure.dim(),
                got: shift.len(),
            });
        }
        Ok(ID0Law { measure, shift })
    }

    /// Law with zero shift.
    pub fn centered(measure: LevyMeasure) -> Self {
        let d = measure.dim();
        ID0Law {
            measure,
            shift: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    /// `C_μ(z) = i⟨b,z⟩ + ∫ (e^{i⟨z,x⟩} - 1 - i⟨z,x⟩/(1+|x|²)) M(dx)`.
    pub fn char_exponent(&self, z: &[f64]) -> Result<Complex64> {
        let jump = self.measure.char_exponent(z)?;
        Ok(jump + Complex64::new(0.0, crate::geometry::dot(&self.shift, z)))
    }
}

/// Result of tabulating a measure onto polar tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Flattened {
    pub measure: LevyMeasure,
    /// `∫_{|x|<lo} |x|² M(dx)` dropped below the grid.
    pub dropped_small_second_moment: f64,
    /// `M(|x| > hi)` dropped above the grid.
    pub dropped_tail_mass: f64,
}

/// Tabulate every direction of `m` (typically tempered) as a polar table on
/// a geometric grid over `[lo, hi]`, `per_decade` nodes per decade. The
/// result is a sum of single-direction polar measures; mass outside the grid
/// is dropped and reported.
pub fn flatten_to_polar(m: &LevyMeasure, lo: f64, hi: f64, per_decade: usize) -> Result<Flattened> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || per_decade == 0 {
        return Err(invalid("grid", format!("need 0 < lo < hi < inf, got [{lo}, {hi}]")));
    }
    let n = ((hi / lo).log10() * per_decade as f64).ceil() as usize + 1;
    let r: Vec<f64> = (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect();
    let mut directions: Vec<Direction> = Vec::new();
    for c in m.components() {
        if !directions.iter().any(|d| same_direction(d, &c.direction)) {
            directions.push(c.direction.clone());
        }
    }
    let mut parts = Vec::new();
    for u in &directions {
        let comps: Vec<&RadialComponent> = m
            .components()
            .iter()
            .filter(|c| same_direction(&c.direction, u))
            .collect();
        if comps.iter().any(|c| matches!(c.part, RadialPart::Point { .. })) {
            return Err(LevyError::Unsupported("flattening point masses onto a density table".into()));
        }
        let density: Vec<f64> = r
            .iter()
            .map(|&x| comps.iter().map(|c| c.weight * c.part.density(x)).sum())
            .collect();
        let sigma = SphericalMeasure::point(u.clone(), 1.0)?;
        parts.push(LevyMeasure::polar(
            sigma,
            RadialProfile::Table {
                r: r.clone(),
                density,
            },
        )?);
    }
    let measure = if parts.len() == 1 { parts.pop().unwrap() } else { LevyMeasure::sum(parts)? };
    Ok(Flattened {
        measure,
        dropped_small_second_moment: m.radial_moment(2.0, 0.0, lo)?,
        dropped_tail_mass: m.tail_mass(hi, &DirectionSet::All)?,
    })
}

fn same_direction(a: &Direction, b: &Direction) -> bool {
    a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).abs() < 1e-12)
}
