//! Regular variation of measures at `0` and `∞`, estimated from the
//! measure itself, and the two-sided tail correspondence under the
//! β-inversion.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LevyError, Result};
use crate::geometry::{Cap, CapPartition, DirectionSet, SphericalMeasure};
use crate::inversion::beta_inversion;
use crate::measure::LevyMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Zero,
    Infinity,
}

impl std::str::FromStr for Endpoint {
    type Err = LevyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "0" => Ok(Endpoint::Zero),
            "infinity" | "inf" => Ok(Endpoint::Infinity),
            other => Err(invalid("endpoint", format!("expected `zero` or `infinity`, got `{other}`"))),
        }
    }
}

/// `count` geometric radii spanning `decades` decades toward the endpoint,
/// ordered from the far end toward the endpoint.
pub fn default_grid(endpoint: Endpoint, count: usize, decades: f64) -> Vec<f64> {
    let (start, stop) = match endpoint {
        Endpoint::Zero => (-4.0, -4.0 - decades),
        Endpoint::Infinity => (4.0, 4.0 + decades),
    };
    (0..count)
        .map(|k| 10f64.powf(start + (stop - start) * k as f64 / (count - 1).max(1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RVEstimate {
    pub endpoint: Endpoint,
    pub rho_hat: f64,
    /// Cap masses at the radius closest to the endpoint, normalized to 1,
    /// placed at the cap centers.
    pub sigma_hat: SphericalMeasure,
    /// `(r, M(|x|>r) r^{-ρ̂})`.
    pub ell_samples: Vec<(f64, f64)>,
    pub fit_r2: f64,
    pub grid: Vec<f64>,
    /// `max |ln ℓ̂ - mean ln ℓ̂|` over the grid.
    pub ell_drift: f64,
    /// False when the fit is poor (`fit_r2 < 0.999`) and `ℓ̂` drifts by
    /// more than the tolerance: evidence against regular variation.
    pub regularly_varying: bool,
}

pub(crate) fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy <= 1e-300 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    (slope, intercept, r2)
}

/// Estimate the index of regular variation of `M` at `endpoint` from the
/// log-log slope of `r ↦ M(|x|>r)` on `grid` (default: 40 radii over four
/// decades toward the endpoint).
pub fn estimate_rv_index(
    m: &LevyMeasure,
    endpoint: Endpoint,
    grid: Option<&[f64]>,
    partition: Option<&CapPartition>,
    drift_tol: f64,
) -> Result<RVEstimate> {
    let grid: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None => default_grid(endpoint, 40, 4.0),
    };
    if grid.len() < 2 || grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(invalid("grid", "needs at least two positive finite radii"));
    }
    let tails = grid
        .iter()
        .map(|&r| m.tail_mass(r, &DirectionSet::All))
        .collect::<Result<Vec<_>>>()?;
    if let Some((r, t)) = grid.iter().zip(&tails).find(|(_, t)| !(**t > 0.0 && t.is_finite())) {
        return Err(LevyError::InvalidMeasure(format!(
            "tail mass at r = {r:e} is {t:e}; regular variation needs a finite positive tail on the grid"
        )));
    }
    let lx: Vec<f64> = grid.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = tails.iter().map(|t| t.ln()).collect();
    let (slope, _, r2) = ols(&lx, &ly);
    let rho_hat = slope.min(0.0);
    let ell_samples: Vec<(f64, f64)> = grid
        .iter()
        .zip(&tails)
        .map(|(&r, &t)| (r, t * r.powf(-rho_hat)))
        .collect();
    let logs: Vec<f64> = ell_samples.iter().map(|(_, l)| l.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let ell_drift = logs.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);

    let default_partition;
    let partition = match partition {
        Some(p) => p,
        None => {
            default_partition = CapPartition::axes(m.dim());
            &default_partition
        }
    };
    let extreme = match endpoint {
        Endpoint::Zero => grid.iter().cloned().fold(f64::INFINITY, f64::min),
        Endpoint::Infinity => grid.iter().cloned().fold(0.0, f64::max),
    };
    let masses = m.tail_mass_partition(extreme, partition)?;
    let total: f64 = masses.iter().sum();
    let atoms = partition
        .centers()
        .iter()
        .zip(&masses)
        .filter(|(_, w)| **w > 0.0)
        .map(|(u, w)| (u.clone(), w / total))
        .collect();
    Ok(RVEstimate {
        endpoint,
        rho_hat,
        sigma_hat: SphericalMeasure::new(atoms)?,
        ell_samples,
        fit_r2: r2,
        grid,
        ell_drift,
        regularly_varying: !(r2 < 0.999 && ell_drift > drift_tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub cap: usize,
    pub t: f64,
    pub radius: f64,
    pub ratio: f64,
    pub prediction: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RvSigmaReport {
    pub rows: Vec<RatioRow>,
    pub pass: bool,
}

/// Compare `M(|x|>rt, x/|x|∈D)/M(|x|>r)` at the extreme radius `r` with
/// `t^ρ σ(D)/σ(S^{d-1})` for each cap `D` and each `t`.
#[allow(clippy::too_many_arguments)]
pub fn check_rv_sigma(
    m: &LevyMeasure,
    endpoint: Endpoint,
    rho: f64,
    sigma: &SphericalMeasure,
    caps: &[Cap],
    t_values: &[f64],
    radius: Option<f64>,
    tol: f64,
) -> Result<RvSigmaReport> {
    let r = radius.unwrap_or(match endpoint {
        Endpoint::Zero => 1e-8,
        Endpoint::Infinity => 1e8,
    });
    let base = m.tail_mass(r, &DirectionSet::All)?;
    if !(base > 0.0 && base.is_finite()) {
        return Err(LevyError::InvalidMeasure(format!("tail mass at r = {r:e} is {base:e}")));
    }
    let mut rows = Vec::new();
    for (k, cap) in caps.iter().enumerate() {
        let set = DirectionSet::Caps(vec![cap.clone()]);
        let share = sigma.mass(&set) / sigma.total();
        for &t in t_values {
            let ratio = m.tail_mass(r * t, &set)? / base;
            let prediction = t.powf(rho) * share;
            let pass = if prediction > 0.0 {
                (ratio / prediction - 1.0).abs() <= tol
            } else {
                ratio <= tol
            };
            rows.push(RatioRow {
                cap: k,
                t,
                radius: r,
                ratio,
                prediction,
                pass,
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(RvSigmaReport { rows, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop2Row {
    pub t: f64,
    pub cap: usize,
    pub sigma_d: f64,
    /// `ℓ̂(t) = M(|x|>1/t) / (σ(S) t^{ρ+2+β})`.
    pub ell: f64,
    /// `M(|x|>1/t, D) / (σ(D) t^{ρ+2+β} ℓ̂(t))`.
    pub small_ratio: f64,
    /// `M^β(|x|>t, D) / ((ρ+2+β)/|ρ| σ(D) t^ρ ℓ̂(t))`.
    pub large_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop2Report {
    pub constant: f64,
    pub rows: Vec<Prop2Row>,
    /// Whether `M^β` tails came from the inverted representation (as
    /// opposed to `∫_{|x|<1/t} |x|^{2+β} 1_D M(dx)` for tempered inputs).
    pub closed_form_inversion: bool,
}

impl Prop2Report {
    pub fn max_small_deviation(&self) -> f64 {
        self.rows.iter().map(|r| (r.small_ratio - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_large_deviation(&self) -> f64 {
        self.rows.iter().map(|r| (r.large_ratio - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Evaluate both sides of the tail correspondence between `M` near `0`
/// and `M^β` near `∞`, with asymptotic constant `(ρ+2+β)/|ρ|`, on the caps
/// of the axis partition carrying `σ`-mass.
pub fn prop2_constant_check(
    m: &LevyMeasure,
    beta: f64,
    rho: f64,
    sigma: &SphericalMeasure,
    t_grid: &[f64],
) -> Result<Prop2Report> {
    if !(0.0..=2.0).contains(&beta) {
        return Err(invalid("beta", format!("must lie in [0, 2], got {beta}")));
    }
    if !(rho > -2.0 - beta && rho < 0.0) {
        return Err(invalid("rho", format!("must lie in (-2-β, 0) = ({}, 0), got {rho}", -2.0 - beta)));
    }
    if sigma.dim() != m.dim() {
        return Err(LevyError::DimensionMismatch {
            expected: m.dim(),
            got: sigma.dim(),
        });
    }
    let report = m.moment_class_check(beta)?;
    if !report.member {
        return Err(LevyError::NotInMomentClass {
            beta,
            integral: "∫(|x|²∧|x|^β) M(dx)",
        });
    }
    prop2_ratios(m, beta, rho, sigma, t_grid)
}

/// The ratios of [`prop2_constant_check`] without the moment-class
/// precondition. Both sides only involve `M` on `|x| < 1/t`, so they stay
/// finite when `∫_{|x|>1}|x|^β M(dx)` diverges; `M` must still satisfy
/// `∫_{|x|<1}|x|² M(dx) < ∞`.
pub fn prop2_ratios(m: &LevyMeasure, beta: f64, rho: f64, sigma: &SphericalMeasure, t_grid: &[f64]) -> Result<Prop2Report> {
    if !(0.0..=2.0).contains(&beta) {
        return Err(invalid("beta", format!("must lie in [0, 2], got {beta}")));
    }
    if !(rho > -2.0 - beta && rho < 0.0) {
        return Err(invalid("rho", format!("must lie in (-2-β, 0) = ({}, 0), got {rho}", -2.0 - beta)));
    }
    if sigma.dim() != m.dim() {
        return Err(LevyError::DimensionMismatch {
            expected: m.dim(),
            got: sigma.dim(),
        });
    }
    if !m.radial_moment(2.0, 0.0, 1.0)?.is_finite() {
        return Err(LevyError::NotInMomentClass {
            beta: 2.0,
            integral: "∫_{|x|<1}|x|² M(dx)",
        });
    }
    let inverted = match beta_inversion(m, beta) {
        Ok(inv) => Some(inv),
        Err(LevyError::Unsupported(_) | LevyError::NotInMomentClass { .. }) => None,
        Err(e) => return Err(e),
    };
    let partition = CapPartition::axes(m.dim());
    let constant = (rho + 2.0 + beta) / rho.abs();
    let total = sigma.total();
    let mut rows = Vec::new();
    for &t in t_grid {
        let ell = m.tail_mass(1.0 / t, &DirectionSet::All)? / (total * t.powf(rho + 2.0 + beta));
        let small = m.tail_mass_partition(1.0 / t, &partition)?;
        let large: Vec<f64> = match &inverted {
            Some(inv) => inv.tail_mass_partition(t, &partition)?,
            None => {
                let mut out = vec![0.0; partition.len()];
                for c in m.components() {
                    out[partition.index_of(&c.direction)] += c.weight * c.part.moment(2.0 + beta, 0.0, 1.0 / t)?;
                }
                out
            }
        };
        let mut sigma_cells = vec![0.0; partition.len()];
        for (u, w) in sigma.atoms() {
            sigma_cells[partition.index_of(u)] += w;
        }
        for k in 0..partition.len() {
            let sd = sigma_cells[k];
            if sd <= 0.0 {
                continue;
            }
            rows.push(Prop2Row {
                t,
                cap: k,
                sigma_d: sd,
                ell,
                small_ratio: small[k] / (sd * t.powf(rho + 2.0 + beta) * ell),
                large_ratio: large[k] / (constant * sd * t.powf(rho) * ell),
            });
        }
    }
    Ok(Prop2Report {
        constant,
        rows,
        closed_form_inversion: inverted.is_some(),
    })
}
