//! Norming and centering functions for long- and short-time stable limits
//! of Lévy processes, Monte Carlo limit checks, and convergence criteria
//! for sequences of Lévy or Rosiński measures.

use serde::Serialize;

use crate::error::{invalid, LevyError, Result};
use crate::fourier::GilPelaezCdf;
use crate::geometry::{CapPartition, Direction, DirectionSet, SphericalMeasure};
use crate::inversion::{beta_inversion, k_ratio, rosinski_inversion};
use crate::ks::{band95, ks_one_sample, ks_standard_error};
use crate::measure::{ID0Law, LevyMeasure, MeasureRepr, RosinskiMeasure};
use crate::quad::{solve_decreasing, Tolerance};
use crate::radial::RadialPart;
use crate::regvar::{estimate_rv_index, ols, Endpoint};
use crate::simulate::{default_eps, eps_bias_bound, sample_increment, SimConfig, DEFAULT_BLOCKS};
use crate::specfun::TemperingParams;

/// Largest allowed gap between the fitted tail index and `-η` before a
/// measure is declared not regularly varying with index `-η`.
pub const INDEX_TOLERANCE: f64 = 0.05;
/// Geometric grid on which `h` is tabulated: `10^3 .. 10^40`.
const H_GRID: (f64, f64, usize) = (3.0, 40.0, 8);

/// Spectral directions of `M` at radius `r`: each component direction
/// weighted by its tail mass beyond `r`, normalized to total mass 1.
pub fn spectral_directions(m: &LevyMeasure, r: f64) -> Result<SphericalMeasure> {
    let mut atoms: Vec<(Direction, f64)> = Vec::new();
    for c in m.components() {
        let w = c.weight * c.part.tail(r)?;
        if w <= 0.0 {
            continue;
        }
        match atoms.iter_mut().find(|(u, _)| u.dot(c.direction.as_slice()) > 1.0 - 1e-12) {
            Some((_, acc)) => *acc += w,
            None => atoms.push((c.direction.clone(), w)),
        }
    }
    if atoms.is_empty() {
        return Err(LevyError::InvalidMeasure(format!("no mass beyond radius {r:e}")));
    }
    Ok(SphericalMeasure::new(atoms)?.normalized())
}

/// `r` with `M(|x| > r) = level`.
fn tail_quantile(m: &LevyMeasure, level: f64, guess: f64) -> Result<f64> {
    solve_decreasing(
        |r| m.tail_mass(r, &DirectionSet::All).unwrap_or(f64::INFINITY),
        level,
        guess,
    )
}

/// The centering `c` for which `s (X_t - c) ~ ID_0(M_{t,s}, 0)`, where `X_1 ~
/// law` and `M_{t,s}(B) = t M(B/s)`:
/// `c = t b + t ∫ x [1/(1+s²|x|²) - 1/(1+|x|²)] M(dx)`.
pub fn exact_centering(law: &ID0Law, t: f64, s: f64) -> Result<Vec<f64>> {
    let tol = Tolerance::new(1e-14, 1e-10);
    let k = 1.0 - s * s;
    let g = |r: f64| r * r * r * k / ((1.0 + s * s * r * r) * (1.0 + r * r));
    let mut breaks = [0.0, (1.0 / s).min(1.0), (1.0 / s).max(1.0), f64::INFINITY];
    breaks.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = law.shift.iter().map(|b| t * b).collect();
    for c in law.measure.components() {
        let v = match c.part {
            RadialPart::Point { r } => g(r),
            ref part => breaks
                .windows(2)
                .map(|w| part.integrate(g, w[0], w[1], tol))
                .sum::<Result<f64>>()?,
        };
        for (o, u) in out.iter_mut().zip(c.direction.as_slice()) {
            *o += t * c.weight * v * u;
        }
    }
    Ok(out)
}

/// Long-time norming `a_t` and centering `ζ_t` for a law in the domain of
/// attraction of an η-stable law.
#[derive(Debug, Clone)]
pub struct LongTimeNorming {
    law: ID0Law,
    eta: f64,
    sigma: SphericalMeasure,
}

impl LongTimeNorming {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn law(&self) -> &ID0Law {
        &self.law
    }

    /// Spectral measure of the limit `S_η(σ, 0)`; total mass `η` because
    /// `a_t` normalizes `t M(|x| > 1/a_t)` to 1.
    pub fn sigma(&self) -> &SphericalMeasure {
        &self.sigma
    }

    /// `a_t = 1/r_t` with `t M(|x| > r_t) = 1`.
    pub fn a(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", format!("must be positive, got {t}")));
        }
        Ok(1.0 / tail_quantile(&self.law.measure, 1.0 / t, t.powf(1.0 / self.eta))?)
    }

    /// `ζ_t` such that `a_t(X_t - ζ_t)` has zero shift.
    pub fn zeta(&self, t: f64) -> Result<Vec<f64>> {
        exact_centering(&self.law, t, self.a(t)?)
    }
}

/// Build `a_t` and `ζ_t`. The measure must be regularly varying at infinity
/// with index `-η`, checked by [`estimate_rv_index`].
pub fn long_time_norming(law: &ID0Law, eta: f64) -> Result<LongTimeNorming> {
    if !(eta > 0.0 && eta < 2.0) {
        return Err(invalid("eta", format!("must lie in (0, 2), got {eta}")));
    }
    let m = &law.measure;
    let est = estimate_rv_index(m, Endpoint::Infinity, None, None, INDEX_TOLERANCE).map_err(|e| {
        LevyError::InvalidMeasure(format!("not regularly varying at infinity: {e}"))
    })?;
    if !est.regularly_varying || (est.rho_hat + eta).abs() > INDEX_TOLERANCE {
        return Err(LevyError::InvalidMeasure(format!(
            "tail index at infinity is {:.4} (fit r² {:.5}), expected {:.4}",
            est.rho_hat, est.fit_r2, -eta
        )));
    }
    let far = *est.grid.last().expect("grid is nonempty");
    let sigma = spectral_directions(m, far)?.scaled(eta)?;
    if (eta - 1.0).abs() < 1e-12 && !sigma.is_symmetric(1e-9) {
        return Err(LevyError::Unsupported(
            "η = 1 with an asymmetric measure needs a logarithmic centering".into(),
        ));
    }
    Ok(LongTimeNorming {
        law: law.clone(),
        eta,
        sigma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ScalingMode {
    /// `h(t) = t^{-1} a_t^{-2}`, short-time limit of index `2 - η`.
    Id0,
    /// `h_γ(t) = t^{-1} a_t^{-2-γ}` and the factor `κ^{-1/η}`, short-time
    /// limit of index `2 + γ - η`.
    Ts { params: TemperingParams },
}

/// Norming and centering functions on both time scales, linked through `h`.
#[derive(Debug, Clone)]
pub struct ScalingFunctions {
    pub mode: ScalingMode,
    pub eta: f64,
    /// `κ = K_{2+γ-η}/K_η` in TS mode.
    pub kappa: Option<f64>,
    exponent: f64,
    ln_t: Vec<f64>,
    ln_h: Vec<f64>,
    long: LongTimeNorming,
    primed: Option<ID0Law>,
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let k = xs.partition_point(|v| *v <= x).clamp(1, n - 1);
    let (x0, x1, y0, y1) = (xs[k - 1], xs[k], ys[k - 1], ys[k]);
    y0 + (x - x0) * (y1 - y0) / (x1 - x0)
}

impl ScalingFunctions {
    pub fn long(&self) -> &LongTimeNorming {
        &self.long
    }

    pub fn a(&self, t: f64) -> Result<f64> {
        self.long.a(t)
    }

    pub fn zeta(&self, t: f64) -> Result<Vec<f64>> {
        self.long.zeta(t)
    }

    /// Index of the short-time stable limit.
    pub fn short_index(&self) -> f64 {
        self.exponent - self.eta
    }

    /// Log-log linear interpolant of the tabulated `h`, extended linearly
    /// beyond the grid.
    pub fn h(&self, t: f64) -> f64 {
        interp(&self.ln_t, &self.ln_h, t.ln()).exp()
    }

    /// Inverse of [`Self::h`] by bisection in `ln t`.
    pub fn h_inv(&self, s: f64) -> f64 {
        let target = s.ln();
        let (mut lo, mut hi) = (self.ln_t[0], *self.ln_t.last().expect("grid is nonempty"));
        let ln_h = |x: f64| interp(&self.ln_t, &self.ln_h, x);
        while ln_h(lo) > target {
            lo -= hi - lo;
        }
        while ln_h(hi) < target {
            hi += hi - lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ln_h(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        (0.5 * (lo + hi)).exp()
    }

    /// Short-time norming `b_t = [(1/t) h^{-1}(1/t)]^{1/e}`, times
    /// `κ^{-1/η}` in TS mode, with `e = 2` or `2 + γ`.
    pub fn b(&self, t: f64) -> f64 {
        let base = ((1.0 / t) * self.h_inv(1.0 / t)).powf(1.0 / self.exponent);
        match self.kappa {
            Some(k) => k.powf(-1.0 / self.eta) * base,
            None => base,
        }
    }

    /// The same as [`Self::b`] with `κ` replaced by 1.
    pub fn b_unit_kappa(&self, t: f64) -> f64 {
        ((1.0 / t) * self.h_inv(1.0 / t)).powf(1.0 / self.exponent)
    }

    pub fn primed(&self) -> Option<&ID0Law> {
        self.primed.as_ref()
    }

    /// `ξ_t` such that `b_t(X'_t - ξ_t)` has zero shift. Needs the primed law.
    pub fn xi(&self, t: f64) -> Result<Vec<f64>> {
        let law = self
            .primed
            .as_ref()
            .ok_or_else(|| invalid("primed", "ξ_t needs the law of the inverted process"))?;
        exact_centering(law, t, self.b(t))
    }
}

/// Tabulate `h` from `a_t` and derive the short-time norming. `primed` is
/// the law of the inverted process, used only for `ξ_t`.
pub fn short_time_scaling_from_long(
    long: &LongTimeNorming,
    mode: ScalingMode,
    primed: Option<ID0Law>,
) -> Result<ScalingFunctions> {
    let eta = long.eta;
    let (exponent, kappa) = match mode {
        ScalingMode::Id0 => (2.0, None),
        ScalingMode::Ts { params } => {
            let g = params.gamma();
            (2.0 + g, Some(k_ratio(eta, &params)?))
        }
    };
    let (lo, hi, per) = H_GRID;
    let count = ((hi - lo) * per as f64) as usize + 1;
    let mut ln_t = Vec::with_capacity(count);
    let mut ln_h = Vec::with_capacity(count);
    for k in 0..count {
        let t = 10f64.powf(lo + k as f64 / per as f64);
        let a = long.a(t)?;
        ln_t.push(t.ln());
        ln_h.push(-t.ln() - exponent * a.ln());
    }
    if let Some(k) = ln_h.windows(2).position(|w| w[1] <= w[0]) {
        return Err(LevyError::InvalidMeasure(format!(
            "h is not increasing near t = {:e}; a_t is not regularly varying",
            ln_t[k].exp()
        )));
    }
    Ok(ScalingFunctions {
        mode,
        eta,
        kappa,
        exponent,
        ln_t,
        ln_h,
        long: long.clone(),
        primed,
    })
}

/// Least-squares slope of `ln f` against `ln t` on `count` geometric points.
pub fn loglog_slope<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, count: usize) -> Result<f64> {
    let ts: Vec<f64> = (0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1).max(1) as f64))
        .collect();
    let ys = ts.iter().map(|&t| f(t).map(f64::ln)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    Ok(ols(&xs, &ys).0)
}

/// Settings shared by the Monte Carlo limit checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitConfig {
    pub n: usize,
    pub seed: u64,
    pub blocks: usize,
    /// Target for `s² t ∫_{|x|<=eps} |x|² M(dx)`, the variance of the
    /// neglected small jumps after scaling by `s`.
    pub scaled_bias: f64,
    /// Cap on the expected number of simulated jumps per grid point.
    pub jump_budget: f64,
    /// Final KS threshold; `None` means `1.36/√n + 0.02`.
    pub threshold: Option<f64>,
}

impl LimitConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        LimitConfig {
            n,
            seed,
            blocks: DEFAULT_BLOCKS,
            scaled_bias: 1e-3,
            jump_budget: 2e7,
            threshold: None,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(band95(self.n) + 0.02)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsRow {
    pub t: f64,
    /// `b_t` (short time) or `a_t` (long time).
    pub norming: f64,
    pub eps: f64,
    /// Variance of the neglected small jumps in scaled units.
    pub scaled_bias: f64,
    /// KS distance per projection axis (one entry in `d = 1`).
    pub ks_axes: Vec<f64>,
    pub ks: f64,
    pub band: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub eta: f64,
    pub sigma_total: f64,
    pub rows: Vec<KsRow>,
    pub threshold: f64,
    /// KS nonincreasing along the grid within two standard errors.
    pub monotone: bool,
    pub final_pass: bool,
    pub pass: bool,
}

/// Target CDFs of `S_η(σ, 0)` along each coordinate axis carrying mass.
fn target_cdfs(eta: f64, sigma: &SphericalMeasure) -> Result<Vec<(usize, GilPelaezCdf)>> {
    let target = ID0Law::centered(LevyMeasure::stable(eta, sigma.clone())?);
    let d = sigma.dim();
    if d == 1 {
        return Ok(vec![(0, GilPelaezCdf::new(&target)?)]);
    }
    let mut out = Vec::new();
    for k in 0..d {
        let loads: Vec<(f64, f64)> = sigma
            .atoms()
            .iter()
            .map(|(u, w)| (u.as_slice()[k], *w))
            .filter(|(c, _)| c.abs() > 1e-12)
            .collect();
        if loads.is_empty() {
            continue;
        }
        let psi = |z: f64| {
            let mut v = vec![0.0; d];
            v[k] = z;
            target.char_exponent(&v).unwrap_or(num_complex::Complex64::new(f64::NAN, f64::NAN))
        };
        let tails = |r: f64| {
            let side = |sign: f64| -> f64 {
                loads
                    .iter()
                    .filter(|(c, _)| c * sign > 0.0)
                    .map(|(c, w)| w * c.abs().powf(eta) * r.powf(-eta) / eta)
                    .sum()
            };
            (side(1.0), side(-1.0))
        };
        out.push((k, GilPelaezCdf::from_exponent(&psi, &tails)?));
    }
    Ok(out)
}

/// Cutoff with scaled small-jump variance at most `cfg.scaled_bias`, raised
/// if needed to respect the jump budget.
fn choose_eps(m: &LevyMeasure, t: f64, s: f64, cfg: &LimitConfig) -> Result<f64> {
    let var = |eps: f64| s * s * eps_bias_bound(m, t, eps).unwrap_or(f64::INFINITY);
    let mut eps = solve_decreasing(|e| -var(e), -cfg.scaled_bias, 1.0 / s)?;
    while var(eps) > cfg.scaled_bias && eps > 0.0 {
        eps *= 0.9;
    }
    let jumps = cfg.n as f64 * t * m.tail_mass(eps, &DirectionSet::All)?;
    if jumps > cfg.jump_budget {
        eps = default_eps(m, t, cfg.n, cfg.jump_budget)?.max(eps);
    }
    Ok(eps)
}

#[allow(clippy::too_many_arguments)]
fn ks_row(
    law: &ID0Law,
    t: f64,
    s: f64,
    center: &[f64],
    cdfs: &[(usize, GilPelaezCdf)],
    cfg: &LimitConfig,
    seed: u64,
) -> Result<KsRow> {
    let eps = choose_eps(&law.measure, t, s, cfg)?;
    let sim = SimConfig::new(t, cfg.n, seed).with_eps(eps).with_blocks(cfg.blocks);
    let samples = sample_increment(law, &sim)?;
    let mut ks_axes = Vec::with_capacity(cdfs.len());
    for (k, cdf) in cdfs {
        let y: Vec<f64> = samples.column(*k).iter().map(|x| s * (x - center[*k])).collect();
        ks_axes.push(ks_one_sample(&y, |v| cdf.cdf(v)));
    }
    Ok(KsRow {
        t,
        norming: s,
        eps,
        scaled_bias: s * s * samples.bias_bound,
        ks: ks_axes.iter().cloned().fold(0.0, f64::max),
        ks_axes,
        band: band95(cfg.n),
        standard_error: ks_standard_error(cfg.n),
    })
}

fn verdict(eta: f64, sigma: &SphericalMeasure, rows: Vec<KsRow>, cfg: &LimitConfig) -> LimitReport {
    let se = ks_standard_error(cfg.n);
    let monotone = rows.windows(2).all(|w| w[1].ks <= w[0].ks + 2.0 * se);
    let threshold = cfg.threshold();
    let final_pass = rows.last().is_some_and(|r| r.ks <= threshold);
    LimitReport {
        eta,
        sigma_total: sigma.total(),
        rows,
        threshold,
        monotone,
        final_pass,
        pass: monotone && final_pass,
    }
}

/// `b` with `t M(|x| > 1/b) = level`.
pub fn tail_matched_norming(m: &LevyMeasure, t: f64, level: f64, eta: f64) -> Result<f64> {
    Ok(1.0 / tail_quantile(m, level / t, t.powf(1.0 / eta))?)
}

/// Short-time check of `b_t(X_t - c_t) ⇒ S_η(σ, 0)` along `t_grid`
/// (decreasing). `b_t` solves `t M(|x| > 1/b_t) = σ(S)/η`, which is
/// `t^{-1/η}` times the slowly varying correction of the tail, and `c_t` is
/// the exact centering. When `sigma` is `None` it is taken from the
/// directions of `M` near the origin with total mass `η`.
pub fn short_time_limit_check(
    law: &ID0Law,
    eta: f64,
    sigma: Option<&SphericalMeasure>,
    t_grid: &[f64],
    cfg: &LimitConfig,
) -> Result<LimitReport> {
    if !(eta > 0.0 && eta < 2.0) {
        return Err(invalid("eta", format!("must lie in (0, 2), got {eta}")));
    }
    let sigma = match sigma {
        Some(s) => s.clone(),
        None => spectral_directions(&law.measure, 1e-8)?.scaled(eta)?,
    };
    if sigma.dim() != law.dim() {
        return Err(LevyError::DimensionMismatch {
            expected: law.dim(),
            got: sigma.dim(),
        });
    }
    let cdfs = target_cdfs(eta, &sigma)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let b = tail_matched_norming(&law.measure, t, sigma.total() / eta, eta)?;
        let c = exact_centering(law, t, b)?;
        rows.push(ks_row(law, t, b, &c, &cdfs, cfg, cfg.seed.wrapping_add(i as u64))?);
    }
    Ok(verdict(eta, &sigma, rows, cfg))
}

/// Long-time check of `a_t(X_t - ζ_t) ⇒ S_η(σ, 0)` along `t_grid`
/// (increasing).
pub fn long_time_limit_check(law: &ID0Law, eta: f64, t_grid: &[f64], cfg: &LimitConfig) -> Result<LimitReport> {
    let long = long_time_norming(law, eta)?;
    long_check_with(&long, t_grid, cfg)
}

fn long_check_with(long: &LongTimeNorming, t_grid: &[f64], cfg: &LimitConfig) -> Result<LimitReport> {
    let cdfs = target_cdfs(long.eta, &long.sigma)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let a = long.a(t)?;
        let z = long.zeta(t)?;
        rows.push(ks_row(&long.law, t, a, &z, &cdfs, cfg, cfg.seed.wrapping_add(i as u64))?);
    }
    Ok(verdict(long.eta, &long.sigma, rows, cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormingComparison {
    pub t: f64,
    pub from_h: f64,
    /// Norming matching the tail of the inverted measure to the target.
    pub tail_matched: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub mode: ScalingMode,
    pub long: LimitReport,
    pub short: LimitReport,
    pub short_index: f64,
    pub norming: Vec<NormingComparison>,
}

impl CorrespondenceReport {
    pub fn pass(&self) -> bool {
        self.long.pass && self.short.pass
    }
}

/// The law of the inverted process: `ID_0(M^0, b)`, or in TS mode the
/// tempered law with Rosiński measure `R^γ`.
pub fn inverted_law(law: &ID0Law, mode: ScalingMode) -> Result<ID0Law> {
    let measure = match mode {
        ScalingMode::Id0 => beta_inversion(&law.measure, 0.0)?,
        ScalingMode::Ts { params } => {
            let MeasureRepr::Tempered { rosinski, params: own } = law.measure.repr() else {
                return Err(invalid("law", "TS mode needs a tempered-stable measure"));
            };
            if own != &params {
                return Err(invalid("params", "tempering parameters differ from the law's"));
            }
            let inv: RosinskiMeasure = rosinski_inversion(rosinski, params.gamma())?;
            LevyMeasure::tempered(params, inv)?
        }
    };
    ID0Law::new(measure, law.shift.clone())
}

/// Long-time check of `law` at `t_large` and short-time check of the
/// inverted law at `t_small`, with `b_t` derived from `a_t` through `h`.
pub fn inversion_correspondence_check(
    law: &ID0Law,
    eta: f64,
    mode: ScalingMode,
    t_small: &[f64],
    t_large: &[f64],
    cfg: &LimitConfig,
) -> Result<CorrespondenceReport> {
    let primed = inverted_law(law, mode)?;
    let long = long_time_norming(law, eta)?;
    let scaling = short_time_scaling_from_long(&long, mode, Some(primed.clone()))?;
    let long_report = long_check_with(&long, t_large, cfg)?;
    let eta_short = scaling.short_index();
    let sigma = long.sigma.clone();
    let cdfs = target_cdfs(eta_short, &sigma)?;
    let mut rows = Vec::with_capacity(t_small.len());
    let mut norming = Vec::with_capacity(t_small.len());
    for (i, &t) in t_small.iter().enumerate() {
        let b = scaling.b(t);
        let xi = scaling.xi(t)?;
        let matched = tail_matched_norming(&primed.measure, t, sigma.total() / eta_short, eta_short)?;
        norming.push(NormingComparison {
            t,
            from_h: b,
            tail_matched: matched,
            ratio: b / matched,
        });
        rows.push(ks_row(&primed, t, b, &xi, &cdfs, cfg, cfg.seed.wrapping_add(1000 + i as u64))?);
    }
    Ok(CorrespondenceReport {
        mode,
        long: long_report,
        short: verdict(eta_short, &sigma, rows, cfg),
        short_index: eta_short,
        norming,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SequenceMode {
    /// Terms are Lévy measures; tails weighted by 1.
    Id0,
    /// Terms are Rosiński measures; tails weighted by `|x|^γ`.
    Ts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTerm {
    pub measure: LevyMeasure,
    pub shift: Vec<f64>,
}

impl SequenceTerm {
    pub fn new(measure: LevyMeasure, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != measure.dim() {
            return Err(LevyError::DimensionMismatch {
                expected: measure.dim(),
                got: shift.len(),
            });
        }
        Ok(SequenceTerm { measure, shift })
    }

    pub fn centered(measure: LevyMeasure) -> Self {
        let d = measure.dim();
        SequenceTerm {
            measure,
            shift: vec![0.0; d],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub name: &'static str,
    /// `(grid point, value)`: term index for the first two criteria, `ε`
    /// or `N` for the others.
    pub points: Vec<(f64, f64)>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceReport {
    pub mode: SequenceMode,
    pub gamma: f64,
    pub vague: CriterionReport,
    pub shift: CriterionReport,
    pub small_ball: CriterionReport,
    pub tail: CriterionReport,
}

impl SequenceReport {
    pub fn criteria(&self) -> [&CriterionReport; 4] {
        [&self.vague, &self.shift, &self.small_ball, &self.tail]
    }

    pub fn pass(&self) -> bool {
        self.criteria().iter().all(|c| c.pass)
    }
}

/// Number of radial bumps in the vague-convergence library.
pub const BUMP_COUNT: usize = 12;
/// The bumps cover `|x| ∈ [10^-2, 10^2]`.
const BUMP_RANGE: (f64, f64) = (-2.0, 2.0);

/// Centers and log-half-width of the radial bumps.
fn bumps() -> (Vec<f64>, f64) {
    let (lo, hi) = BUMP_RANGE;
    let step = (hi - lo) / BUMP_COUNT as f64;
    let centers = (0..BUMP_COUNT).map(|k| 10f64.powf(lo + step * (k as f64 + 0.5))).collect();
    (centers, step * std::f64::consts::LN_10)
}

fn bump(r: f64, center: f64, width: f64) -> f64 {
    let s = (r / center).ln() / width;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Integrals of the test-function library against `m`: for each radial bump
/// `φ_k`, first `∫ φ_k(|x|) M(dx)` and then `∫ φ_k(|x|) (1 + ⟨x/|x|, e⟩)/2 M(dx)`
/// for each signed axis `e`.
pub fn test_function_integrals(m: &LevyMeasure) -> Result<Vec<f64>> {
    let (centers, width) = bumps();
    let axes = CapPartition::axes(m.dim());
    let per = 1 + axes.len();
    let tol = Tolerance::new(1e-14, 1e-10);
    let mut out = vec![0.0; centers.len() * per];
    for c in m.components() {
        for (k, &center) in centers.iter().enumerate() {
            let g = |r: f64| bump(r, center, width);
            let (lo, hi) = (center * (-width).exp(), center * width.exp());
            let v = c.weight * c.part.integrate(g, lo, hi, tol)?;
            if v == 0.0 {
                continue;
            }
            out[k * per] += v;
            for (j, e) in axes.centers().iter().enumerate() {
                out[k * per + 1 + j] += v * 0.5 * (1.0 + e.dot(c.direction.as_slice()));
            }
        }
    }
    Ok(out)
}

/// Grid pass rule for the double limits: the final value is within `tol`,
/// or the values are nonincreasing and the last is at most half the first.
fn decays(values: &[f64], tol: f64) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let (first, last) = (values[0], *values.last().expect("grid is nonempty"));
    if last <= tol {
        return true;
    }
    let nonincreasing = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + tol);
    nonincreasing && last <= 0.5 * first
}

/// Maximum over the last half of the sequence, standing in for `limsup_n`.
fn tail_max(values: &[f64]) -> f64 {
    values[values.len() / 2..].iter().cloned().fold(0.0, f64::max)
}

pub const EPS_GRID: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const N_GRID: [f64; 4] = [1e1, 1e2, 1e3, 1e4];

/// Convergence criteria for `terms → limit`: (i) integrals against the
/// test-function library, (ii) shifts, (iii) `limsup_n ∫_{|x|<ε}|x|² M_n` over
/// the ε grid, (iv) `limsup_n ∫_{|x|>N} w(x) M_n` over the N grid, with
/// `w = 1` in ID0 mode and `w = |x|^γ` in TS mode.
pub fn sequence_convergence_check(
    terms: &[SequenceTerm],
    limit: &SequenceTerm,
    mode: SequenceMode,
    gamma: f64,
    tol: f64,
) -> Result<SequenceReport> {
    if terms.is_empty() {
        return Err(invalid("sequence", "needs at least one term"));
    }
    let d = limit.measure.dim();
    if let Some(bad) = terms.iter().find(|t| t.measure.dim() != d) {
        return Err(LevyError::DimensionMismatch {
            expected: d,
            got: bad.measure.dim(),
        });
    }
    let weight = match mode {
        SequenceMode::Id0 => 0.0,
        SequenceMode::Ts => {
            if !(0.0..2.0).contains(&gamma) {
                return Err(invalid("gamma", format!("must lie in [0, 2), got {gamma}")));
            }
            gamma
        }
    };
    let reference = test_function_integrals(&limit.measure)?;
    let mut vague = Vec::with_capacity(terms.len());
    let mut shift = Vec::with_capacity(terms.len());
    for (n, term) in terms.iter().enumerate() {
        let v = test_function_integrals(&term.measure)?;
        let dev = v
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max);
        vague.push((n as f64, dev));
        let s = term
            .shift
            .iter()
            .zip(&limit.shift)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        shift.push((n as f64, s));
    }
    let small: Vec<(f64, f64)> = EPS_GRID
        .iter()
        .map(|&eps| {
            let vals = terms
                .iter()
                .map(|t| t.measure.radial_moment(2.0, 0.0, eps))
                .collect::<Result<Vec<_>>>()?;
            Ok((eps, tail_max(&vals)))
        })
        .collect::<Result<_>>()?;
    let tail: Vec<(f64, f64)> = N_GRID
        .iter()
        .map(|&big| {
            let vals = terms
                .iter()
                .map(|t| t.measure.radial_moment(weight, big, f64::INFINITY))
                .collect::<Result<Vec<_>>>()?;
            Ok((big, tail_max(&vals)))
        })
        .collect::<Result<_>>()?;
    let last_half_ok = |v: &[(f64, f64)]| tail_max(&v.iter().map(|p| p.1).collect::<Vec<_>>()) <= tol;
    let values = |v: &[(f64, f64)]| v.iter().map(|p| p.1).collect::<Vec<_>>();
    Ok(SequenceReport {
        mode,
        gamma: weight,
        vague: CriterionReport {
            name: "vague",
            pass: last_half_ok(&vague),
            points: vague,
        },
        shift: CriterionReport {
            name: "shift",
            pass: last_half_ok(&shift),
            points: shift,
        },
        small_ball: CriterionReport {
            name: "small_ball",
            pass: decays(&values(&small), tol),
            points: small,
        },
        tail: CriterionReport {
            name: "tail",
            pass: decays(&values(&tail), tol),
            points: tail,
        },
    })
}

/// The β-inverted sequence and limit.
pub fn invert_sequence(terms: &[SequenceTerm], limit: &SequenceTerm, beta: f64) -> Result<(Vec<SequenceTerm>, SequenceTerm)> {
    let inv = |t: &SequenceTerm| -> Result<SequenceTerm> {
        SequenceTerm::new(beta_inversion(&t.measure, beta)?, t.shift.clone())
    };
    Ok((terms.iter().map(inv).collect::<Result<_>>()?, inv(limit)?))
}
