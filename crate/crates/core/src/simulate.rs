//! Monte Carlo samplers for single increments `X_t` of Lévy processes.
//!
//! Jumps above a cutoff `eps` are simulated exactly as a compound Poisson
//! sum; jumps below it are replaced by their first-order drift. Every block
//! of samples owns the ChaCha8 stream `(seed, block index)`, and blocks are
//! concatenated in order, so output depends only on `(seed, blocks)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, LevyError, Result};
use crate::geometry::{DirectionSet, SphericalMeasure};
use crate::measure::{ID0Law, LevyMeasure, RosinskiMeasure};
use crate::quad::Tolerance;
use crate::radial::{RadialPart, RadialSampler};
use crate::specfun::TemperingParams;
use crate::stable::S1Params;

/// Default number of independent RNG blocks.
pub const DEFAULT_BLOCKS: usize = 16;
/// Default cap on the expected number of jumps per batch.
pub const DEFAULT_JUMP_BUDGET: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Time horizon of the increment.
    pub t: f64,
    pub n: usize,
    /// Small-jump cutoff; `None` picks the largest cutoff keeping the
    /// expected jump count of the batch within [`DEFAULT_JUMP_BUDGET`].
    pub eps: Option<f64>,
    pub seed: u64,
    pub blocks: usize,
}

impl SimConfig {
    pub fn new(t: f64, n: usize, seed: u64) -> Self {
        SimConfig {
            t,
            n,
            eps: None,
            seed,
            blocks: DEFAULT_BLOCKS,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_blocks(mut self, blocks: usize) -> Self {
        self.blocks = blocks;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(invalid("t", format!("must be positive, got {}", self.t)));
        }
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.blocks == 0 {
            return Err(invalid("blocks", "must be at least 1"));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(invalid("eps", format!("must be positive, got {eps}")));
            }
        }
        Ok(())
    }
}

/// Samples stored row-major, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub dim: usize,
    pub data: Vec<f64>,
    /// Small-jump cutoff actually used (0 for exact samplers).
    pub eps: f64,
    /// `t ∫_{|x|<=eps} |x|² M(dx)`.
    pub bias_bound: f64,
    /// `M(|x| > eps)`.
    pub jump_rate: f64,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Coordinate `k` of every sample.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    /// Projections `⟨z, X_i⟩`.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        self.rows().map(|r| crate::geometry::dot(r, z)).collect()
    }
}

/// Run `draw` on `blocks` independent streams and concatenate the results.
fn run_blocks<F>(n: usize, blocks: usize, seed: u64, dim: usize, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, usize, &mut Vec<f64>) + Sync,
{
    let blocks = blocks.min(n).max(1);
    let sizes: Vec<usize> = (0..blocks).map(|b| n / blocks + usize::from(b < n % blocks)).collect();
    let one = |b: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let mut out = Vec::with_capacity(sizes[b] * dim);
        draw(&mut rng, sizes[b], &mut out);
        out
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..blocks).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<f64>> = (0..blocks).map(one).collect();
    parts.concat()
}

/// `t ∫_{|x|<=eps} |x|² M(dx)`.
pub fn eps_bias_bound(m: &LevyMeasure, t: f64, eps: f64) -> Result<f64> {
    Ok(t * m.radial_moment(2.0, 0.0, eps)?)
}

/// Largest `eps` with `n · t · M(|x| > eps) <= budget`.
pub fn default_eps(m: &LevyMeasure, t: f64, n: usize, budget: f64) -> Result<f64> {
    let target = budget / (n as f64 * t);
    let rate = |eps: f64| m.tail_mass(eps, &DirectionSet::All).unwrap_or(f64::INFINITY);
    // smallest radial scale present in the measure, to resolve finite measures
    let smallest = m
        .components()
        .iter()
        .map(|c| match c.part {
            RadialPart::Point { r } => r,
            RadialPart::TemperedPoint { rho, .. } => rho,
            _ => 1.0,
        })
        .fold(1.0_f64, f64::min);
    let floor = smallest * 1e-12;
    if rate(floor) <= target {
        return Ok(floor);
    }
    crate::quad::solve_decreasing(rate, target, smallest)
}

/// Drift replacing the jumps below `eps`, per unit time:
/// `-∫_{|x|>eps} x/(1+|x|²) M(dx) + ∫_{|x|<=eps} x|x|²/(1+|x|²) M(dx)`.
fn truncation_drift(m: &LevyMeasure, eps: f64) -> Result<Vec<f64>> {
    let tol = Tolerance::new(1e-13, 1e-10);
    let mut drift = vec![0.0; m.dim()];
    for c in m.components() {
        let v = match c.part {
            RadialPart::Point { r } => {
                if r > eps {
                    -r / (1.0 + r * r)
                } else {
                    r * r * r / (1.0 + r * r)
                }
            }
            ref part => {
                let big = part.integrate(|r| r / (1.0 + r * r), eps, f64::INFINITY, tol)?;
                let small = part.integrate(|r| r * r * r / (1.0 + r * r), 0.0, eps, tol)?;
                small - big
            }
        };
        for (d, u) in drift.iter_mut().zip(c.direction.as_slice()) {
            *d += c.weight * v * u;
        }
    }
    Ok(drift)
}

/// `n` samples of `X_t` for `X_1 ~ ID_0(M, b)`.
pub fn sample_increment(law: &ID0Law, cfg: &SimConfig) -> Result<Samples> {
    cfg.validate()?;
    let m = &law.measure;
    let dim = m.dim();
    let eps = match cfg.eps {
        Some(e) => e,
        None => default_eps(m, cfg.t, cfg.n, DEFAULT_JUMP_BUDGET)?,
    };
    let mut samplers: Vec<(RadialSampler, &[f64])> = Vec::new();
    let mut cumulative = Vec::new();
    let mut rate = 0.0;
    for c in m.components() {
        let s = c.part.sampler(eps).map_err(|e| match e {
            LevyError::Divergent(msg) => LevyError::Divergent(format!(
                "{msg}; choose a larger eps or a representation with a finite jump rate"
            )),
            other => other,
        })?;
        let r = c.weight * s.rate();
        if r > 0.0 {
            rate += r;
            cumulative.push(rate);
            samplers.push((s, c.direction.as_slice()));
        }
    }
    let drift = truncation_drift(m, eps)?;
    let base: Vec<f64> = law
        .shift
        .iter()
        .zip(&drift)
        .map(|(b, d)| cfg.t * (b + d))
        .collect();
    let mean_jumps = cfg.t * rate;
    let poisson = if mean_jumps > 0.0 {
        Some(Poisson::new(mean_jumps).map_err(|e| invalid("jump rate", e.to_string()))?)
    } else {
        None
    };
    let data = run_blocks(cfg.n, cfg.blocks, cfg.seed, dim, |rng, count, out| {
        for _ in 0..count {
            let start = out.len();
            out.extend_from_slice(&base);
            let Some(pois) = &poisson else { continue };
            let jumps = pois.sample(rng) as u64;
            for _ in 0..jumps {
                let u: f64 = rng.random::<f64>() * rate;
                let k = cumulative.partition_point(|&c| c <= u).min(samplers.len() - 1);
                let (sampler, dir) = &samplers[k];
                let r = sampler.sample(rng);
                for (x, d) in out[start..].iter_mut().zip(dir.iter()) {
                    *x += r * d;
                }
            }
        }
    });
    Ok(Samples {
        dim,
        data,
        eps,
        bias_bound: eps_bias_bound(m, cfg.t, eps)?,
        jump_rate: rate,
    })
}

/// Increments of the tempered-stable process with Rosiński measure `R`.
pub fn sample_tempered_increment(
    r: &RosinskiMeasure,
    params: TemperingParams,
    b: &[f64],
    cfg: &SimConfig,
) -> Result<Samples> {
    let m = LevyMeasure::tempered(params, r.clone())?;
    sample_increment(&ID0Law::new(m, b.to_vec())?, cfg)
}

/// Exact samples of `S_η(σ, b)` (time 1). In `d = 1` a single
/// Chambers–Mallows–Stuck draw with the skewness of `σ`; in higher
/// dimension a sum over the atoms `u` of `σ` of one-sided stable draws
/// along `u`.
pub fn sample_stable(eta: f64, sigma: &SphericalMeasure, b: &[f64], n: usize, seed: u64) -> Result<Samples> {
    sample_stable_blocks(eta, sigma, b, n, seed, DEFAULT_BLOCKS)
}

pub fn sample_stable_blocks(
    eta: f64,
    sigma: &SphericalMeasure,
    b: &[f64],
    n: usize,
    seed: u64,
    blocks: usize,
) -> Result<Samples> {
    let dim = sigma.dim();
    if b.len() != dim {
        return Err(LevyError::DimensionMismatch { expected: dim, got: b.len() });
    }
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let terms: Vec<(S1Params, Vec<f64>)> = if dim == 1 {
        let (wp, wm) = sigma.half_line_weights()?;
        vec![(S1Params::from_levy(eta, wp, wm, b[0])?, vec![1.0])]
    } else {
        sigma
            .atoms()
            .iter()
            .map(|(u, w)| Ok((S1Params::from_levy(eta, *w, 0.0, 0.0)?, u.as_slice().to_vec())))
            .collect::<Result<_>>()?
    };
    let offset: Vec<f64> = if dim == 1 { vec![0.0] } else { b.to_vec() };
    let data = run_blocks(n, blocks.max(1), seed, dim, |rng, count, out| {
        for _ in 0..count {
            let start = out.len();
            out.extend_from_slice(&offset);
            for (p, u) in &terms {
                let y = p.sample(rng);
                for (x, d) in out[start..].iter_mut().zip(u) {
                    *x += y * d;
                }
            }
        }
    });
    Ok(Samples {
        dim,
        data,
        eps: 0.0,
        bias_bound: 0.0,
        jump_rate: f64::INFINITY,
    })
}

/// Empirical characteristic function `(1/n) Σ exp(i⟨z, X_k⟩)`.
pub fn empirical_char_fn(samples: &Samples, z: &[f64]) -> num_complex::Complex64 {
    let n = samples.len() as f64;
    samples
        .rows()
        .map(|x| num_complex::Complex64::from_polar(1.0, crate::geometry::dot(x, z)))
        .sum::<num_complex::Complex64>()
        / n
}
