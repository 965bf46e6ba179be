//! Points on the unit sphere, finite spherical measures and spherical caps.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LevyError, Result};

/// A unit vector in `R^d`, renormalized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(invalid("direction", "empty vector"));
        }
        let n = norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("direction", format!("cannot normalize {v:?}")));
        }
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Direction(v));
        }
        Ok(Direction(v.into_iter().map(|x| x / n).collect()))
    }

    /// Direction of a nonzero point.
    pub fn of(x: &[f64]) -> Result<Self> {
        Direction::new(x.to_vec())
    }

    /// The `k`-th coordinate axis, with sign.
    pub fn axis(dim: usize, k: usize, positive: bool) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = if positive { 1.0 } else { -1.0 };
        Direction(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, z: &[f64]) -> f64 {
        dot(&self.0, z)
    }

    pub fn neg(&self) -> Self {
        Direction(self.0.iter().map(|x| -x).collect())
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = LevyError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Direction::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// A finite measure on the sphere given by weighted directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalMeasure {
    atoms: Vec<(Direction, f64)>,
}

impl SphericalMeasure {
    pub fn new(atoms: Vec<(Direction, f64)>) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return Err(invalid("sigma", "needs at least one atom"));
        };
        let dim = first.0.dim();
        for (u, w) in &atoms {
            if u.dim() != dim {
                return Err(LevyError::DimensionMismatch {
                    expected: dim,
                    got: u.dim(),
                });
            }
            if !(*w > 0.0) || !w.is_finite() {
                return Err(invalid("sigma", format!("weights must be positive and finite, got {w}")));
            }
        }
        Ok(SphericalMeasure { atoms })
    }

    /// Unit mass at a single direction.
    pub fn point(u: Direction, w: f64) -> Result<Self> {
        SphericalMeasure::new(vec![(u, w)])
    }

    /// One-dimensional measure with weights on `+1` and `-1`.
    pub fn two_sided(w_plus: f64, w_minus: f64) -> Result<Self> {
        let mut atoms = Vec::new();
        if w_plus > 0.0 {
            atoms.push((Direction::axis(1, 0, true), w_plus));
        }
        if w_minus > 0.0 {
            atoms.push((Direction::axis(1, 0, false), w_minus));
        }
        SphericalMeasure::new(atoms)
    }

    pub fn atoms(&self) -> &[(Direction, f64)] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.dim()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn mass(&self, set: &DirectionSet) -> f64 {
        self.atoms
            .iter()
            .filter(|(u, _)| set.contains(u))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        SphericalMeasure::new(self.atoms.iter().map(|(u, w)| (u.clone(), w * c)).collect())
    }

    pub fn normalized(&self) -> Self {
        let t = self.total();
        SphericalMeasure {
            atoms: self.atoms.iter().map(|(u, w)| (u.clone(), w / t)).collect(),
        }
    }

    /// Weights on the positive and negative half-line (d = 1 only).
    pub fn half_line_weights(&self) -> Result<(f64, f64)> {
        if self.dim() != 1 {
            return Err(LevyError::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            });
        }
        let mut plus = 0.0;
        let mut minus = 0.0;
        for (u, w) in &self.atoms {
            if u.as_slice()[0] > 0.0 {
                plus += w;
            } else {
                minus += w;
            }
        }
        Ok((plus, minus))
    }

    /// Invariant under `u -> -u`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.atoms.iter().all(|(u, w)| {
            let mirror = u.neg();
            let m: f64 = self
                .atoms
                .iter()
                .filter(|(v, _)| dist(v.as_slice(), mirror.as_slice()) < 1e-12)
                .map(|(_, w)| w)
                .sum();
            (m - w).abs() <= tol * w.max(1.0)
        })
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Spherical cap `{u : angle(u, center) <= half_angle}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: Direction,
    pub half_angle: f64,
}

impl Cap {
    pub fn new(center: Direction, half_angle: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&half_angle) {
            return Err(invalid("half_angle", format!("must lie in [0, pi], got {half_angle}")));
        }
        Ok(Cap { center, half_angle })
    }

    pub fn contains(&self, u: &Direction) -> bool {
        let c = self.center.dot(u.as_slice()).clamp(-1.0, 1.0);
        c.acos() <= self.half_angle + 1e-12
    }
}

/// Direction sets used as test sets `D`: the whole sphere or a finite
/// union of caps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum DirectionSet {
    #[default]
    All,
    Caps(Vec<Cap>),
}

impl DirectionSet {
    pub fn cap(center: Direction, half_angle: f64) -> Result<Self> {
        Ok(DirectionSet::Caps(vec![Cap::new(center, half_angle)?]))
    }

    pub fn contains(&self, u: &Direction) -> bool {
        match self {
            DirectionSet::All => true,
            DirectionSet::Caps(caps) => caps.iter().any(|c| c.contains(u)),
        }
    }
}

/// The `2d` axis caps `±e_k` with half-angle `π/4`, treated as a partition:
/// each direction belongs to the cap whose center it is closest to, with
/// ties going to the lower index. This is the boundary convention used for
/// directions falling exactly on shared cap boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct CapPartition {
    centers: Vec<Direction>,
}

impl CapPartition {
    pub fn axes(dim: usize) -> Self {
        let mut centers = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            centers.push(Direction::axis(dim, k, true));
            centers.push(Direction::axis(dim, k, false));
        }
        CapPartition { centers }
    }

    pub fn from_centers(centers: Vec<Direction>) -> Self {
        CapPartition { centers }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Direction] {
        &self.centers
    }

    pub fn index_of(&self, u: &Direction) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (k, c) in self.centers.iter().enumerate() {
            let d = c.dot(u.as_slice());
            if d > best_dot + 1e-12 {
                best = k;
                best_dot = d;
            }
        }
        best
    }

    /// Cap `k` as a plain cap (half-angle π/4 for the axis partition).
    pub fn cap(&self, k: usize) -> Cap {
        Cap {
            center: self.centers[k].clone(),
            half_angle: std::f64::consts::FRAC_PI_4,
        }
    }
}
