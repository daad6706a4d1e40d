//! Unit torus geometry: wrap-around distances under an `L_p` norm, ball
//! volumes, and uniform sampling on `[0,1)^d`.
//!
//! Points are stored as raw coordinates in `[0,1)`. All periodic reasoning
//! lives in [`MetricConfig::distance`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use statrs::function::gamma::gamma;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {index} = {value} is outside [0, 1)")]
    CoordinateOutOfRange { index: usize, value: f64 },
    #[error("invalid norm `{0}` (expected a finite p >= 1 or `inf`)")]
    InvalidNorm(String),
    #[error("radius and volume must be finite and non-negative, got {0}")]
    NegativeMeasure(f64),
}

/// Norm selector for the torus metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// Finite `p >= 1`.
    P(f64),
    Infinity,
}

impl Norm {
    pub const L1: Norm = Norm::P(1.0);
    pub const L2: Norm = Norm::P(2.0);

    fn validate(self) -> Result<(), GeometryError> {
        match self {
            Norm::P(p) if !(p.is_finite() && p >= 1.0) => Err(GeometryError::InvalidNorm(p.to_string())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::P(p) => write!(f, "{p}"),
            Norm::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Norm {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Norm::Infinity);
        }
        let p: f64 = s.parse().map_err(|_| GeometryError::InvalidNorm(s.to_string()))?;
        let norm = Norm::P(p);
        norm.validate()?;
        Ok(norm)
    }
}

/// Dimension and norm of the unit torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    dim: usize,
    norm: Norm,
}

impl MetricConfig {
    pub fn new(dim: usize, norm: Norm) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        norm.validate()?;
        Ok(Self { dim, norm })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// Torus distance between two coordinate slices of length `dim`.
    ///
    /// Each axis contributes `min(|a - b|, 1 - |a - b|)`; the per-axis
    /// gaps are then composed through the configured norm. This equals the
    /// minimum of `‖a - b + u‖_p` over all shifts `u ∈ {-1,0,1}^d`.
    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.dim);
        debug_assert_eq!(b.len(), self.dim);
        let gap = |(x, y): (&f64, &f64)| {
            let delta = (x - y).abs();
            delta.min(1.0 - delta)
        };
        if self.dim == 1 {
            return gap((&a[0], &b[0]));
        }
        let gaps = a.iter().zip(b);
        match self.norm {
            Norm::Infinity => gaps.map(gap).fold(0.0, f64::max),
            Norm::P(1.0) => gaps.map(gap).sum(),
            Norm::P(2.0) => gaps.map(gap).map(|g| g * g).sum::<f64>().sqrt(),
            Norm::P(p) => gaps.map(gap).map(|g| g.powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// Volume of the unit ball of the configured norm in `dim` dimensions.
    pub fn unit_ball_volume(&self) -> f64 {
        let d = self.dim;
        match self.norm {
            Norm::Infinity => 2f64.powi(d as i32),
            Norm::P(1.0) => (1..=d).fold(1.0, |acc, k| acc * 2.0 / k as f64),
            Norm::P(2.0) => {
                // V_0 = 1, V_1 = 2, V_k = V_{k-2} * 2π / k
                let (mut even, mut odd) = (1.0, 2.0);
                for k in 2..=d {
                    if k % 2 == 0 {
                        even *= 2.0 * PI / k as f64;
                    } else {
                        odd *= 2.0 * PI / k as f64;
                    }
                }
                if d.is_multiple_of(2) {
                    even
                } else {
                    odd
                }
            }
            Norm::P(p) => {
                let g = gamma(1.0 + 1.0 / p);
                (2.0 * g).powi(d as i32) / gamma(1.0 + d as f64 / p)
            }
        }
    }

    /// Largest torus distance between any two points: `(1/2)·d^{1/p}`.
    pub fn diameter(&self) -> f64 {
        match self.norm {
            Norm::Infinity => 0.5,
            Norm::P(p) => 0.5 * (self.dim as f64).powf(1.0 / p),
        }
    }

    /// `c_p · r^d`. Only a true torus volume while the ball does not wrap
    /// onto itself; callers clamp volumes at 1.
    #[inline]
    pub fn ball_volume(&self, radius: f64) -> f64 {
        self.unit_ball_volume() * radius.powi(self.dim as i32)
    }

    /// Inverse of [`ball_volume`](Self::ball_volume): `(v / c_p)^{1/d}`.
    #[inline]
    pub fn radius_for_volume(&self, volume: f64) -> f64 {
        let scaled = volume / self.unit_ball_volume();
        match self.dim {
            1 => scaled,
            2 => scaled.sqrt(),
            3 => scaled.cbrt(),
            d => scaled.powf(1.0 / d as f64),
        }
    }

    /// Draws a point with each coordinate independently uniform on `[0,1)`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point((0..self.dim).map(|_| rng.random::<f64>()).collect())
    }
}

/// A position in the unit torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        for (index, &value) in coords.iter().enumerate() {
            if !(0.0..1.0).contains(&value) {
                return Err(GeometryError::CoordinateOutOfRange { index, value });
            }
        }
        Ok(Point(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// Checked torus distance between two points.
pub fn torus_distance(x: &Point, y: &Point, cfg: &MetricConfig) -> Result<f64, GeometryError> {
    for p in [x, y] {
        if p.dim() != cfg.dim() {
            return Err(GeometryError::DimensionMismatch { expected: cfg.dim(), found: p.dim() });
        }
    }
    Ok(cfg.distance(x.coords(), y.coords()))
}

pub fn ball_volume(radius: f64, cfg: &MetricConfig) -> Result<f64, GeometryError> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(GeometryError::NegativeMeasure(radius));
    }
    Ok(cfg.ball_volume(radius))
}

pub fn radius_for_volume(volume: f64, cfg: &MetricConfig) -> Result<f64, GeometryError> {
    if !(volume.is_finite() && volume >= 0.0) {
        return Err(GeometryError::NegativeMeasure(volume));
    }
    Ok(cfg.radius_for_volume(volume))
}

pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, cfg: &MetricConfig) -> Point {
    cfg.sample_uniform(rng)
}
