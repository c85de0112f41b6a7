//! Space-time points, the parabolic metric, domains and boundary classification.
//!
//! Time carries the units of length squared throughout: a parabolic dilation by
//! `λ` maps `(x, t)` to `(λx, λ²t)` and scales every distance in this module by `λ`.

mod classify;
mod domain;
mod petrovsky;

pub use classify::{
    classify_boundary, dyadic_scales, sample_sigma, BoundaryClass, Classification, SigmaPoint, SigmaSample,
};
pub use domain::{Domain, DomainFile, EssentialDistance, Interval, Region, DOMAIN_SCHEMA_VERSION};
pub use petrovsky::{petrovsky_width_sq, PETROVSKY_T_MIN};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Spatial coordinates are stored inline for the dimensions this crate is used with.
pub type Coords = SmallVec<[f64; 4]>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point {0:?} is not inside the domain")]
    NotInDomain(SpacetimePoint),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("sampling found contradictory containment at radius {radius}")]
    Ambiguous { radius: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// A point `(x, t)` of `ℝⁿ × ℝ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub x: Coords,
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(x: &[f64], t: f64) -> Self {
        Self {
            x: Coords::from_slice(x),
            t,
        }
    }

    pub fn origin(n: usize) -> Self {
        Self {
            x: smallvec::smallvec![0.0; n],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().all(|v| v.is_finite())
    }

    /// Component-wise difference `self − other`.
    pub fn sub(&self, other: &SpacetimePoint) -> SpacetimePoint {
        SpacetimePoint {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
            t: self.t - other.t,
        }
    }

    /// Component-wise sum `self + other`.
    pub fn add(&self, other: &SpacetimePoint) -> SpacetimePoint {
        SpacetimePoint {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            t: self.t + other.t,
        }
    }

    /// Point on the straight space-time chord from `self` (s = 0) to `other` (s = 1).
    pub fn lerp(&self, other: &SpacetimePoint, s: f64) -> SpacetimePoint {
        SpacetimePoint {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + s * (b - a)).collect(),
            t: self.t + s * (other.t - self.t),
        }
    }

    /// Parabolic dilation `(x, t) ↦ (λx, λ²t)`.
    pub fn dilate(&self, lambda: f64) -> SpacetimePoint {
        SpacetimePoint {
            x: self.x.iter().map(|v| lambda * v).collect(),
            t: lambda * lambda * self.t,
        }
    }

    pub fn spatial_norm(&self) -> f64 {
        euclidean(&self.x)
    }
}

pub(crate) fn euclidean(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn spatial_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// `max{|x|, |t|^{1/2}}`.
pub fn parabolic_norm(p: &SpacetimePoint) -> f64 {
    p.spatial_norm().max(p.t.abs().sqrt())
}

/// Parabolic distance `‖p − q‖`.
pub fn parabolic_distance(p: &SpacetimePoint, q: &SpacetimePoint) -> f64 {
    spatial_distance(&p.x, &q.x).max((p.t - q.t).abs().sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CubeKind {
    #[default]
    Full,
    Backward,
    Forward,
}

/// Open parabolic cube: a Euclidean ball of radius `r` in space times a time window of
/// half-length `r²`, optionally restricted to the past or the future of its center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCube {
    pub center: SpacetimePoint,
    #[serde(rename = "r")]
    pub radius: f64,
    #[serde(default)]
    pub kind: CubeKind,
}

impl ParabolicCube {
    pub fn new(center: SpacetimePoint, radius: f64, kind: CubeKind) -> Self {
        Self { center, radius, kind }
    }

    pub fn full(center: SpacetimePoint, radius: f64) -> Self {
        Self::new(center, radius, CubeKind::Full)
    }

    /// Open time window covered by the cube.
    pub fn time_window(&self) -> (f64, f64) {
        let c = self.center.t;
        let r2 = self.radius * self.radius;
        match self.kind {
            CubeKind::Full => (c - r2, c + r2),
            CubeKind::Backward => (c - r2, c),
            CubeKind::Forward => (c, c + r2),
        }
    }

    pub fn contains(&self, q: &SpacetimePoint) -> bool {
        let (lo, hi) = self.time_window();
        q.t > lo && q.t < hi && spatial_distance(&q.x, &self.center.x) < self.radius
    }

    /// Whether `q` lies in the closed cube.
    pub fn closure_contains(&self, q: &SpacetimePoint) -> bool {
        let (lo, hi) = self.time_window();
        q.t >= lo && q.t <= hi && spatial_distance(&q.x, &self.center.x) <= self.radius
    }
}

/// Closed axis-aligned box in space-time. Used for rasterization and box classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellBox {
    pub lo: Coords,
    pub hi: Coords,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl CellBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> SpacetimePoint {
        SpacetimePoint {
            x: self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            t: 0.5 * (self.t_lo + self.t_hi),
        }
    }

    /// Smallest and largest Euclidean distance from `c` to points of the spatial box.
    pub fn spatial_distance_range(&self, c: &[f64]) -> (f64, f64) {
        let mut near = 0.0;
        let mut far = 0.0;
        for ((&ci, &a), &b) in c.iter().zip(&self.lo).zip(&self.hi) {
            let d_near = if ci < a {
                a - ci
            } else if ci > b {
                ci - b
            } else {
                0.0
            };
            let d_far = (ci - a).abs().max((ci - b).abs());
            near += d_near * d_near;
            far += d_far * d_far;
        }
        (near.sqrt(), far.sqrt())
    }

    /// Mirror image under `t ↦ −t`.
    pub fn time_reflected(&self) -> CellBox {
        CellBox {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            t_lo: -self.t_hi,
            t_hi: -self.t_lo,
        }
    }
}

/// Time-gap to the closed interval `[lo, hi]`.
pub(crate) fn interval_gap(t: f64, lo: f64, hi: f64) -> f64 {
    if t < lo {
        lo - t
    } else if t > hi {
        t - hi
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norm_examples() {
        assert_eq!(parabolic_norm(&SpacetimePoint::new(&[0.0], 0.0)), 0.0);
        assert_eq!(parabolic_norm(&SpacetimePoint::new(&[3.0, 0.0], -4.0)), 3.0);
        assert_eq!(parabolic_norm(&SpacetimePoint::new(&[0.5], -1.0)), 1.0);
    }

    #[test]
    fn cube_kinds_split_the_time_window() {
        let c = SpacetimePoint::new(&[0.0], 0.0);
        let back = ParabolicCube::new(c.clone(), 1.0, CubeKind::Backward);
        let fwd = ParabolicCube::new(c.clone(), 1.0, CubeKind::Forward);
        let q_past = SpacetimePoint::new(&[0.5], -0.5);
        let q_future = SpacetimePoint::new(&[0.5], 0.5);
        assert!(back.contains(&q_past) && !back.contains(&q_future));
        assert!(fwd.contains(&q_future) && !fwd.contains(&q_past));
        assert!(!back.contains(&c) && !fwd.contains(&c));
        assert!(ParabolicCube::full(c.clone(), 1.0).contains(&c));
    }

    fn point2() -> impl Strategy<Value = SpacetimePoint> {
        (-5.0f64..5.0, -5.0f64..5.0, -10.0f64..10.0).prop_map(|(a, b, t)| SpacetimePoint::new(&[a, b], t))
    }

    proptest! {
        #[test]
        fn norm_scales_parabolically(p in point2(), lambda in 0.01f64..100.0) {
            let lhs = parabolic_norm(&p.dilate(lambda));
            let rhs = lambda * parabolic_norm(&p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn triangle_inequality(p in point2(), q in point2(), r in point2()) {
            let pq = parabolic_distance(&p, &q);
            let bound = parabolic_distance(&p, &r) + parabolic_distance(&r, &q);
            prop_assert!(pq <= bound + 1e-12);
        }
    }
}
