//! Sampled boundary classification and test-point generation on the quasi-lateral boundary.

use super::{CellBox, Domain, GeometryError, SpacetimePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    Interior,
    Exterior,
    /// Parabolic boundary point with no forward cube inside the domain.
    Normal,
    /// Parabolic boundary point with some forward cube inside the domain.
    Bottom,
    /// Some backward cube lies in the domain and some forward cube misses it.
    Singular,
    /// Some backward cube lies in the domain and every forward cube meets it.
    SemiSingular,
}

impl BoundaryClass {
    /// Whether the class belongs to the essential boundary.
    pub fn is_essential(self) -> bool {
        matches!(
            self,
            BoundaryClass::Normal | BoundaryClass::Bottom | BoundaryClass::SemiSingular
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub class: BoundaryClass,
    /// Smallest radius at which the cubes were sampled.
    pub finest_scale: f64,
}

/// `[r, r/2, …, r/2^k]`.
pub fn dyadic_scales(r: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|j| r / f64::powi(2.0, j as i32)).collect()
}

const CLASSIFY_SEED: u64 = 0x5eed_c1a5_5f00_0001;

fn uniform_in_ball<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> smallvec::SmallVec<[f64; 4]> {
    let n = center.len();
    let mut dir: smallvec::SmallVec<[f64; 4]> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let u: f64 = rng.random();
    let rho = radius * u.powf(1.0 / n as f64);
    for (i, v) in dir.iter_mut().enumerate() {
        *v = center[i] + rho * *v / norm;
    }
    dir
}

struct HalfCubeCensus {
    inside: usize,
    total: usize,
}

impl HalfCubeCensus {
    fn all_in(&self) -> bool {
        self.inside == self.total
    }
    fn none_in(&self) -> bool {
        self.inside == 0
    }
}

fn census<R: Rng>(
    d: &Domain,
    p: &SpacetimePoint,
    r: f64,
    forward: bool,
    samples: usize,
    rng: &mut R,
) -> HalfCubeCensus {
    let mut inside = 0;
    for _ in 0..samples {
        let x = uniform_in_ball(rng, &p.x, r);
        // Open time window (t − r², t) or (t, t + r²); avoid the excluded endpoint.
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let dt = u * r * r;
        let q = SpacetimePoint {
            x,
            t: if forward { p.t + dt } else { p.t - dt },
        };
        if d.contains(&q) {
            inside += 1;
        }
    }
    HalfCubeCensus { inside, total: samples }
}

/// Classify `p` by sampling backward and forward cubes at the given radii.
///
/// The answer is only as good as the sampling: it is labelled with the finest radius used.
/// A nested pair of cubes whose censuses contradict set inclusion yields `Ambiguous`.
pub fn classify_boundary(
    d: &Domain,
    p: &SpacetimePoint,
    scales: &[f64],
    samples_per_scale: usize,
) -> Result<Classification, GeometryError> {
    if scales.is_empty() || samples_per_scale == 0 {
        return Err(GeometryError::InvalidArgument(
            "need at least one scale and one sample per scale".into(),
        ));
    }
    if scales.windows(2).any(|w| !(w[1] < w[0])) || scales.iter().any(|&r| !(r > 0.0)) {
        return Err(GeometryError::InvalidArgument(
            "scales must be positive and strictly decreasing".into(),
        ));
    }
    let finest_scale = *scales.last().unwrap_or(&0.0);
    if d.contains(p) {
        return Ok(Classification {
            class: BoundaryClass::Interior,
            finest_scale,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(CLASSIFY_SEED);
    let mut backward = Vec::with_capacity(scales.len());
    let mut forward = Vec::with_capacity(scales.len());
    for &r in scales {
        backward.push(census(d, p, r, false, samples_per_scale, &mut rng));
        forward.push(census(d, p, r, true, samples_per_scale, &mut rng));
    }
    // Inclusion monotonicity: properties of a larger cube that must persist in smaller ones.
    for k in 1..scales.len() {
        let contradiction = (backward[k - 1].all_in() && !backward[k].all_in())
            || (forward[k - 1].all_in() && !forward[k].all_in())
            || (forward[k - 1].none_in() && !forward[k].none_in())
            || (backward[k - 1].none_in() && !backward[k].none_in());
        if contradiction {
            return Err(GeometryError::Ambiguous { radius: scales[k] });
        }
    }
    let last = scales.len() - 1;
    let class = if backward[last].none_in() && forward[last].none_in() {
        BoundaryClass::Exterior
    } else if backward.iter().all(|c| !c.all_in()) {
        if forward.iter().any(|c| c.all_in()) {
            BoundaryClass::Bottom
        } else {
            BoundaryClass::Normal
        }
    } else if forward.iter().any(|c| c.none_in()) {
        BoundaryClass::Singular
    } else {
        BoundaryClass::SemiSingular
    };
    Ok(Classification { class, finest_scale })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaPoint {
    pub point: SpacetimePoint,
    /// `√(t₀ − T_min)/4`; infinite when the domain is unbounded below.
    pub max_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaSample {
    pub points: Vec<SigmaPoint>,
    /// Membership-flip tolerance: each point has an interior point within this distance and
    /// is itself exterior.
    pub tol: f64,
}

/// Draw up to `count` points of the quasi-lateral boundary Σ.
///
/// Chords between random points of the boundary windows are bisected wherever membership
/// changes. Points on the initial slice that classify as bottom points, and points on the
/// terminal slice that classify as singular, are discarded.
pub fn sample_sigma(d: &Domain, n: usize, count: usize, seed: u64) -> Result<SigmaSample, GeometryError> {
    if count == 0 {
        return Err(GeometryError::InvalidArgument("count must be at least 1".into()));
    }
    let windows = d.boundary_windows(n, 8.0);
    let tol = 1e-9;
    let mut out = SigmaSample { points: vec![], tol };
    if windows.is_empty() {
        return Ok(out);
    }
    let (t_min, t_max) = (d.t_min(), d.t_max());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 400 * count;
    for _ in 0..max_attempts {
        if out.points.len() >= count {
            break;
        }
        let w = &windows[rng.random_range(0..windows.len())];
        let a = random_in_window(&mut rng, w);
        let b = random_in_window(&mut rng, w);
        let (mut inner, mut outer) = match (d.contains(&a), d.contains(&b)) {
            (true, false) => (a, b),
            (false, true) => (b, a),
            _ => continue,
        };
        for _ in 0..200 {
            if super::parabolic_distance(&inner, &outer) <= tol {
                break;
            }
            let mid = inner.lerp(&outer, 0.5);
            if d.contains(&mid) {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        let q = outer;
        let slice_tol = 1e-6 * (1.0 + q.t.abs());
        let near_initial = t_min.is_finite() && (q.t - t_min).abs() <= slice_tol;
        let near_terminal = t_max.is_finite() && (q.t - t_max).abs() <= slice_tol;
        if near_initial || near_terminal {
            let scales = dyadic_scales(1e-3, 3);
            match classify_boundary(d, &q, &scales, 64) {
                Ok(c) if near_initial && c.class == BoundaryClass::Bottom => continue,
                Ok(c) if near_terminal && c.class == BoundaryClass::Singular => continue,
                Err(_) => continue,
                _ => {}
            }
        }
        let max_radius = if t_min.is_finite() {
            (q.t - t_min).max(0.0).sqrt() / 4.0
        } else {
            f64::INFINITY
        };
        out.points.push(SigmaPoint { point: q, max_radius });
    }
    Ok(out)
}

fn random_in_window<R: Rng>(rng: &mut R, w: &CellBox) -> SpacetimePoint {
    // Enlarge by a tenth so that the exterior around the boundary is also sampled.
    let grow = |lo: f64, hi: f64, u: f64| {
        let pad = 0.1 * (hi - lo) + 1e-3;
        (lo - pad) + u * (hi - lo + 2.0 * pad)
    };
    SpacetimePoint {
        x: (0..w.dim()).map(|i| grow(w.lo[i], w.hi[i], rng.random())).collect(),
        t: grow(w.t_lo, w.t_hi, rng.random()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect() -> Domain {
        Domain::cylinder(&[(-1.0, 1.0)], (0.0, 1.0))
    }

    fn classify(p: SpacetimePoint) -> BoundaryClass {
        classify_boundary(&rect(), &p, &dyadic_scales(0.25, 8), 200)
            .unwrap()
            .class
    }

    #[test]
    fn rectangle_faces() {
        assert_eq!(classify(SpacetimePoint::new(&[0.0], 0.0)), BoundaryClass::Bottom);
        assert_eq!(classify(SpacetimePoint::new(&[0.0], 1.0)), BoundaryClass::Singular);
        assert_eq!(classify(SpacetimePoint::new(&[1.0], 0.5)), BoundaryClass::Normal);
        assert_eq!(classify(SpacetimePoint::new(&[0.0], 0.5)), BoundaryClass::Interior);
        assert_eq!(classify(SpacetimePoint::new(&[3.0], 0.5)), BoundaryClass::Exterior);
    }

    #[test]
    fn semi_singular_obstacle_rim() {
        // Bottom rim of an obstacle: the past is free, the future meets both Ω and the cube.
        let d = Domain::ComplementCubes {
            cubes: vec![super::super::ParabolicCube::full(SpacetimePoint::new(&[0.0], 0.0), 1.0)],
        };
        let rim = SpacetimePoint::new(&[1.0], -1.0);
        let c = classify_boundary(&d, &rim, &dyadic_scales(0.25, 6), 200).unwrap();
        assert_eq!(c.class, BoundaryClass::SemiSingular);
        let bottom = SpacetimePoint::new(&[0.0], -1.0);
        let c = classify_boundary(&d, &bottom, &dyadic_scales(0.25, 6), 200).unwrap();
        assert_eq!(c.class, BoundaryClass::Singular);
    }

    #[test]
    fn bad_scales_rejected() {
        let p = SpacetimePoint::new(&[0.0], 0.0);
        assert!(classify_boundary(&rect(), &p, &[], 10).is_err());
        assert!(classify_boundary(&rect(), &p, &[0.1, 0.2], 10).is_err());
    }

    #[test]
    fn sigma_points_flip_and_avoid_initial_and_terminal_faces() {
        let d = rect();
        let s = sample_sigma(&d, 1, 40, 3).unwrap();
        assert_eq!(s.points.len(), 40);
        for sp in &s.points {
            assert!(!d.contains(&sp.point));
            assert!(d.boundary_distance(&sp.point) <= 2.0 * s.tol);
            assert!(sp.point.t > 1e-7 && sp.point.t < 1.0 - 1e-7);
            assert!((sp.max_radius - sp.point.t.sqrt() / 4.0).abs() < 1e-12);
        }
        let again = sample_sigma(&d, 1, 40, 3).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn full_space_has_empty_sigma() {
        let s = sample_sigma(&Domain::full_space(), 1, 10, 1).unwrap();
        assert!(s.points.is_empty());
    }
}
