//! The Petrovsky lobe `{−1/e < t < 0, |x|² < −4t·log|log|t||}` and its geometry.

use super::{spatial_distance, CellBox, Region, SpacetimePoint};

/// Earliest time of the lobe.
pub const PETROVSKY_T_MIN: f64 = -1.0 / std::f64::consts::E;

/// Omega constant `W(1)`, the root of `L·ln L = 1` written as `1/L`.
const OMEGA: f64 = 0.567_143_290_409_783_8;

/// Squared half-width `−4t·log|log|t||` of the lobe at time `t`; zero outside `(−1/e, 0)`.
pub fn petrovsky_width_sq(t: f64) -> f64 {
    if t <= PETROVSKY_T_MIN || t >= 0.0 {
        return 0.0;
    }
    (-4.0 * t * t.abs().ln().abs().ln()).max(0.0)
}

/// Time at which the lobe is widest. `w` is unimodal on `(−1/e, 0)`.
fn widest_time() -> f64 {
    -(-1.0 / OMEGA).exp()
}

/// Range of the squared width over the closed time window `[a, b]` clipped to the lobe.
pub(crate) fn width_sq_range(a: f64, b: f64) -> Option<(f64, f64)> {
    let a = a.max(PETROVSKY_T_MIN);
    let b = b.min(0.0);
    if a > b {
        return None;
    }
    let (wa, wb) = (petrovsky_width_sq(a), petrovsky_width_sq(b));
    let low = wa.min(wb);
    let peak = widest_time();
    let high = if a <= peak && peak <= b {
        petrovsky_width_sq(peak)
    } else {
        wa.max(wb)
    };
    Some((low, high))
}

pub(crate) fn lobe_contains(p: &SpacetimePoint) -> bool {
    let t = p.t;
    if t <= PETROVSKY_T_MIN || t >= 0.0 {
        return false;
    }
    let r2: f64 = p.x.iter().map(|v| v * v).sum();
    r2 < -4.0 * t * t.abs().ln().abs().ln()
}

pub(crate) fn lobe_classify(cell: &CellBox) -> Region {
    let origin = vec![0.0; cell.dim()];
    let (near, far) = cell.spatial_distance_range(&origin);
    match width_sq_range(cell.t_lo, cell.t_hi) {
        None => Region::Outside,
        Some((low, high)) => {
            if near * near >= high {
                Region::Outside
            } else if cell.t_lo > PETROVSKY_T_MIN && cell.t_hi < 0.0 && far * far < low {
                Region::Inside
            } else {
                Region::Mixed
            }
        }
    }
}

/// Lower bound for the parabolic distance from `(x, t)` to the lobe boundary restricted to the
/// time window `window(D)` of boundary times that could lie within distance `D`.
///
/// The boundary is `{|y| = √w(s)}`; if every admissible `s` keeps `||x| − √w(s)| ≥ D` then no
/// boundary point is closer than `D`. The largest such `D` is located by bisection.
fn lobe_distance_with_window(radius: f64, window: impl Fn(f64) -> (f64, f64), span: f64) -> f64 {
    let gap = |d: f64| -> f64 {
        let (a, b) = window(d);
        match width_sq_range(a, b) {
            None => f64::INFINITY,
            Some((low, high)) => {
                let (lo, hi) = (low.sqrt(), high.sqrt());
                if radius < lo {
                    lo - radius
                } else if radius > hi {
                    radius - hi
                } else {
                    0.0
                }
            }
        }
    };
    let mut hi = radius + span + 1.0;
    if gap(hi) >= hi {
        return f64::INFINITY;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) >= mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Lower bound on the distance from `p` to the part of the lobe boundary at times `≤ p.t`.
pub(crate) fn lobe_past_distance(p: &SpacetimePoint, mirrored: bool) -> f64 {
    let radius = spatial_distance(&p.x, &vec![0.0; p.dim()]);
    let t = p.t;
    let span = (t.abs() + 1.0).sqrt();
    if mirrored {
        // Lobe time s corresponds to physical time −s; physical times in [t − D², t].
        lobe_distance_with_window(radius, |d| (-t, -t + d * d), span)
    } else {
        lobe_distance_with_window(radius, |d| (t - d * d, t), span)
    }
}

/// Lower bound on the distance from `p` to the whole lobe boundary.
pub(crate) fn lobe_distance(p: &SpacetimePoint, mirrored: bool) -> f64 {
    let radius = spatial_distance(&p.x, &vec![0.0; p.dim()]);
    let t = if mirrored { -p.t } else { p.t };
    let span = (t.abs() + 1.0).sqrt();
    lobe_distance_with_window(radius, |d| (t - d * d, t + d * d), span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn petrovsky_membership_values() {
        assert!(lobe_contains(&SpacetimePoint::new(&[0.5], -0.1)));
        assert!(!lobe_contains(&SpacetimePoint::new(&[0.6], -0.1)));
        let w = petrovsky_width_sq(-0.1);
        assert!((w - 0.333_613).abs() < 1e-5, "{w}");
    }

    #[test]
    fn widest_time_is_a_maximum() {
        let peak = widest_time();
        let w = petrovsky_width_sq(peak);
        for dt in [1e-3, 1e-2, 5e-2] {
            assert!(petrovsky_width_sq(peak - dt) < w);
            assert!(petrovsky_width_sq(peak + dt) < w);
        }
    }

    #[test]
    fn distance_bound_is_conservative() {
        // Compare against a brute-force minimum over a dense boundary parameterization.
        let points = [
            SpacetimePoint::new(&[0.0], -0.1),
            SpacetimePoint::new(&[0.3], -0.2),
            SpacetimePoint::new(&[0.0], -0.01),
            SpacetimePoint::new(&[0.9], -0.2),
        ];
        for p in &points {
            let mut best = f64::INFINITY;
            let steps = 200_000;
            for k in 0..=steps {
                let s = PETROVSKY_T_MIN * (k as f64) / steps as f64;
                let w = petrovsky_width_sq(s).sqrt();
                let d = (p.x[0].abs() - w).abs().max((p.t - s).abs().sqrt());
                best = best.min(d);
            }
            let bound = lobe_distance(p, false);
            assert!(bound <= best + 1e-9, "{bound} > {best}");
            assert!(bound >= 0.5 * best, "bound {bound} too loose vs {best}");
        }
    }
}
