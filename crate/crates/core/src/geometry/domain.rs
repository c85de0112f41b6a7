//! Space-time domains as trees of primitives and set combinators.
//!
//! Every node answers four kinds of queries:
//! * membership of a point in the open set,
//! * conservative classification of a closed box (inside, outside, or undecided),
//! * a lower bound on the parabolic distance to the boundary, optionally only the past part,
//! * time thresholds below or above which the set is known to be everything or nothing.
//!
//! Distances on combinators use `∂(A ∪ B) ⊆ ∂A ∪ ∂B` (same for `∩`) and `∂(Aᶜ) = ∂A`, so the
//! minimum over children is always a valid lower bound.

use super::petrovsky::{lobe_classify, lobe_contains, lobe_distance, lobe_past_distance};
use super::{
    interval_gap, parabolic_distance, spatial_distance, CellBox, GeometryError, ParabolicCube, SpacetimePoint,
    PETROVSKY_T_MIN,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Version tag of the JSON domain schema.
pub const DOMAIN_SCHEMA_VERSION: u32 = 1;

/// Closed or open interval endpoints; infinite endpoints are written as `"inf"` / `"-inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval(pub f64, pub f64);

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval(lo, hi)
    }
    pub fn everything() -> Self {
        Interval(f64::NEG_INFINITY, f64::INFINITY)
    }
    pub fn lo(&self) -> f64 {
        self.0
    }
    pub fn hi(&self) -> f64 {
        self.1
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        vec![crate::serde_float::encode(self.0), crate::serde_float::encode(self.1)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<serde_json::Value> = Vec::deserialize(d)?;
        if raw.len() != 2 {
            return Err(serde::de::Error::custom("interval must have two endpoints"));
        }
        let lo = crate::serde_float::decode(&raw[0]).map_err(serde::de::Error::custom)?;
        let hi = crate::serde_float::decode(&raw[1]).map_err(serde::de::Error::custom)?;
        Ok(Interval(lo, hi))
    }
}

/// Result of classifying a closed box against an open set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Every point of the box lies in the set.
    Inside,
    /// No point of the box lies in the set.
    Outside,
    /// Undecided at this resolution.
    Mixed,
}

impl Region {
    fn complement(self) -> Region {
        match self {
            Region::Inside => Region::Outside,
            Region::Outside => Region::Inside,
            Region::Mixed => Region::Mixed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// Open spatial box times an open time interval. Bounds may be infinite.
    Cylinder {
        #[serde(rename = "box")]
        spatial: Vec<Interval>,
        time: Interval,
    },
    /// Open Euclidean ball times an open time interval.
    BallCylinder {
        center: Vec<f64>,
        radius: f64,
        time: Interval,
    },
    /// `{t < before}` or `{t > after}`; exactly one of the two is present.
    HalfSlab {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        before: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        after: Option<f64>,
    },
    Cube(ParabolicCube),
    Petrovsky {
        reflected: bool,
    },
    /// Whole space with the given closed cubes removed.
    ComplementCubes {
        cubes: Vec<ParabolicCube>,
    },
    Union {
        args: Vec<Domain>,
    },
    Intersection {
        args: Vec<Domain>,
    },
    Complement {
        args: Vec<Domain>,
    },
}

/// Versioned on-disk wrapper. Bare domain objects are accepted too.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainFile {
    pub version: u32,
    pub domain: Domain,
}

impl DomainFile {
    pub fn parse(text: &str) -> Result<Domain, GeometryError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| GeometryError::InvalidDomain(e.to_string()))?;
        let domain = if value.get("version").is_some() {
            let file: DomainFile =
                serde_json::from_value(value).map_err(|e| GeometryError::InvalidDomain(e.to_string()))?;
            if file.version != DOMAIN_SCHEMA_VERSION {
                return Err(GeometryError::InvalidDomain(format!(
                    "unsupported schema version {}",
                    file.version
                )));
            }
            file.domain
        } else {
            serde_json::from_value(value).map_err(|e| GeometryError::InvalidDomain(e.to_string()))?
        };
        domain.validate()?;
        Ok(domain)
    }
}

/// Distance from a point to the essential boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EssentialDistance {
    pub value: f64,
    /// Zero for exact answers; otherwise the point-cloud spacing behind the lower bound.
    pub resolution: f64,
    pub exact: bool,
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn min_req(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        _ => None,
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn max_req(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    }
}

/// Parabolic distance from an exterior point to a closed product set
/// `spatial_gap`-away in space and `[lo, hi]` in time.
fn product_gap(spatial_gap: f64, t: f64, lo: f64, hi: f64) -> f64 {
    spatial_gap.max(interval_gap(t, lo, hi).sqrt())
}

/// A product set `S × (lo, hi)` seen from one point: whether its spatial part contains the
/// point and the spatial distance to `∂S`.
struct ProductSet {
    inside_space: bool,
    space_gap: f64,
    lo: f64,
    hi: f64,
}

impl ProductSet {
    fn contains(&self, t: f64) -> bool {
        self.inside_space && t > self.lo && t < self.hi
    }

    /// Distance to the whole boundary.
    fn boundary_distance(&self, t: f64) -> f64 {
        if self.contains(t) {
            self.space_gap.min((t - self.lo).sqrt()).min((self.hi - t).sqrt())
        } else if self.inside_space {
            interval_gap(t, self.lo, self.hi).sqrt()
        } else {
            product_gap(self.space_gap, t, self.lo, self.hi)
        }
    }

    /// Distance to the boundary points with time `≤ t`.
    fn past_distance(&self, t: f64) -> f64 {
        if self.contains(t) {
            self.space_gap.min((t - self.lo).sqrt())
        } else if t < self.lo {
            f64::INFINITY
        } else if self.inside_space {
            // At or above the top face, or exactly on the bottom face.
            if t >= self.hi {
                (t - self.hi).sqrt()
            } else {
                0.0
            }
        } else {
            product_gap(self.space_gap, t, self.lo, self.hi.min(t))
        }
    }

    /// Distance to the essential part: lateral surface and bottom face.
    fn essential_distance(&self, t: f64) -> f64 {
        self.space_gap.min((t - self.lo).sqrt())
    }
}

fn box_product(spatial: &[Interval], time: Interval, p: &SpacetimePoint) -> ProductSet {
    let mut inside = true;
    let mut inner = f64::INFINITY;
    let mut outer = 0.0;
    for (i, iv) in spatial.iter().enumerate() {
        let x = p.x[i];
        if x > iv.lo() && x < iv.hi() {
            inner = inner.min(x - iv.lo()).min(iv.hi() - x);
        } else {
            inside = false;
            let g = interval_gap(x, iv.lo(), iv.hi());
            outer += g * g;
        }
    }
    ProductSet {
        inside_space: inside,
        space_gap: if inside { inner } else { outer.sqrt() },
        lo: time.lo(),
        hi: time.hi(),
    }
}

fn ball_product(center: &[f64], radius: f64, lo: f64, hi: f64, p: &SpacetimePoint) -> ProductSet {
    let d = spatial_distance(&p.x, center);
    ProductSet {
        inside_space: d < radius,
        space_gap: (d - radius).abs(),
        lo,
        hi,
    }
}

fn ball_box_region(center: &[f64], radius: f64, lo: f64, hi: f64, cell: &CellBox) -> Region {
    let (near, far) = cell.spatial_distance_range(center);
    if near >= radius || cell.t_hi <= lo || cell.t_lo >= hi {
        Region::Outside
    } else if far < radius && cell.t_lo > lo && cell.t_hi < hi {
        Region::Inside
    } else {
        Region::Mixed
    }
}

impl Domain {
    pub fn cylinder(spatial: &[(f64, f64)], time: (f64, f64)) -> Domain {
        Domain::Cylinder {
            spatial: spatial.iter().map(|&(a, b)| Interval(a, b)).collect(),
            time: Interval(time.0, time.1),
        }
    }

    pub fn ball_cylinder(center: &[f64], radius: f64, time: (f64, f64)) -> Domain {
        Domain::BallCylinder {
            center: center.to_vec(),
            radius,
            time: Interval(time.0, time.1),
        }
    }

    /// `{t < t0}`.
    pub fn before(t0: f64) -> Domain {
        Domain::HalfSlab {
            before: Some(t0),
            after: None,
        }
    }

    /// `{t > t0}`.
    pub fn after(t0: f64) -> Domain {
        Domain::HalfSlab {
            before: None,
            after: Some(t0),
        }
    }

    pub fn full_space() -> Domain {
        Domain::ComplementCubes { cubes: vec![] }
    }

    pub fn complement(d: Domain) -> Domain {
        Domain::Complement { args: vec![d] }
    }

    pub fn union(args: Vec<Domain>) -> Domain {
        Domain::Union { args }
    }

    pub fn intersection(args: Vec<Domain>) -> Domain {
        Domain::Intersection { args }
    }

    /// Structural checks that serde cannot express.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: &str| Err(GeometryError::InvalidDomain(m.to_string()));
        match self {
            Domain::Cylinder { spatial, time } => {
                if spatial.is_empty() {
                    return bad("cylinder needs at least one spatial interval");
                }
                if spatial.iter().chain([time]).any(|iv| !(iv.lo() < iv.hi())) {
                    return bad("cylinder intervals must satisfy lo < hi");
                }
            }
            Domain::BallCylinder { center, radius, time } => {
                if center.is_empty() || !(*radius > 0.0) || !(time.lo() < time.hi()) {
                    return bad("ball cylinder needs a center, positive radius and lo < hi");
                }
            }
            Domain::HalfSlab { before, after } => {
                if before.is_some() == after.is_some() {
                    return bad("half_slab takes exactly one of `before` or `after`");
                }
            }
            Domain::Cube(c) => {
                if !(c.radius > 0.0) || !c.center.is_finite() {
                    return bad("cube radius must be positive and its center finite");
                }
            }
            Domain::Petrovsky { .. } => {}
            Domain::ComplementCubes { cubes } => {
                if cubes.iter().any(|c| !(c.radius > 0.0)) {
                    return bad("obstacle radii must be positive");
                }
                if let Some(first) = cubes.first() {
                    if cubes.iter().any(|c| c.center.dim() != first.center.dim()) {
                        return bad("obstacles must share a dimension");
                    }
                }
            }
            Domain::Union { args } | Domain::Intersection { args } => {
                if args.is_empty() {
                    return bad("union/intersection need at least one argument");
                }
                for a in args {
                    a.validate()?;
                }
            }
            Domain::Complement { args } => {
                if args.len() != 1 {
                    return bad("complement takes exactly one argument");
                }
                args[0].validate()?;
            }
        }
        if let Some(n) = self.dim() {
            if !self.dims_agree(n) {
                return bad("children disagree on the spatial dimension");
            }
        }
        Ok(())
    }

    fn dims_agree(&self, n: usize) -> bool {
        match self.dim() {
            Some(m) if m != n => false,
            _ => self.children().iter().all(|c| c.dims_agree(n)),
        }
    }

    fn children(&self) -> &[Domain] {
        match self {
            Domain::Union { args } | Domain::Intersection { args } | Domain::Complement { args } => args,
            _ => &[],
        }
    }

    /// Spatial dimension fixed by the domain, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Domain::Cylinder { spatial, .. } => Some(spatial.len()),
            Domain::BallCylinder { center, .. } => Some(center.len()),
            Domain::Cube(c) => Some(c.center.dim()),
            Domain::ComplementCubes { cubes } => cubes.first().map(|c| c.center.dim()),
            Domain::HalfSlab { .. } | Domain::Petrovsky { .. } => None,
            _ => self.children().iter().find_map(|c| c.dim()),
        }
    }

    /// Membership in the open set. Boundary points are exterior.
    pub fn contains(&self, p: &SpacetimePoint) -> bool {
        match self {
            Domain::Cylinder { spatial, time } => {
                p.t > time.lo()
                    && p.t < time.hi()
                    && spatial.iter().zip(&p.x).all(|(iv, &x)| x > iv.lo() && x < iv.hi())
            }
            Domain::BallCylinder { center, radius, time } => {
                p.t > time.lo() && p.t < time.hi() && spatial_distance(&p.x, center) < *radius
            }
            Domain::HalfSlab { before, after } => match (before, after) {
                (Some(b), _) => p.t < *b,
                (None, Some(a)) => p.t > *a,
                _ => false,
            },
            Domain::Cube(c) => c.contains(p),
            Domain::Petrovsky { reflected } => lobe_contains(p) || (*reflected && lobe_contains(&mirror(p))),
            Domain::ComplementCubes { cubes } => cubes.iter().all(|c| !c.closure_contains(p)),
            Domain::Union { args } => args.iter().any(|d| d.contains(p)),
            Domain::Intersection { args } => args.iter().all(|d| d.contains(p)),
            Domain::Complement { args } => !args[0].contains(p),
        }
    }

    /// Conservative classification of the closed box `cell`.
    pub fn classify_box(&self, cell: &CellBox) -> Region {
        match self {
            Domain::Cylinder { spatial, time } => {
                let mut inside = cell.t_lo > time.lo() && cell.t_hi < time.hi();
                let mut outside = cell.t_hi <= time.lo() || cell.t_lo >= time.hi();
                for (i, iv) in spatial.iter().enumerate() {
                    inside &= cell.lo[i] > iv.lo() && cell.hi[i] < iv.hi();
                    outside |= cell.hi[i] <= iv.lo() || cell.lo[i] >= iv.hi();
                }
                if outside {
                    Region::Outside
                } else if inside {
                    Region::Inside
                } else {
                    Region::Mixed
                }
            }
            Domain::BallCylinder { center, radius, time } => {
                ball_box_region(center, *radius, time.lo(), time.hi(), cell)
            }
            Domain::HalfSlab { before, after } => {
                let (inside, outside) = match (before, after) {
                    (Some(b), _) => (cell.t_hi < *b, cell.t_lo >= *b),
                    (None, Some(a)) => (cell.t_lo > *a, cell.t_hi <= *a),
                    _ => (false, true),
                };
                if outside {
                    Region::Outside
                } else if inside {
                    Region::Inside
                } else {
                    Region::Mixed
                }
            }
            Domain::Cube(c) => {
                let (lo, hi) = c.time_window();
                ball_box_region(&c.center.x, c.radius, lo, hi, cell)
            }
            Domain::Petrovsky { reflected } => {
                let lobe = lobe_classify(cell);
                if !reflected {
                    return lobe;
                }
                combine_union([lobe, lobe_classify(&cell.time_reflected())])
            }
            Domain::ComplementCubes { cubes } => {
                let mut all_clear = true;
                for c in cubes {
                    let (lo, hi) = c.time_window();
                    let (near, far) = cell.spatial_distance_range(&c.center.x);
                    if far <= c.radius && cell.t_lo >= lo && cell.t_hi <= hi {
                        return Region::Outside;
                    }
                    let disjoint = near > c.radius || cell.t_hi < lo || cell.t_lo > hi;
                    all_clear &= disjoint;
                }
                if all_clear {
                    Region::Inside
                } else {
                    Region::Mixed
                }
            }
            Domain::Union { args } => combine_union(args.iter().map(|d| d.classify_box(cell))),
            Domain::Intersection { args } => combine_intersection(args.iter().map(|d| d.classify_box(cell))),
            Domain::Complement { args } => args[0].classify_box(cell).complement(),
        }
    }

    /// Lower bound on the parabolic distance from `p` to `∂Ω`. Exact for primitives other
    /// than the Petrovsky lobe, whose bound is tight to bisection accuracy.
    pub fn boundary_distance(&self, p: &SpacetimePoint) -> f64 {
        match self {
            Domain::Cylinder { spatial, time } => box_product(spatial, *time, p).boundary_distance(p.t),
            Domain::BallCylinder { center, radius, time } => {
                ball_product(center, *radius, time.lo(), time.hi(), p).boundary_distance(p.t)
            }
            Domain::HalfSlab { before, after } => {
                let edge = before.or(*after).unwrap_or(f64::INFINITY);
                (p.t - edge).abs().sqrt()
            }
            Domain::Cube(c) => {
                let (lo, hi) = c.time_window();
                ball_product(&c.center.x, c.radius, lo, hi, p).boundary_distance(p.t)
            }
            Domain::Petrovsky { reflected } => {
                let d = lobe_distance(p, false);
                if *reflected {
                    d.min(lobe_distance(p, true))
                } else {
                    d
                }
            }
            Domain::ComplementCubes { cubes } => cubes
                .iter()
                .map(|c| {
                    let (lo, hi) = c.time_window();
                    ball_product(&c.center.x, c.radius, lo, hi, p).boundary_distance(p.t)
                })
                .fold(f64::INFINITY, f64::min),
            _ => self
                .children()
                .iter()
                .map(|c| c.boundary_distance(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Lower bound on the parabolic distance from `p` to `∂Ω ∩ {s ≤ p.t}`.
    ///
    /// A backward path started at `p` can only meet this part of the boundary, so this is
    /// the step-size control used by the walker.
    pub fn past_boundary_distance(&self, p: &SpacetimePoint) -> f64 {
        match self {
            Domain::Cylinder { spatial, time } => box_product(spatial, *time, p).past_distance(p.t),
            Domain::BallCylinder { center, radius, time } => {
                ball_product(center, *radius, time.lo(), time.hi(), p).past_distance(p.t)
            }
            Domain::HalfSlab { before, after } => {
                let edge = before.or(*after).unwrap_or(f64::INFINITY);
                if p.t >= edge {
                    (p.t - edge).sqrt()
                } else {
                    f64::INFINITY
                }
            }
            Domain::Cube(c) => {
                let (lo, hi) = c.time_window();
                ball_product(&c.center.x, c.radius, lo, hi, p).past_distance(p.t)
            }
            Domain::Petrovsky { reflected } => {
                let d = lobe_past_distance(p, false);
                if *reflected {
                    d.min(lobe_past_distance(p, true))
                } else {
                    d
                }
            }
            Domain::ComplementCubes { cubes } => cubes
                .iter()
                .map(|c| {
                    let (lo, hi) = c.time_window();
                    ball_product(&c.center.x, c.radius, lo, hi, p).past_distance(p.t)
                })
                .fold(f64::INFINITY, f64::min),
            _ => self
                .children()
                .iter()
                .map(|c| c.past_boundary_distance(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Largest `T` with `{t < T} ⊆ Ω`, if any.
    pub fn full_below(&self) -> Option<f64> {
        match self {
            Domain::Cylinder { spatial, time } => {
                let all_space = spatial
                    .iter()
                    .all(|iv| iv.lo() == f64::NEG_INFINITY && iv.hi() == f64::INFINITY);
                (all_space && time.lo() == f64::NEG_INFINITY).then_some(time.hi())
            }
            Domain::HalfSlab { before, .. } => *before,
            Domain::ComplementCubes { cubes } => {
                Some(cubes.iter().map(|c| c.time_window().0).fold(f64::INFINITY, f64::min))
            }
            Domain::Union { args } => args.iter().map(|d| d.full_below()).fold(None, max_opt),
            Domain::Intersection { args } => args.iter().map(|d| d.full_below()).reduce(min_req).flatten(),
            Domain::Complement { args } => args[0].empty_below(),
            _ => None,
        }
    }

    /// Largest `T` with `Ω ∩ {t < T} = ∅`, i.e. the earliest time of Ω.
    pub fn empty_below(&self) -> Option<f64> {
        match self {
            Domain::Cylinder { time, .. } | Domain::BallCylinder { time, .. } => {
                time.lo().is_finite().then_some(time.lo())
            }
            Domain::HalfSlab { after, .. } => *after,
            Domain::Cube(c) => Some(c.time_window().0),
            Domain::Petrovsky { .. } => Some(PETROVSKY_T_MIN),
            Domain::ComplementCubes { .. } => None,
            Domain::Union { args } => args.iter().map(|d| d.empty_below()).reduce(min_req).flatten(),
            Domain::Intersection { args } => args.iter().map(|d| d.empty_below()).fold(None, max_opt),
            Domain::Complement { args } => args[0].full_below(),
        }
    }

    /// Smallest `T` with `{t > T} ⊆ Ω`, if any.
    pub fn full_above(&self) -> Option<f64> {
        match self {
            Domain::Cylinder { spatial, time } => {
                let all_space = spatial
                    .iter()
                    .all(|iv| iv.lo() == f64::NEG_INFINITY && iv.hi() == f64::INFINITY);
                (all_space && time.hi() == f64::INFINITY).then_some(time.lo())
            }
            Domain::HalfSlab { after, .. } => *after,
            Domain::ComplementCubes { cubes } => Some(
                cubes
                    .iter()
                    .map(|c| c.time_window().1)
                    .fold(f64::NEG_INFINITY, f64::max),
            ),
            Domain::Union { args } => args.iter().map(|d| d.full_above()).fold(None, min_opt),
            Domain::Intersection { args } => args.iter().map(|d| d.full_above()).reduce(max_req).flatten(),
            Domain::Complement { args } => args[0].empty_above(),
            _ => None,
        }
    }

    /// Smallest `T` with `Ω ∩ {t > T} = ∅`, i.e. the latest time of Ω.
    pub fn empty_above(&self) -> Option<f64> {
        match self {
            Domain::Cylinder { time, .. } | Domain::BallCylinder { time, .. } => {
                time.hi().is_finite().then_some(time.hi())
            }
            Domain::HalfSlab { before, .. } => *before,
            Domain::Cube(c) => Some(c.time_window().1),
            Domain::Petrovsky { reflected } => Some(if *reflected { -PETROVSKY_T_MIN } else { 0.0 }),
            Domain::ComplementCubes { .. } => None,
            Domain::Union { args } => args.iter().map(|d| d.empty_above()).reduce(max_req).flatten(),
            Domain::Intersection { args } => args.iter().map(|d| d.empty_above()).fold(None, min_opt),
            Domain::Complement { args } => args[0].full_above(),
        }
    }

    /// `T_min` of the domain (`−∞` when unbounded below).
    pub fn t_min(&self) -> f64 {
        self.empty_below().unwrap_or(f64::NEG_INFINITY)
    }

    /// `T_max` of the domain (`+∞` when unbounded above).
    pub fn t_max(&self) -> f64 {
        self.empty_above().unwrap_or(f64::INFINITY)
    }

    /// Whether the spatial sections of Ω are bounded.
    pub fn spatially_bounded(&self) -> bool {
        match self {
            Domain::Cylinder { spatial, .. } => spatial.iter().all(|iv| iv.lo().is_finite() && iv.hi().is_finite()),
            Domain::BallCylinder { .. } | Domain::Cube(_) | Domain::Petrovsky { .. } => true,
            Domain::HalfSlab { .. } | Domain::ComplementCubes { .. } => false,
            Domain::Union { args } => args.iter().all(|d| d.spatially_bounded()),
            Domain::Intersection { args } => args.iter().any(|d| d.spatially_bounded()),
            Domain::Complement { .. } => false,
        }
    }

    /// Boxes that together contain the interesting part of `∂Ω`, with infinite extents
    /// clipped to `clip`. Empty when the boundary is empty.
    pub fn boundary_windows(&self, n: usize, clip: f64) -> Vec<CellBox> {
        let clipped = |v: f64| v.clamp(-clip, clip);
        match self {
            Domain::Cylinder { spatial, time } => vec![CellBox {
                lo: spatial.iter().map(|iv| clipped(iv.lo())).collect(),
                hi: spatial.iter().map(|iv| clipped(iv.hi())).collect(),
                t_lo: clipped(time.lo()),
                t_hi: clipped(time.hi()),
            }],
            Domain::BallCylinder { center, radius, time } => {
                vec![ball_window(center, *radius, clipped(time.lo()), clipped(time.hi()))]
            }
            Domain::HalfSlab { before, after } => {
                let edge = before.or(*after).unwrap_or(0.0);
                vec![CellBox {
                    lo: smallvec::smallvec![-clip; n],
                    hi: smallvec::smallvec![clip; n],
                    t_lo: edge,
                    t_hi: edge,
                }]
            }
            Domain::Cube(c) => {
                let (lo, hi) = c.time_window();
                vec![ball_window(&c.center.x, c.radius, lo, hi)]
            }
            Domain::Petrovsky { reflected } => {
                let half = petrovsky_half_width_max();
                vec![CellBox {
                    lo: smallvec::smallvec![-half; n],
                    hi: smallvec::smallvec![half; n],
                    t_lo: PETROVSKY_T_MIN,
                    t_hi: if *reflected { -PETROVSKY_T_MIN } else { 0.0 },
                }]
            }
            Domain::ComplementCubes { cubes } => cubes
                .iter()
                .map(|c| {
                    let (lo, hi) = c.time_window();
                    ball_window(&c.center.x, c.radius, lo, hi)
                })
                .collect(),
            _ => self
                .children()
                .iter()
                .flat_map(|c| c.boundary_windows(n, clip))
                .collect(),
        }
    }

    /// Image under the parabolic dilation `(x, t) ↦ (λx, λ²t)`.
    pub fn dilate(&self, lambda: f64) -> Result<Domain, GeometryError> {
        let s = |v: f64| lambda * v;
        let s2 = |v: f64| lambda * lambda * v;
        Ok(match self {
            Domain::Cylinder { spatial, time } => Domain::Cylinder {
                spatial: spatial.iter().map(|iv| Interval(s(iv.0), s(iv.1))).collect(),
                time: Interval(s2(time.0), s2(time.1)),
            },
            Domain::BallCylinder { center, radius, time } => Domain::BallCylinder {
                center: center.iter().map(|&v| s(v)).collect(),
                radius: s(*radius),
                time: Interval(s2(time.0), s2(time.1)),
            },
            Domain::HalfSlab { before, after } => Domain::HalfSlab {
                before: before.map(s2),
                after: after.map(s2),
            },
            Domain::Cube(c) => Domain::Cube(ParabolicCube {
                center: c.center.dilate(lambda),
                radius: s(c.radius),
                kind: c.kind,
            }),
            Domain::Petrovsky { .. } => {
                return Err(GeometryError::InvalidArgument(
                    "the Petrovsky lobe is not closed under dilation".into(),
                ))
            }
            Domain::ComplementCubes { cubes } => Domain::ComplementCubes {
                cubes: cubes
                    .iter()
                    .map(|c| ParabolicCube {
                        center: c.center.dilate(lambda),
                        radius: s(c.radius),
                        kind: c.kind,
                    })
                    .collect(),
            },
            Domain::Union { args } => Domain::Union {
                args: args.iter().map(|d| d.dilate(lambda)).collect::<Result<_, _>>()?,
            },
            Domain::Intersection { args } => Domain::Intersection {
                args: args.iter().map(|d| d.dilate(lambda)).collect::<Result<_, _>>()?,
            },
            Domain::Complement { args } => Domain::Complement {
                args: vec![args[0].dilate(lambda)?],
            },
        })
    }

    /// Distance from `p ∈ Ω` to the essential boundary (boundary minus terminal faces).
    pub fn essential_distance(&self, p: &SpacetimePoint) -> Result<EssentialDistance, GeometryError> {
        if !self.contains(p) {
            return Err(GeometryError::NotInDomain(p.clone()));
        }
        let exact = |value: f64| {
            Ok(EssentialDistance {
                value,
                resolution: 0.0,
                exact: true,
            })
        };
        match self {
            Domain::Cylinder { spatial, time } => exact(box_product(spatial, *time, p).essential_distance(p.t)),
            Domain::BallCylinder { center, radius, time } => {
                exact(ball_product(center, *radius, time.lo(), time.hi(), p).essential_distance(p.t))
            }
            Domain::Cube(c) => {
                let (lo, hi) = c.time_window();
                exact(ball_product(&c.center.x, c.radius, lo, hi, p).essential_distance(p.t))
            }
            Domain::HalfSlab { before, after } => match (before, after) {
                (None, Some(a)) => exact((p.t - a).sqrt()),
                // The face of `{t < T}` is terminal, so only the point at infinity remains.
                _ => exact(f64::INFINITY),
            },
            Domain::Petrovsky { .. } => exact(self.boundary_distance(p)),
            Domain::ComplementCubes { cubes } => {
                // The bottom faces of obstacles are terminal faces of Ω; drop them.
                let d = cubes
                    .iter()
                    .map(|c| {
                        let (lo, hi) = c.time_window();
                        let r = spatial_distance(&p.x, &c.center.x);
                        let top = (r - c.radius).max(0.0).max((p.t - hi).abs().sqrt());
                        let lateral = (r - c.radius).abs().max(interval_gap(p.t, lo, hi).sqrt());
                        top.min(lateral)
                    })
                    .fold(f64::INFINITY, f64::min);
                exact(d)
            }
            _ => Ok(self.composite_essential_distance(p)),
        }
    }

    /// Point-cloud lower bound for combinators.
    ///
    /// A grid around `p` is scanned for sign changes of membership. Crossings along a
    /// spatial axis, and crossings in time whose exterior node is the earlier one, are kept
    /// as essential boundary samples. The windows grow until a sample is found.
    fn composite_essential_distance(&self, p: &SpacetimePoint) -> EssentialDistance {
        let n = p.dim();
        let analytic = self.boundary_distance(p);
        let per_axis: usize = if n == 1 {
            48
        } else if n == 2 {
            20
        } else {
            10
        };
        let mut radius = analytic.max(1e-6) * 2.0;
        for _ in 0..12 {
            let hx = 2.0 * radius / per_axis as f64;
            let ht = 2.0 * radius * radius / per_axis as f64;
            let node = |idx: &[usize], k: usize| -> SpacetimePoint {
                SpacetimePoint {
                    x: idx
                        .iter()
                        .enumerate()
                        .map(|(i, &j)| p.x[i] - radius + hx * j as f64)
                        .collect(),
                    t: p.t - radius * radius + ht * k as f64,
                }
            };
            let m = per_axis + 1;
            let total_space = m.pow(n as u32);
            let mut inside = vec![false; total_space * m];
            let mut idx = vec![0usize; n];
            for s in 0..total_space {
                let mut rem = s;
                for v in idx.iter_mut() {
                    *v = rem % m;
                    rem /= m;
                }
                for k in 0..m {
                    inside[s * m + k] = self.contains(&node(&idx, k));
                }
            }
            let mut best = f64::INFINITY;
            for s in 0..total_space {
                let mut rem = s;
                for v in idx.iter_mut() {
                    *v = rem % m;
                    rem /= m;
                }
                for k in 0..m {
                    let here = inside[s * m + k];
                    let a = node(&idx, k);
                    if k + 1 < m && !here && inside[s * m + k + 1] {
                        let b = node(&idx, k + 1);
                        best = best.min(parabolic_distance(p, &a.lerp(&b, 0.5)));
                    }
                    let mut stride = 1;
                    for axis in 0..n {
                        if idx[axis] + 1 < m && here != inside[(s + stride) * m + k] {
                            let mut j2 = idx.clone();
                            j2[axis] += 1;
                            let b = node(&j2, k);
                            best = best.min(parabolic_distance(p, &a.lerp(&b, 0.5)));
                        }
                        stride *= m;
                    }
                }
            }
            let resolution = (0.5 * hx * (n as f64).sqrt()).max((0.5 * ht).sqrt());
            if best.is_finite() {
                return EssentialDistance {
                    value: (best - resolution).max(analytic),
                    resolution,
                    exact: false,
                };
            }
            radius *= 2.0;
        }
        EssentialDistance {
            value: f64::INFINITY,
            resolution: 0.0,
            exact: false,
        }
    }
}

fn combine_union(parts: impl IntoIterator<Item = Region>) -> Region {
    let mut all_out = true;
    for r in parts {
        match r {
            Region::Inside => return Region::Inside,
            Region::Mixed => all_out = false,
            Region::Outside => {}
        }
    }
    if all_out {
        Region::Outside
    } else {
        Region::Mixed
    }
}

fn combine_intersection(parts: impl IntoIterator<Item = Region>) -> Region {
    let mut all_in = true;
    for r in parts {
        match r {
            Region::Outside => return Region::Outside,
            Region::Mixed => all_in = false,
            Region::Inside => {}
        }
    }
    if all_in {
        Region::Inside
    } else {
        Region::Mixed
    }
}

fn mirror(p: &SpacetimePoint) -> SpacetimePoint {
    SpacetimePoint {
        x: p.x.clone(),
        t: -p.t,
    }
}

fn ball_window(center: &[f64], radius: f64, lo: f64, hi: f64) -> CellBox {
    CellBox {
        lo: center.iter().map(|c| c - radius).collect(),
        hi: center.iter().map(|c| c + radius).collect(),
        t_lo: lo,
        t_hi: hi,
    }
}

fn petrovsky_half_width_max() -> f64 {
    let (_, high) = super::petrovsky::width_sq_range(PETROVSKY_T_MIN, 0.0).unwrap_or((0.0, 0.0));
    high.sqrt()
}
