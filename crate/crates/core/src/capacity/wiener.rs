//! Heat balls and partial sums of the Wiener series at a boundary point.

use super::cells::UniformRaster;
use super::conditions::in_complement;
use super::lp::{capacity_of, slab_sample, AtomSelection, CompactSetSample};
use super::CapacityError;
use crate::geometry::{Domain, SpacetimePoint};
use crate::kernels::{AronsonEnvelope, ScaledHeatKernel};
use serde::{Deserialize, Serialize};

/// Membership in the heat ball `{Γ_M(center; q) > (4πr)^{−n/2}}`.
pub fn heat_ball_contains(m: f64, center: &SpacetimePoint, r: f64, q: &SpacetimePoint) -> bool {
    let tau = center.t - q.t;
    if tau <= 0.0 {
        return false;
    }
    let mt = m * tau;
    if mt >= r {
        return false;
    }
    let n = center.dim() as f64;
    let d2: f64 = center.x.iter().zip(&q.x).map(|(a, b)| (a - b) * (a - b)).sum();
    d2 < 2.0 * n * mt * (r / mt).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WienerMode {
    HeatBall,
    Cylinder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerOptions {
    pub cells_per_radius: usize,
    /// Terms whose cells are finer than this are flagged as untrusted.
    pub resolution_floor: f64,
    /// Slab aspect `a` for cylinder mode.
    pub slab_ratio: f64,
}

impl Default for WienerOptions {
    fn default() -> Self {
        Self {
            cells_per_radius: 4,
            resolution_floor: 0.0,
            slab_ratio: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WienerTerm {
    pub index: usize,
    /// Heat-ball radius (heat-ball mode) or cylinder radius.
    pub scale: f64,
    pub capacity: f64,
    /// `λ^{−kn/2}·capacity`.
    pub term: f64,
    pub partial_sum: f64,
    pub cell_side: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WienerReport {
    pub mode: WienerMode,
    pub lambda: f64,
    pub terms: Vec<WienerTerm>,
    /// First index whose discretization is below the resolution floor.
    pub untrusted_from: Option<usize>,
    pub warnings: Vec<String>,
}

impl WienerReport {
    pub fn partial_sums(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.partial_sum).collect()
    }
}

fn shell_sample(
    d: &Domain,
    m: f64,
    p: &SpacetimePoint,
    outer: f64,
    inner: f64,
    per_radius: usize,
) -> (CompactSetSample, f64) {
    let n = p.dim() as f64;
    let reach = (2.0 * n * outer / std::f64::consts::E).sqrt();
    let raster = UniformRaster::around(&p.x, reach, p.t - outer / m, p.t, 2 * per_radius);
    let sample = CompactSetSample::from_raster(
        &raster,
        |cell| {
            let c = cell.center();
            heat_ball_contains(m, p, outer, &c) && !heat_ball_contains(m, p, inner, &c) && in_complement(d, cell)
        },
        AtomSelection::ParabolicBoundary,
    );
    (sample, raster.h)
}

/// Partial sums `S_j = Σ_{k≤j} λ^{−kn/2}·Cap(Ωᶜ ∩ shell_k)` for `k = 0..terms`.
///
/// Heat-ball shells are `B_{λ^k} \ B_{λ^{k+1}}`. Cylinder shells are the slabs
/// `closed ball(x, r_k) × [t − r_k², t − (a·r_k)²]` with
/// `r_k = √(4π)·N^{1/n}·a^{−1}·λ^{(k+1)/2}` and `N` the envelope constant of the kernel.
pub fn wiener_partial_sums(
    d: &Domain,
    k: &ScaledHeatKernel,
    point: &SpacetimePoint,
    lambda: f64,
    terms: usize,
    mode: WienerMode,
    opts: &WienerOptions,
) -> Result<WienerReport, CapacityError> {
    if !(lambda > 0.0 && lambda < 1.0) || terms == 0 {
        return Err(CapacityError::InvalidArgument(format!(
            "need λ in (0,1) and at least one term, got λ = {lambda}, K = {terms}"
        )));
    }
    let n = point.dim();
    let a = opts.slab_ratio;
    let big_n = AronsonEnvelope::for_scaled_heat(k.m, n)
        .map_err(|e| CapacityError::InvalidArgument(e.to_string()))?
        .big_n;
    let mut out = Vec::with_capacity(terms);
    let mut untrusted_from = None;
    let mut warnings = Vec::new();
    let mut sum = 0.0;
    for index in 0..terms {
        let (scale, sample, cell_side) = match mode {
            WienerMode::HeatBall => {
                let outer = lambda.powi(index as i32);
                let (s, h) = shell_sample(d, k.m, point, outer, outer * lambda, opts.cells_per_radius);
                (outer, s, h)
            }
            WienerMode::Cylinder => {
                let r = (4.0 * std::f64::consts::PI).sqrt() * big_n.powf(1.0 / n as f64) / a
                    * lambda.powf(0.5 * (index + 1) as f64);
                let s = slab_sample(
                    &point.x,
                    r,
                    point.t - r * r,
                    point.t - a * a * r * r,
                    opts.cells_per_radius,
                    AtomSelection::ParabolicBoundary,
                    |c| in_complement(d, c),
                );
                (r, s, r / opts.cells_per_radius as f64)
            }
        };
        if untrusted_from.is_none() && cell_side < opts.resolution_floor {
            untrusted_from = Some(index);
            warnings.push(format!(
                "term {index}: cell side {cell_side:.3e} is below the resolution floor {:.3e}; \
                 this and later terms are untrusted",
                opts.resolution_floor
            ));
        }
        let capacity = if sample.atom_count() == 0 {
            0.0
        } else {
            capacity_of(&sample, k)?.certified_lower
        };
        let term = lambda.powf(-0.5 * (index * n) as f64) * capacity;
        sum += term;
        out.push(WienerTerm {
            index,
            scale,
            capacity,
            term,
            partial_sum: sum,
            cell_side,
        });
    }
    Ok(WienerReport {
        mode,
        lambda,
        terms: out,
        untrusted_from,
        warnings,
    })
}
