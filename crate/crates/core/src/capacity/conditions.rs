//! Empirical checks of the backward-in-time thickness conditions along the parabolic boundary.

use super::cells::{rasterize_dyadic, CellSet, DyadicGrid};
use super::content::{dimensional_constant, frostman_lower_bound, hausdorff_content_upper};
use super::lp::{capacity_of, slab_sample, AtomSelection};
use super::CapacityError;
use crate::geometry::{CellBox, CubeKind, Domain, ParabolicCube, Region, SigmaSample, SpacetimePoint};
use crate::kernels::ScaledHeatKernel;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Condition {
    Tbcdc,
    Tbhcc,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRow {
    pub point: SpacetimePoint,
    pub radius: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub rows: Vec<ConditionRow>,
    /// Minimum ratio over `rows`; `None` when nothing was tested.
    pub worst_ratio: Option<f64>,
    /// `ε` for the content condition, `a` for the capacity condition.
    pub parameter: f64,
    /// Samples with no admissible radius.
    pub skipped: usize,
    pub resolution: ResolutionInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolutionInfo {
    /// Cells per radius along each spatial axis at the base level.
    pub cells_per_radius: usize,
    /// Extra dyadic refinement levels used near the boundary (content checks only).
    pub extra_levels: u32,
    /// Absolute side below which refinement stops, if any.
    pub min_side: Option<f64>,
}

impl ConditionReport {
    fn from_rows(
        condition: Condition,
        rows: Vec<ConditionRow>,
        parameter: f64,
        skipped: usize,
        resolution: ResolutionInfo,
    ) -> Self {
        let worst_ratio = rows.iter().map(|r| r.ratio).reduce(f64::min);
        Self {
            condition,
            rows,
            worst_ratio,
            parameter,
            skipped,
            resolution,
        }
    }

    /// Vacuously true for an empty report.
    pub fn passes(&self, threshold: f64) -> bool {
        self.worst_ratio.is_none_or(|w| w >= threshold)
    }

    /// Worst ratio over rows whose radius is at least `radius`.
    pub fn worst_at_or_above(&self, radius: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.radius >= radius)
            .map(|r| r.ratio)
            .reduce(f64::min)
    }

    /// Worst ratio per tested radius, in increasing radius order.
    pub fn worst_by_radius(&self) -> Vec<(f64, f64)> {
        let mut by: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for r in &self.rows {
            let e = by.entry(r.radius.to_bits()).or_insert((r.radius, r.ratio));
            e.1 = e.1.min(r.ratio);
        }
        let mut out: Vec<_> = by.into_values().collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// Default pass threshold applied to worst ratios.
pub const DEFAULT_PASS_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContentCheckOptions {
    /// The base grid has `2^levels` cells across each radius.
    pub levels: u32,
    pub extra_levels: u32,
    /// Keep refining undecided cells until their side is at most this.
    pub min_side: Option<f64>,
}

impl Default for ContentCheckOptions {
    fn default() -> Self {
        Self {
            levels: 4,
            extra_levels: 3,
            min_side: None,
        }
    }
}

fn admissible(sigma: &SigmaSample, scales: &[f64]) -> (Vec<(SpacetimePoint, f64)>, usize) {
    let mut tasks = Vec::new();
    let mut skipped = 0;
    for sp in &sigma.points {
        let before = tasks.len();
        for &r in scales {
            if r > 0.0 && r < sp.max_radius {
                tasks.push((sp.point.clone(), r));
            }
        }
        if tasks.len() == before {
            skipped += 1;
        }
    }
    (tasks, skipped)
}

fn backward_complement_cells(d: &Domain, p: &SpacetimePoint, r: f64, opts: &ContentCheckOptions) -> CellSet {
    let cube = ParabolicCube::new(p.clone(), r, CubeKind::Backward);
    let target = Domain::intersection(vec![Domain::Cube(cube), Domain::complement(d.clone())]);
    let h = r / f64::powi(2.0, opts.levels as i32);
    let grid = DyadicGrid { anchor: p.clone(), h };
    let mut finest = -(opts.extra_levels as i32);
    if let Some(side) = opts.min_side {
        while grid.side(finest) > side {
            finest -= 1;
        }
    }
    let bounds = CellBox {
        lo: p.x.iter().map(|v| v - r).collect(),
        hi: p.x.iter().map(|v| v + r).collect(),
        t_lo: p.t - r * r,
        t_hi: p.t,
    };
    rasterize_dyadic(&target, &grid, &bounds, opts.levels as i32, finest)
}

/// Bounds on the `s`-dimensional parabolic Hausdorff content of `Q_r^−(p) ∩ Ωᶜ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContentEstimate {
    /// Total mass of the dyadic Frostman measure.
    pub frostman_mass: f64,
    /// Content of the best cover found.
    pub cover_upper: f64,
    /// `cover_upper / dimensional_constant`, a lower bound for the content.
    pub content_lower: f64,
    pub cell_count: usize,
}

pub fn backward_content(d: &Domain, p: &SpacetimePoint, r: f64, s: f64, opts: &ContentCheckOptions) -> ContentEstimate {
    let cells = backward_complement_cells(d, p, r, opts);
    let frostman_mass = frostman_lower_bound(&cells, s).0;
    ContentEstimate {
        frostman_mass,
        cover_upper: hausdorff_content_upper(&cells, s, 64),
        content_lower: frostman_mass / dimensional_constant(p.dim(), s),
        cell_count: cells.cells.len(),
    }
}

/// Content ratio `mass(Q_r^−(p) ∩ Ωᶜ) / r^{n+ε}` at one point and radius.
pub fn content_ratio(d: &Domain, p: &SpacetimePoint, r: f64, eps: f64, opts: &ContentCheckOptions) -> f64 {
    let cells = backward_complement_cells(d, p, r, opts);
    let s = p.dim() as f64 + eps;
    // Adding zero turns a signed-zero mass into +0.
    frostman_lower_bound(&cells, s).0 / r.powf(s) + 0.0
}

/// Content condition check with default options.
pub fn check_tbhcc(d: &Domain, sigma: &SigmaSample, scales: &[f64], eps: f64) -> ConditionReport {
    check_tbhcc_with(d, sigma, scales, eps, &ContentCheckOptions::default())
}

pub fn check_tbhcc_with(
    d: &Domain,
    sigma: &SigmaSample,
    scales: &[f64],
    eps: f64,
    opts: &ContentCheckOptions,
) -> ConditionReport {
    let (tasks, skipped) = admissible(sigma, scales);
    let rows = tasks
        .into_par_iter()
        .map(|(point, radius)| {
            let ratio = content_ratio(d, &point, radius, eps, opts);
            ConditionRow { point, radius, ratio }
        })
        .collect();
    ConditionReport::from_rows(
        Condition::Tbhcc,
        rows,
        eps,
        skipped,
        ResolutionInfo {
            cells_per_radius: 1 << opts.levels,
            extra_levels: opts.extra_levels,
            min_side: opts.min_side,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityCheckOptions {
    pub cells_per_radius: usize,
}

impl Default for CapacityCheckOptions {
    fn default() -> Self {
        Self { cells_per_radius: 4 }
    }
}

/// Whether a raster cell counts as part of the complement of `d`.
pub(crate) fn in_complement(d: &Domain, cell: &CellBox) -> bool {
    match d.classify_box(cell) {
        Region::Outside => true,
        Region::Inside => false,
        Region::Mixed => !d.contains(&cell.center()),
    }
}

/// Capacity of `(closed ball(p, r) × [t − r², t − (ar)²]) ∩ Ωᶜ` and of the whole slab.
pub fn capacity_slab_pair(
    d: &Domain,
    k: &ScaledHeatKernel,
    p: &SpacetimePoint,
    r: f64,
    a: f64,
    cells_per_radius: usize,
) -> Result<(f64, f64), CapacityError> {
    let (t_lo, t_hi) = (p.t - r * r, p.t - a * a * r * r);
    let sel = AtomSelection::ParabolicBoundary;
    let part = slab_sample(&p.x, r, t_lo, t_hi, cells_per_radius, sel, |c| in_complement(d, c));
    let whole = slab_sample(&p.x, r, t_lo, t_hi, cells_per_radius, sel, |_| true);
    let numerator = if part.is_empty() {
        0.0
    } else {
        capacity_of(&part, k)?.certified_lower
    };
    Ok((numerator, capacity_of(&whole, k)?.certified_lower))
}

/// Capacity condition check with default options.
pub fn check_tbcdc(
    d: &Domain,
    k: &ScaledHeatKernel,
    sigma: &SigmaSample,
    scales: &[f64],
    a: f64,
) -> Result<ConditionReport, CapacityError> {
    check_tbcdc_with(d, k, sigma, scales, a, &CapacityCheckOptions::default())
}

pub fn check_tbcdc_with(
    d: &Domain,
    k: &ScaledHeatKernel,
    sigma: &SigmaSample,
    scales: &[f64],
    a: f64,
    opts: &CapacityCheckOptions,
) -> Result<ConditionReport, CapacityError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(CapacityError::InvalidArgument(format!("a must lie in (0,1), got {a}")));
    }
    let (tasks, skipped) = admissible(sigma, scales);
    let rows = tasks
        .into_par_iter()
        .map(|(point, radius)| {
            let (num, den) = capacity_slab_pair(d, k, &point, radius, a, opts.cells_per_radius)?;
            Ok(ConditionRow {
                point,
                radius,
                ratio: num / den,
            })
        })
        .collect::<Result<Vec<_>, CapacityError>>()?;
    Ok(ConditionReport::from_rows(
        Condition::Tbcdc,
        rows,
        a,
        skipped,
        ResolutionInfo {
            cells_per_radius: opts.cells_per_radius,
            extra_levels: 0,
            min_side: None,
        },
    ))
}
