//! Thermal capacity as a finite packing linear program.
//!
//! Atoms are cells carrying uniformly smeared mass, so that constraints placed at cell centers
//! stay finite. A zero-size cell is a genuine point mass.

use super::cells::{RasterCell, UniformRaster};
use super::CapacityError;
use crate::geometry::{CellBox, SpacetimePoint};
use crate::kernels::ScaledHeatKernel;
use crate::quadrature::gauss_legendre;
use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::{erf, erfc};
use std::collections::HashSet;

/// A compact set as a cover by cells; atoms sit in a subset of them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactSetSample {
    /// Atom sites (centers of the atom cells).
    pub points: Vec<SpacetimePoint>,
    pub cover_cells: Vec<CellBox>,
    /// Index into `cover_cells` of the cell carrying each atom.
    pub atom_cells: Vec<usize>,
    /// Finest parabolic side length.
    pub resolution: f64,
}

/// Which cells of a rasterized set carry atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub enum AtomSelection {
    /// Cells with a missing spatial neighbour or a missing predecessor in time.
    #[default]
    ParabolicBoundary,
    AllCells,
}

impl CompactSetSample {
    pub fn singleton(p: SpacetimePoint) -> Self {
        let cell = CellBox {
            lo: p.x.clone(),
            hi: p.x.clone(),
            t_lo: p.t,
            t_hi: p.t,
        };
        Self {
            points: vec![p],
            cover_cells: vec![cell],
            atom_cells: vec![0],
            resolution: 0.0,
        }
    }

    /// Cells of `raster` accepted by `keep`.
    pub fn from_raster(raster: &UniformRaster, keep: impl FnMut(&CellBox) -> bool, selection: AtomSelection) -> Self {
        Self::from_cells(raster, raster.cells(keep), selection)
    }

    pub fn from_cells(raster: &UniformRaster, cells: Vec<RasterCell>, selection: AtomSelection) -> Self {
        let present: HashSet<(Vec<i64>, i64)> = cells.iter().map(|c| (c.index.to_vec(), c.layer)).collect();
        let has = |idx: &[i64], layer: i64| present.contains(&(idx.to_vec(), layer));
        let mut atom_cells = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            let boundary = match selection {
                AtomSelection::AllCells => true,
                AtomSelection::ParabolicBoundary => {
                    let mut idx = c.index.to_vec();
                    let mut edge = !has(&idx, c.layer - 1);
                    for k in 0..idx.len() {
                        for step in [-1i64, 1] {
                            idx[k] += step;
                            edge |= !has(&idx, c.layer);
                            idx[k] -= step;
                        }
                    }
                    edge
                }
            };
            if boundary {
                atom_cells.push(i);
            }
        }
        let cover_cells: Vec<CellBox> = cells.into_iter().map(|c| c.cell).collect();
        Self {
            points: atom_cells.iter().map(|&i| cover_cells[i].center()).collect(),
            cover_cells,
            atom_cells,
            resolution: raster.h.max(raster.ht.sqrt()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cover_cells.is_empty()
    }

    pub fn atom_count(&self) -> usize {
        self.atom_cells.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub lp_value: f64,
    pub verify_max_potential: f64,
    pub certified_lower: f64,
    pub constraint_count: usize,
    pub atom_count: usize,
    /// Optimal atom masses, aligned with `CompactSetSample::points`.
    #[serde(skip)]
    pub weights: Vec<f64>,
}

impl CapacityEstimate {
    pub fn zero() -> Self {
        Self {
            lp_value: 0.0,
            verify_max_potential: 0.0,
            certified_lower: 0.0,
            constraint_count: 0,
            atom_count: 0,
            weights: vec![],
        }
    }
}

/// `erf(b) − erf(a)` for `a ≤ b` without cancellation in the tails.
fn erf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        erfc(a) - erfc(b)
    } else if b <= 0.0 {
        erfc(-b) - erfc(-a)
    } else {
        erf(b) - erf(a)
    }
}

/// Heat kernel averaged over a cell of sources.
#[derive(Clone, Debug)]
pub(crate) struct SmearedKernel {
    m: f64,
    near: (Vec<f64>, Vec<f64>),
    far: (Vec<f64>, Vec<f64>),
}

impl SmearedKernel {
    pub(crate) fn new(k: &ScaledHeatKernel) -> Self {
        Self {
            m: k.m,
            near: gauss_legendre(16),
            far: gauss_legendre(3),
        }
    }

    /// Average over the spatial extent of `cell` of the kernel at time gap `tau`.
    fn spatial(&self, z: &SpacetimePoint, cell: &CellBox, tau: f64) -> f64 {
        let width = (4.0 * self.m * tau).sqrt();
        let mut prod = 1.0;
        for i in 0..z.x.len() {
            let (a, b) = (cell.lo[i], cell.hi[i]);
            let factor = if b > a {
                0.5 * erf_diff((a - z.x[i]) / width, (b - z.x[i]) / width) / (b - a)
            } else {
                let d = z.x[i] - a;
                (-d * d / (width * width)).exp() / (std::f64::consts::PI.sqrt() * width)
            };
            prod *= factor;
            if prod == 0.0 {
                break;
            }
        }
        prod
    }

    pub(crate) fn eval(&self, z: &SpacetimePoint, cell: &CellBox) -> f64 {
        let ht = cell.t_hi - cell.t_lo;
        if ht <= 0.0 {
            let tau = z.t - cell.t_lo;
            return if tau > 0.0 { self.spatial(z, cell, tau) } else { 0.0 };
        }
        let top = cell.t_hi.min(z.t);
        if top <= cell.t_lo {
            return 0.0;
        }
        let u_lo = (z.t - top).sqrt();
        let u_hi = (z.t - cell.t_lo).sqrt();
        let (gap, _) = cell.spatial_distance_range(&z.x);
        if gap * gap > 160.0 * self.m * u_hi * u_hi {
            return 0.0;
        }
        let (nodes, weights) = if u_lo >= 2.0 * (u_hi - u_lo) {
            &self.far
        } else {
            &self.near
        };
        let mid = 0.5 * (u_lo + u_hi);
        let half = 0.5 * (u_hi - u_lo);
        let mut sum = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            let u = mid + half * x;
            if u > 0.0 {
                sum += w * 2.0 * u * self.spatial(z, cell, u * u);
            }
        }
        sum * half / ht
    }
}

/// Constraint and verification points for a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityGrids {
    pub constraint: Vec<SpacetimePoint>,
    pub verify: Vec<SpacetimePoint>,
}

/// Rungs of the near-field ladder above a point atom.
const CONSTRAINT_LADDER: i32 = 30;
const VERIFY_LADDER: i32 = 40;

impl CapacityGrids {
    /// Constraints at atom cell centers, a thinned set of the remaining cell centers, and a
    /// coarse forward region; verification at sub-cell centers (twice as fine per axis) plus a
    /// finer forward region.
    pub fn for_sample(sample: &CompactSetSample) -> Self {
        let mut constraint = Vec::new();
        let mut verify = Vec::new();
        if sample.is_empty() {
            return Self { constraint, verify };
        }
        let is_atom: HashSet<usize> = sample.atom_cells.iter().copied().collect();
        let others: Vec<usize> = (0..sample.cover_cells.len()).filter(|i| !is_atom.contains(i)).collect();
        let stride = others.len().div_ceil(sample.atom_count().max(1)).max(1);
        for &i in &sample.atom_cells {
            let cell = &sample.cover_cells[i];
            if cell.t_hi <= cell.t_lo {
                let c = cell.center();
                for j in 0..=VERIFY_LADDER {
                    let mut q = c.clone();
                    q.t += f64::powi(4.0, -j);
                    if j <= CONSTRAINT_LADDER {
                        constraint.push(q.clone());
                    }
                    verify.push(q);
                }
            } else {
                constraint.push(cell.center());
                verify.extend(subcell_centers(cell));
            }
        }
        for (k, &i) in others.iter().enumerate() {
            let c = sample.cover_cells[i].center();
            if k % stride == 0 {
                constraint.push(c.clone());
            }
            verify.push(c);
        }
        constraint.extend(forward_region(sample, 4));
        verify.extend(forward_region(sample, 8));
        Self { constraint, verify }
    }
}

fn subcell_centers(cell: &CellBox) -> Vec<SpacetimePoint> {
    let n = cell.dim();
    let mut out = Vec::with_capacity(1 << (n + 1));
    for corner in 0..(1usize << (n + 1)) {
        let x: Vec<f64> = (0..n)
            .map(|k| {
                let f = if (corner >> k) & 1 == 0 { 0.25 } else { 0.75 };
                cell.lo[k] + f * (cell.hi[k] - cell.lo[k])
            })
            .collect();
        let f = if (corner >> n) & 1 == 0 { 0.25 } else { 0.75 };
        out.push(SpacetimePoint::new(&x, cell.t_lo + f * (cell.t_hi - cell.t_lo)));
    }
    out
}

/// Lattice over the forward cone region of the sample: the spatial hull widened by one
/// parabolic diameter, times up to three diameters (squared) after the top of the set.
fn forward_region(sample: &CompactSetSample, per_axis: usize) -> Vec<SpacetimePoint> {
    let n = sample.cover_cells[0].dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let (mut t_lo, mut t_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in &sample.cover_cells {
        for k in 0..n {
            lo[k] = lo[k].min(c.lo[k]);
            hi[k] = hi[k].max(c.hi[k]);
        }
        t_lo = t_lo.min(c.t_lo);
        t_hi = t_hi.max(c.t_hi);
    }
    let spread = (0..n).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt();
    let diam = spread.max((t_hi - t_lo).sqrt()).max(1e-3);
    let span = 3.0 * diam;
    let mut out = Vec::new();
    let total = (per_axis + 1).pow(n as u32);
    for level in 0..per_axis {
        let t = t_hi + span * span * f64::powi(4.0, -(level as i32));
        for flat in 0..total {
            let mut rem = flat;
            let x: Vec<f64> = (0..n)
                .map(|k| {
                    let i = rem % (per_axis + 1);
                    rem /= per_axis + 1;
                    lo[k] - diam + (hi[k] - lo[k] + 2.0 * diam) * i as f64 / per_axis as f64
                })
                .collect();
            out.push(SpacetimePoint::new(&x, t));
        }
    }
    out
}

/// Solve the packing program over the sample's atoms and certify the result on `verify_grid`.
pub fn estimate_capacity(
    sample: &CompactSetSample,
    k: &ScaledHeatKernel,
    constraint_grid: &[SpacetimePoint],
    verify_grid: &[SpacetimePoint],
) -> Result<CapacityEstimate, CapacityError> {
    if sample.atom_count() == 0 {
        return Ok(CapacityEstimate::zero());
    }
    let kernel = SmearedKernel::new(k);
    let atoms: Vec<&CellBox> = sample.atom_cells.iter().map(|&i| &sample.cover_cells[i]).collect();
    let rows: Vec<Vec<(usize, f64)>> = constraint_grid
        .par_iter()
        .map(|z| {
            atoms
                .iter()
                .enumerate()
                .filter_map(|(i, cell)| {
                    let g = kernel.eval(z, cell);
                    (g > 1e-300).then_some((i, g))
                })
                .collect()
        })
        .collect();
    let mut seen = vec![false; atoms.len()];
    for row in &rows {
        for &(i, _) in row {
            seen[i] = true;
        }
    }
    if let Some(atom) = seen.iter().position(|s| !s) {
        return Err(CapacityError::Unbounded { atom });
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..atoms.len())
        .map(|_| problem.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    for row in rows.iter().filter(|r| !r.is_empty()) {
        let mut expr = LinearExpr::empty();
        for &(i, g) in row {
            expr.add(vars[i], g);
        }
        problem.add_constraint(expr, ComparisonOp::Le, 1.0);
    }
    let solution = problem.solve().map_err(|e| CapacityError::Solver(e.to_string()))?;
    let weights: Vec<f64> = vars.iter().map(|v| solution[*v].max(0.0)).collect();
    let lp_value = weights.iter().sum::<f64>();
    let verify_max_potential = verify_grid
        .par_iter()
        .map(|z| {
            atoms
                .iter()
                .zip(&weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(cell, w)| w * kernel.eval(z, cell))
                .sum::<f64>()
        })
        .reduce(|| 0.0, f64::max);
    Ok(CapacityEstimate {
        lp_value,
        verify_max_potential,
        certified_lower: lp_value / verify_max_potential.max(1.0),
        constraint_count: constraint_grid.len(),
        atom_count: atoms.len(),
        weights,
    })
}

/// [`estimate_capacity`] with grids from [`CapacityGrids::for_sample`].
pub fn capacity_of(sample: &CompactSetSample, k: &ScaledHeatKernel) -> Result<CapacityEstimate, CapacityError> {
    let grids = CapacityGrids::for_sample(sample);
    estimate_capacity(sample, k, &grids.constraint, &grids.verify)
}

/// Sample of the slab `closed ball(center, radius) × [t_lo, t_hi]` restricted by `keep`, with
/// `per_radius` cells across each spatial radius.
pub fn slab_sample(
    center: &[f64],
    radius: f64,
    t_lo: f64,
    t_hi: f64,
    per_radius: usize,
    selection: AtomSelection,
    mut keep: impl FnMut(&CellBox) -> bool,
) -> CompactSetSample {
    let raster = UniformRaster::around(center, radius, t_lo, t_hi, 2 * per_radius);
    let c = center.to_vec();
    CompactSetSample::from_raster(
        &raster,
        |cell| {
            let mid = cell.center();
            let d2: f64 = mid.x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
            d2 <= radius * radius && keep(cell)
        },
        selection,
    )
}

/// Absolute cell spacing at which slab capacities are compared across radii.
pub fn pinned_slab_spacing(n: usize) -> Option<f64> {
    match n {
        1 => Some(1.0 / 8.0),
        2 => Some(1.0 / 3.0),
        _ => None,
    }
}

/// Capacity of `closed ball(0, r) × [−r², −(r/2)²]` at the pinned spacing for dimension `n`.
pub fn pinned_slab_capacity(k: &ScaledHeatKernel, r: f64) -> Result<CapacityEstimate, CapacityError> {
    let h = pinned_slab_spacing(k.n)
        .ok_or_else(|| CapacityError::InvalidArgument(format!("no pinned spacing for n = {}", k.n)))?;
    let per_radius = (r / h).round().max(1.0) as usize;
    let sample = slab_sample(
        &vec![0.0; k.n],
        r,
        -r * r,
        -0.25 * r * r,
        per_radius,
        AtomSelection::ParabolicBoundary,
        |_| true,
    );
    capacity_of(&sample, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat_kernel;

    fn k1() -> ScaledHeatKernel {
        ScaledHeatKernel::new(1.0, 1).unwrap()
    }

    #[test]
    fn smeared_kernel_matches_point_kernel_far_away() {
        let kernel = SmearedKernel::new(&k1());
        let cell = CellBox {
            lo: smallvec::smallvec![-0.01],
            hi: smallvec::smallvec![0.01],
            t_lo: -0.0001,
            t_hi: 0.0,
        };
        let z = SpacetimePoint::new(&[0.7], 1.0);
        let exact = heat_kernel(&k1(), &z, &cell.center());
        let approx = kernel.eval(&z, &cell);
        assert!((approx / exact - 1.0).abs() < 1e-3, "{approx} {exact}");
    }

    #[test]
    fn smeared_kernel_matches_brute_force_average_nearby() {
        let kernel = SmearedKernel::new(&k1());
        let cell = CellBox {
            lo: smallvec::smallvec![0.0],
            hi: smallvec::smallvec![0.5],
            t_lo: 0.0,
            t_hi: 0.25,
        };
        let z = SpacetimePoint::new(&[0.6], 0.3);
        let m = 400;
        let mut sum = 0.0;
        for i in 0..m {
            for j in 0..m {
                let y = 0.5 * (i as f64 + 0.5) / m as f64;
                let s = 0.25 * (j as f64 + 0.5) / m as f64;
                sum += heat_kernel(&k1(), &z, &SpacetimePoint::new(&[y], s));
            }
        }
        let brute = sum / (m * m) as f64;
        let approx = kernel.eval(&z, &cell);
        assert!((approx / brute - 1.0).abs() < 2e-3, "{approx} {brute}");
    }

    #[test]
    fn erf_difference_is_accurate_in_tails() {
        let d = erf_diff(6.0, 7.0);
        assert!(d > 0.0 && d < 1e-15);
        assert!((erf_diff(-1.0, 1.0) - 2.0 * erf(1.0)).abs() < 1e-15);
    }

    #[test]
    fn singleton_capacity_vanishes() {
        let sample = CompactSetSample::singleton(SpacetimePoint::new(&[0.0], 0.0));
        let est = capacity_of(&sample, &k1()).unwrap();
        assert!(est.lp_value < 1e-6, "{}", est.lp_value);
        assert!(est.certified_lower <= est.lp_value);
    }

    #[test]
    fn unseen_atom_is_reported() {
        let sample = CompactSetSample::singleton(SpacetimePoint::new(&[0.0], 0.0));
        let grid = vec![SpacetimePoint::new(&[0.0], -1.0)];
        assert!(matches!(
            estimate_capacity(&sample, &k1(), &grid, &grid),
            Err(CapacityError::Unbounded { atom: 0 })
        ));
    }

    #[test]
    fn slab_capacity_is_positive_and_certified() {
        let sample = slab_sample(&[0.0], 1.0, -1.0, -0.25, 4, AtomSelection::default(), |_| true);
        let est = capacity_of(&sample, &k1()).unwrap();
        assert!(est.lp_value > 0.0);
        assert!(est.certified_lower <= est.lp_value);
        assert!(est.certified_lower >= 0.5 * est.lp_value);
    }

    #[test]
    fn capacity_is_monotone_under_inclusion() {
        let k = k1();
        let all = |_: &CellBox| true;
        let half = |c: &CellBox| c.center().x[0] > 0.0;
        let sel = AtomSelection::AllCells;
        let big = slab_sample(&[0.0], 1.0, -1.0, -0.25, 3, sel, all);
        let small = slab_sample(&[0.0], 1.0, -1.0, -0.25, 3, sel, half);
        let grids = CapacityGrids::for_sample(&big);
        let a = estimate_capacity(&small, &k, &grids.constraint, &grids.verify).unwrap();
        let b = estimate_capacity(&big, &k, &grids.constraint, &grids.verify).unwrap();
        assert!(a.lp_value <= b.lp_value + 1e-9, "{} {}", a.lp_value, b.lp_value);
        assert!(a.lp_value > 0.0);
    }

    #[test]
    fn more_constraints_never_raise_the_value() {
        let k = k1();
        let sample = slab_sample(&[0.0], 1.0, -1.0, -0.25, 3, AtomSelection::default(), |_| true);
        let grids = CapacityGrids::for_sample(&sample);
        let coarse = estimate_capacity(&sample, &k, &grids.constraint, &grids.verify).unwrap();
        let mut finer = grids.constraint.clone();
        finer.extend(grids.verify.iter().cloned());
        let fine = estimate_capacity(&sample, &k, &finer, &grids.verify).unwrap();
        assert!(fine.lp_value <= coarse.lp_value + 1e-9);
    }
}
