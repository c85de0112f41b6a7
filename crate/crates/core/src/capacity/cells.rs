//! Uniform and dyadic rasterization of space-time sets into cells.

use crate::geometry::{CellBox, Coords, Domain, Region, SpacetimePoint};
use serde::Serialize;
use smallvec::SmallVec;
use std::collections::BTreeMap;

/// A regular grid of cells over a box: spatial side `h`, time side `ht`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformRaster {
    pub lo: Coords,
    pub t_lo: f64,
    pub h: f64,
    pub ht: f64,
    /// Cells per spatial axis.
    pub per_axis: usize,
    pub layers: usize,
}

/// A cell of a [`UniformRaster`] with its integer position.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterCell {
    pub index: SmallVec<[i64; 4]>,
    pub layer: i64,
    pub cell: CellBox,
}

impl UniformRaster {
    /// Raster of the box `center ± half_width` (each axis) times `[t_lo, t_hi]`, with `per_axis`
    /// cells along each spatial axis and time layers as close to `h²` as divides the interval.
    pub fn around(center: &[f64], half_width: f64, t_lo: f64, t_hi: f64, per_axis: usize) -> Self {
        let h = 2.0 * half_width / per_axis as f64;
        let span = t_hi - t_lo;
        let layers = ((span / (h * h)).round() as usize).max(1);
        Self {
            lo: center.iter().map(|c| c - half_width).collect(),
            t_lo,
            h,
            ht: span / layers as f64,
            per_axis,
            layers,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn cell(&self, index: &[i64], layer: i64) -> CellBox {
        CellBox {
            lo: index
                .iter()
                .zip(&self.lo)
                .map(|(&i, &o)| o + self.h * i as f64)
                .collect(),
            hi: index
                .iter()
                .zip(&self.lo)
                .map(|(&i, &o)| o + self.h * (i + 1) as f64)
                .collect(),
            t_lo: self.t_lo + self.ht * layer as f64,
            t_hi: self.t_lo + self.ht * (layer + 1) as f64,
        }
    }

    /// All cells accepted by `keep`, in index order (time layer slowest).
    pub fn cells(&self, mut keep: impl FnMut(&CellBox) -> bool) -> Vec<RasterCell> {
        let n = self.dim();
        let m = self.per_axis;
        let total = m.pow(n as u32);
        let mut out = Vec::new();
        for layer in 0..self.layers as i64 {
            for flat in 0..total {
                let mut rem = flat;
                let index: SmallVec<[i64; 4]> = (0..n)
                    .map(|_| {
                        let i = rem % m;
                        rem /= m;
                        i as i64
                    })
                    .collect();
                let cell = self.cell(&index, layer);
                if keep(&cell) {
                    out.push(RasterCell { index, layer, cell });
                }
            }
        }
        out
    }
}

/// Dyadic grid: level-`k` cells have spatial side `h·2^k` and time side `(h·2^k)²`, anchored at
/// `anchor`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicGrid {
    pub anchor: SpacetimePoint,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CellIndex {
    pub level: i32,
    pub space: SmallVec<[i64; 4]>,
    pub time: i64,
}

impl CellIndex {
    pub fn parent(&self) -> CellIndex {
        CellIndex {
            level: self.level + 1,
            space: self.space.iter().map(|i| i.div_euclid(2)).collect(),
            time: self.time.div_euclid(4),
        }
    }

    pub fn children(&self) -> Vec<CellIndex> {
        let n = self.space.len();
        let mut out = Vec::with_capacity((1 << n) * 4);
        for dt in 0..4 {
            for corner in 0..(1usize << n) {
                out.push(CellIndex {
                    level: self.level - 1,
                    space: (0..n).map(|k| 2 * self.space[k] + ((corner >> k) & 1) as i64).collect(),
                    time: 4 * self.time + dt,
                });
            }
        }
        out
    }
}

impl DyadicGrid {
    pub fn side(&self, level: i32) -> f64 {
        self.h * f64::powi(2.0, level)
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    /// Parabolic diameter `√n·side` of a level-`level` cell.
    pub fn diameter(&self, level: i32) -> f64 {
        (self.dim() as f64).sqrt() * self.side(level)
    }

    pub fn cell_box(&self, c: &CellIndex) -> CellBox {
        let s = self.side(c.level);
        let st = s * s;
        CellBox {
            lo: c
                .space
                .iter()
                .zip(&self.anchor.x)
                .map(|(&i, &o)| o + s * i as f64)
                .collect(),
            hi: c
                .space
                .iter()
                .zip(&self.anchor.x)
                .map(|(&i, &o)| o + s * (i + 1) as f64)
                .collect(),
            t_lo: self.anchor.t + st * c.time as f64,
            t_hi: self.anchor.t + st * (c.time + 1) as f64,
        }
    }
}

/// Disjoint dyadic cells, possibly of different levels, each entirely in the set (up to the
/// center rule at the finest level).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSet {
    pub grid: DyadicGrid,
    pub cells: Vec<CellIndex>,
    /// Finest level that was resolved.
    pub finest_level: i32,
}

impl CellSet {
    pub fn empty(grid: DyadicGrid, finest_level: i32) -> Self {
        Self {
            grid,
            cells: vec![],
            finest_level,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Whether `p` lies in one of the (closed) cells.
    pub fn covers(&self, p: &SpacetimePoint) -> bool {
        self.cells.iter().any(|c| {
            let b = self.grid.cell_box(c);
            p.t >= b.t_lo && p.t <= b.t_hi && p.x.iter().enumerate().all(|(i, &v)| v >= b.lo[i] && v <= b.hi[i])
        })
    }
}

/// Adaptive dyadic rasterization of `target ∩ bounds`.
///
/// Cells at `top_level` covering `bounds` are refined while the box classification is
/// undecided, down to `finest_level`; undecided finest cells are kept when their center lies in
/// the target. Cells found entirely inside are kept whole.
pub fn rasterize_dyadic(
    target: &Domain,
    grid: &DyadicGrid,
    bounds: &CellBox,
    top_level: i32,
    finest_level: i32,
) -> CellSet {
    let n = grid.dim();
    let s = grid.side(top_level);
    let st = s * s;
    let range = |lo: f64, hi: f64, o: f64, side: f64| {
        let a = ((lo - o) / side).floor() as i64;
        let b = ((hi - o) / side).ceil() as i64;
        (a, b.max(a + 1))
    };
    let ranges: Vec<(i64, i64)> = (0..n)
        .map(|k| range(bounds.lo[k], bounds.hi[k], grid.anchor.x[k], s))
        .collect();
    let (t0, t1) = range(bounds.t_lo, bounds.t_hi, grid.anchor.t, st);
    let mut stack = Vec::new();
    let counts: Vec<i64> = ranges.iter().map(|(a, b)| b - a).collect();
    let total: i64 = counts.iter().product();
    for tj in t0..t1 {
        for flat in 0..total {
            let mut rem = flat;
            let space = (0..n)
                .map(|k| {
                    let i = rem % counts[k];
                    rem /= counts[k];
                    ranges[k].0 + i
                })
                .collect();
            stack.push(CellIndex {
                level: top_level,
                space,
                time: tj,
            });
        }
    }
    let mut cells = Vec::new();
    while let Some(c) = stack.pop() {
        let b = grid.cell_box(&c);
        match target.classify_box(&b) {
            Region::Outside => {}
            Region::Inside => cells.push(c),
            Region::Mixed => {
                if c.level <= finest_level {
                    if target.contains(&b.center()) {
                        cells.push(c);
                    }
                } else {
                    stack.extend(c.children());
                }
            }
        }
    }
    cells.sort();
    CellSet {
        grid: grid.clone(),
        cells,
        finest_level,
    }
}

/// Group cells by their parents, keeping deterministic order.
pub(crate) fn group_by_parent<V: Clone>(nodes: &BTreeMap<CellIndex, V>) -> BTreeMap<CellIndex, Vec<(CellIndex, V)>> {
    let mut out: BTreeMap<CellIndex, Vec<(CellIndex, V)>> = BTreeMap::new();
    for (c, v) in nodes {
        out.entry(c.parent()).or_default().push((c.clone(), v.clone()));
    }
    out
}
