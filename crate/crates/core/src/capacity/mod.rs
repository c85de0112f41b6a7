//! Thermal capacity, parabolic Hausdorff content, and the boundary thickness checks built on them.

mod cells;
mod conditions;
mod content;
mod lp;
mod wiener;

pub use cells::{rasterize_dyadic, CellIndex, CellSet, DyadicGrid, RasterCell, UniformRaster};
pub use conditions::{
    backward_content, capacity_slab_pair, check_tbcdc, check_tbcdc_with, check_tbhcc, check_tbhcc_with, content_ratio,
    CapacityCheckOptions, Condition, ConditionReport, ConditionRow, ContentCheckOptions, ContentEstimate,
    ResolutionInfo, DEFAULT_PASS_THRESHOLD,
};
pub use content::{
    dimensional_constant, dyadic_cover_value, frostman_lower_bound, hausdorff_content_upper, slab_subdivision, Slab,
};
pub use lp::{
    capacity_of, estimate_capacity, pinned_slab_capacity, pinned_slab_spacing, slab_sample, AtomSelection,
    CapacityEstimate, CapacityGrids, CompactSetSample,
};
pub use wiener::{heat_ball_contains, wiener_partial_sums, WienerMode, WienerOptions, WienerReport, WienerTerm};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("no constraint point sees atom {atom}; the constraint grid misses part of the set")]
    Unbounded { atom: usize },
    #[error("linear program failed: {0}")]
    Solver(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
