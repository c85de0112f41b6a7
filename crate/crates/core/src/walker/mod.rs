//! Monte Carlo sampling of parabolic measure by backward space-time exit paths.
//!
//! A path started at a pole `(x, t)` runs backward in time: each step lowers `t` and moves `x`
//! by a diffusion increment. The first exit from the domain is located by bisection along the
//! last chord. Paths are independent and each draws from its own ChaCha stream selected by the
//! path index, so results do not depend on how paths are scheduled.

mod continuous;
mod datum;
mod lattice;
mod measure;

pub use continuous::{estimate_measure, sample_exit, solve_dirichlet, DirichletValue};
pub use datum::{BoundaryDatum, Datum};
pub use lattice::{estimate_lattice_measure, lattice_exit, measure_mean, LatticeConfig};
pub use measure::{EmpiricalBoundaryMeasure, MeasureHeader};

use crate::geometry::{GeometryError, SpacetimePoint};
use crate::kernels::CoefficientField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("pole {0:?} is not inside the domain")]
    PoleOutside(SpacetimePoint),
    #[error("coefficient {value} at {point:?} violates ellipticity bound {lambda}")]
    Ellipticity {
        point: SpacetimePoint,
        value: f64,
        lambda: f64,
    },
    #[error("the continuous stepper needs continuous coefficients; mollify the field or use the lattice walker")]
    RoughField,
    #[error("lattice step violates monotonicity at {point:?}: jump probability sum {sum}")]
    Cfl { point: SpacetimePoint, sum: f64 },
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Second-order part of the operator `∂_t − div(A∇·)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Operator {
    /// `A = M·I`.
    ScaledHeat {
        #[serde(rename = "M")]
        m: f64,
        n: usize,
    },
    /// `A = diag(a_1(x), …, a_n(x))` with `lambda ≤ a_i ≤ 1/lambda`.
    DiagonalField {
        coefficients: Vec<CoefficientField>,
        lambda: f64,
    },
    /// Constant matrix; only its symmetric part enters.
    ConstantTensor { matrix: Vec<Vec<f64>>, lambda: f64 },
}

impl Operator {
    pub fn scaled_heat(m: f64, n: usize) -> Self {
        Operator::ScaledHeat { m, n }
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::ScaledHeat { n, .. } => *n,
            Operator::DiagonalField { coefficients, .. } => coefficients.len(),
            Operator::ConstantTensor { matrix, .. } => matrix.len(),
        }
    }

    pub fn validate(&self) -> Result<(), WalkError> {
        let bad = |msg: String| Err(WalkError::InvalidConfig(msg));
        match self {
            Operator::ScaledHeat { m, n } => {
                if !(*m > 0.0 && m.is_finite()) || *n == 0 {
                    return bad(format!("scaled heat needs M > 0 and n ≥ 1, got M = {m}, n = {n}"));
                }
            }
            Operator::DiagonalField { coefficients, lambda } => {
                if coefficients.is_empty() || !(*lambda > 0.0 && *lambda <= 1.0) {
                    return bad("diagonal field needs coefficients and λ in (0,1]".into());
                }
                for c in coefficients {
                    let (lo, hi) = c.range();
                    if lo < *lambda || hi > 1.0 / lambda {
                        return bad(format!(
                            "coefficient range [{lo}, {hi}] leaves [{lambda}, {}]",
                            1.0 / lambda
                        ));
                    }
                }
            }
            Operator::ConstantTensor { matrix, lambda } => {
                let n = matrix.len();
                if n == 0 || matrix.iter().any(|row| row.len() != n) {
                    return bad("tensor must be a non-empty square matrix".into());
                }
                if !(*lambda > 0.0 && *lambda <= 1.0) {
                    return bad("λ must lie in (0,1]".into());
                }
            }
        }
        Ok(())
    }
}

/// Step control and termination settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Largest time step (units of length²).
    pub dt_max: f64,
    /// Adaptive step factor: `dt = min(dt_max, κ·δ²)` with `δ` the distance to the past
    /// boundary.
    pub kappa: f64,
    pub boundary_tol: f64,
    /// Paths older than this are stopped as truncated; `-inf` disables truncation.
    #[serde(with = "crate::serde_float")]
    pub time_floor: f64,
    pub max_steps: u64,
    pub seed: u64,
    /// Estimates whose exhausted-budget fraction exceeds this are flagged.
    pub budget_flag_fraction: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            dt_max: 0.05,
            kappa: 0.1,
            boundary_tol: 1e-4,
            time_floor: f64::NEG_INFINITY,
            max_steps: 1_000_000,
            seed: 0,
            budget_flag_fraction: 0.01,
        }
    }
}

impl WalkConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), WalkError> {
        if !(self.dt_max > 0.0) || !(self.kappa > 0.0 && self.kappa <= 1.0) || !(self.boundary_tol > 0.0) {
            return Err(WalkError::InvalidConfig(format!(
                "need dt_max > 0, κ in (0,1], boundary_tol > 0; got {}, {}, {}",
                self.dt_max, self.kappa, self.boundary_tol
            )));
        }
        if self.time_floor.is_nan() {
            return Err(WalkError::InvalidConfig("time_floor is NaN".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Boundary,
    /// The path reached times below which the domain has no boundary.
    Infinity,
    /// The path passed the configured time floor.
    Truncated,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitRecord {
    pub status: ExitStatus,
    pub exit_point: Option<SpacetimePoint>,
    pub steps: u64,
    pub path_index: u64,
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for one path.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}
