//! Nearest-neighbour random walk for diagonal, possibly discontinuous coefficients.
//!
//! The walk is the Markov chain of the explicit monotone scheme for `∂_t u = Σ ∂_i(a_i ∂_i u)`:
//! from `x` it jumps to `x ± h·e_i` with probability `(k/h²)·a_i(x ± h·e_i/2)` and otherwise
//! stays, while time decreases by `k`.

use super::continuous::mean_and_se;
use super::measure::EmpiricalBoundaryMeasure;
use super::{path_rng, ExitRecord, ExitStatus, Operator, WalkConfig, WalkError};
use crate::geometry::{Domain, SpacetimePoint};
use crate::kernels::CoefficientField;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Spatial step.
    pub h: f64,
    /// Time step; defaults to `h²/(2n·a_max)`.
    pub time_step: Option<f64>,
}

struct Coefficients {
    fields: Vec<CoefficientField>,
    lambda: f64,
}

impl Coefficients {
    fn from_operator(op: &Operator) -> Result<Self, WalkError> {
        op.validate()?;
        match op {
            Operator::ScaledHeat { m, n } => Ok(Self {
                fields: vec![CoefficientField::Constant { value: *m }; *n],
                lambda: m.min(1.0 / m),
            }),
            Operator::DiagonalField { coefficients, lambda } => Ok(Self {
                fields: coefficients.clone(),
                lambda: *lambda,
            }),
            Operator::ConstantTensor { .. } => Err(WalkError::InvalidConfig(
                "the lattice walker needs a diagonal operator".into(),
            )),
        }
    }

    fn max_value(&self) -> f64 {
        self.fields.iter().map(|f| f.range().1).fold(0.0, f64::max)
    }

    fn at(&self, axis: usize, x: &[f64], p: &SpacetimePoint) -> Result<f64, WalkError> {
        let a = self.fields[axis].value(x);
        if a < self.lambda || a > 1.0 / self.lambda {
            return Err(WalkError::Ellipticity {
                point: p.clone(),
                value: a,
                lambda: self.lambda,
            });
        }
        Ok(a)
    }
}

fn time_step(coeffs: &Coefficients, lc: &LatticeConfig) -> Result<f64, WalkError> {
    if !(lc.h > 0.0) {
        return Err(WalkError::InvalidConfig("lattice spacing must be positive".into()));
    }
    let n = coeffs.fields.len() as f64;
    let k = lc.time_step.unwrap_or(lc.h * lc.h / (2.0 * n * coeffs.max_value()));
    if !(k > 0.0) {
        return Err(WalkError::InvalidConfig("time step must be positive".into()));
    }
    Ok(k)
}

#[allow(clippy::too_many_arguments)]
fn walk_lattice(
    d: &Domain,
    coeffs: &Coefficients,
    pole: &SpacetimePoint,
    lc: &LatticeConfig,
    k: f64,
    cfg: &WalkConfig,
    path_index: u64,
    full_below: Option<f64>,
) -> Result<ExitRecord, WalkError> {
    let n = pole.dim();
    let h = lc.h;
    let ratio = k / (h * h);
    let mut rng = path_rng(cfg.seed, path_index);
    let mut p = pole.clone();
    let mut probs = vec![0.0; 2 * n];
    let mut probe = vec![0.0; n];
    let finish = |status, exit_point, steps| ExitRecord {
        status,
        exit_point,
        steps,
        path_index,
    };
    for steps in 0..cfg.max_steps {
        if full_below.is_some_and(|tb| p.t < tb) {
            return Ok(finish(ExitStatus::Infinity, None, steps));
        }
        if p.t < cfg.time_floor {
            return Ok(finish(ExitStatus::Truncated, None, steps));
        }
        probe.copy_from_slice(&p.x);
        let mut total = 0.0;
        for axis in 0..n {
            for (side, sign) in [(0, 1.0), (1, -1.0)] {
                probe[axis] = p.x[axis] + sign * 0.5 * h;
                let q = ratio * coeffs.at(axis, &probe, &p)?;
                probs[2 * axis + side] = q;
                total += q;
            }
            probe[axis] = p.x[axis];
        }
        if total > 1.0 + 1e-12 {
            return Err(WalkError::Cfl {
                point: p.clone(),
                sum: total,
            });
        }
        let u: f64 = rng.random();
        let mut next = p.clone();
        next.t -= k;
        let mut acc = 0.0;
        for (j, q) in probs.iter().enumerate() {
            acc += q;
            if u < acc {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                next.x[j / 2] += sign * h;
                break;
            }
        }
        if !d.contains(&next) {
            return Ok(finish(ExitStatus::Boundary, Some(next), steps + 1));
        }
        p = next;
    }
    Ok(finish(ExitStatus::BudgetExhausted, None, cfg.max_steps))
}

/// One lattice path from `pole`; the exit is the first lattice site outside the domain.
pub fn lattice_exit(
    d: &Domain,
    op: &Operator,
    pole: &SpacetimePoint,
    lc: &LatticeConfig,
    cfg: &WalkConfig,
    path_index: u64,
) -> Result<ExitRecord, WalkError> {
    let coeffs = Coefficients::from_operator(op)?;
    let k = time_step(&coeffs, lc)?;
    if !d.contains(pole) {
        return Err(WalkError::PoleOutside(pole.clone()));
    }
    walk_lattice(d, &coeffs, pole, lc, k, cfg, path_index, d.full_below())
}

/// Empirical measure from lattice paths `0..n_paths`.
pub fn estimate_lattice_measure(
    d: &Domain,
    op: &Operator,
    pole: &SpacetimePoint,
    lc: &LatticeConfig,
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<EmpiricalBoundaryMeasure, WalkError> {
    cfg.validate()?;
    let coeffs = Coefficients::from_operator(op)?;
    let k = time_step(&coeffs, lc)?;
    if !d.contains(pole) {
        return Err(WalkError::PoleOutside(pole.clone()));
    }
    if n_paths == 0 {
        return Err(WalkError::InvalidConfig("need at least one path".into()));
    }
    let full_below = d.full_below();
    let records = (0..n_paths)
        .into_par_iter()
        .map(|i| walk_lattice(d, &coeffs, pole, lc, k, cfg, i, full_below))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EmpiricalBoundaryMeasure::from_records(pole.clone(), &records, cfg))
}

/// Mean and standard error of a function of the exit points, with `at_infinity` for the rest.
pub fn measure_mean(m: &EmpiricalBoundaryMeasure, f: impl Fn(&SpacetimePoint) -> f64, at_infinity: f64) -> (f64, f64) {
    let mut values: Vec<f64> = m.hits.iter().map(|(p, _)| f(p)).collect();
    let rest = m.n_paths as usize - values.len();
    values.extend(std::iter::repeat_n(at_infinity, rest));
    mean_and_se(&values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_violation_is_reported() {
        let op = Operator::scaled_heat(1.0, 1);
        let lc = LatticeConfig {
            h: 0.1,
            time_step: Some(0.1),
        };
        let r = lattice_exit(
            &Domain::after(0.0),
            &op,
            &SpacetimePoint::new(&[0.0], 1.0),
            &lc,
            &WalkConfig::default(),
            0,
        );
        assert!(matches!(r, Err(WalkError::Cfl { .. })));
    }

    #[test]
    fn degenerate_coefficients_are_rejected() {
        let op = Operator::DiagonalField {
            coefficients: vec![CoefficientField::Constant { value: 0.01 }],
            lambda: 0.5,
        };
        let lc = LatticeConfig {
            h: 0.1,
            time_step: None,
        };
        assert!(lattice_exit(
            &Domain::after(0.0),
            &op,
            &SpacetimePoint::new(&[0.0], 1.0),
            &lc,
            &WalkConfig::default(),
            0
        )
        .is_err());
    }

    #[test]
    fn lattice_variance_matches_heat_law() {
        let op = Operator::scaled_heat(1.0, 1);
        let lc = LatticeConfig {
            h: 0.1,
            time_step: None,
        };
        let m = estimate_lattice_measure(
            &Domain::after(0.0),
            &op,
            &SpacetimePoint::new(&[0.0], 1.0),
            &lc,
            4000,
            &WalkConfig::with_seed(3),
        )
        .unwrap();
        let (var, se) = measure_mean(&m, |p| p.x[0] * p.x[0], 0.0);
        assert!((var - 2.0).abs() < 4.0 * se + 0.02, "{var} ± {se}");
    }
}
