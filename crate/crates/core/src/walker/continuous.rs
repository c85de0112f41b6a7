//! Euler–Maruyama stepping of the backward space-time diffusion.

use super::datum::BoundaryDatum;
use super::measure::EmpiricalBoundaryMeasure;
use super::{mix_seed, path_rng, ExitRecord, ExitStatus, Operator, WalkConfig, WalkError};
use crate::geometry::{parabolic_distance, Coords, Domain, SpacetimePoint};
use crate::kernels::CoefficientField;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

/// Precomputed diffusion coefficients for one operator.
pub(crate) enum Stepper<'a> {
    Isotropic {
        scale: f64,
    },
    Diagonal {
        fields: &'a [CoefficientField],
        lambda: f64,
    },
    Tensor {
        factor: Vec<Vec<f64>>,
    },
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(op: &'a Operator) -> Result<Self, WalkError> {
        op.validate()?;
        Ok(match op {
            Operator::ScaledHeat { m, .. } => Stepper::Isotropic { scale: m.sqrt() },
            Operator::DiagonalField { coefficients, lambda } => {
                if coefficients.iter().any(|c| !c.is_continuous()) {
                    return Err(WalkError::RoughField);
                }
                Stepper::Diagonal {
                    fields: coefficients,
                    lambda: *lambda,
                }
            }
            Operator::ConstantTensor { matrix, lambda } => {
                let n = matrix.len();
                let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (matrix[i][j] + matrix[j][i]));
                let eig = sym.clone().symmetric_eigenvalues();
                let (lo, hi) = eig
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                if lo < *lambda || hi > 1.0 / lambda {
                    return Err(WalkError::Ellipticity {
                        point: SpacetimePoint::origin(n),
                        value: if lo < *lambda { lo } else { hi },
                        lambda: *lambda,
                    });
                }
                let chol = sym.cholesky().ok_or(WalkError::Ellipticity {
                    point: SpacetimePoint::origin(n),
                    value: lo,
                    lambda: *lambda,
                })?;
                let l = chol.l();
                Stepper::Tensor {
                    factor: (0..n).map(|i| (0..n).map(|j| l[(i, j)]).collect()).collect(),
                }
            }
        })
    }

    /// One step of duration `dt` from `p`: drift `div A`, noise `√(2dt)·B·ξ` with `BBᵀ = A`.
    fn step(&self, p: &SpacetimePoint, dt: f64, rng: &mut ChaCha8Rng) -> Result<SpacetimePoint, WalkError> {
        let n = p.dim();
        let root = (2.0 * dt).sqrt();
        let mut x: Coords = p.x.clone();
        match self {
            Stepper::Isotropic { scale } => {
                for v in x.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += root * scale * z;
                }
            }
            Stepper::Diagonal { fields, lambda } => {
                let mut grad = [0.0f64; 8];
                for (i, field) in fields.iter().enumerate() {
                    let a = field.value(&p.x);
                    if a < *lambda || a > 1.0 / lambda {
                        return Err(WalkError::Ellipticity {
                            point: p.clone(),
                            value: a,
                            lambda: *lambda,
                        });
                    }
                    field.gradient(&p.x, &mut grad[..n]);
                    let z: f64 = rng.sample(StandardNormal);
                    x[i] += grad[i] * dt + root * a.sqrt() * z;
                }
            }
            Stepper::Tensor { factor } => {
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                for i in 0..n {
                    x[i] += root * (0..=i).map(|j| factor[i][j] * z[j]).sum::<f64>();
                }
            }
        }
        Ok(SpacetimePoint { x, t: p.t - dt })
    }
}

/// Bisect the chord from `inside` to `outside` until it is shorter than `tol`; returns the
/// outside end.
pub(crate) fn locate_exit(d: &Domain, inside: &SpacetimePoint, outside: &SpacetimePoint, tol: f64) -> SpacetimePoint {
    let (mut lo, mut hi) = (inside.clone(), outside.clone());
    for _ in 0..200 {
        if parabolic_distance(&lo, &hi) <= tol {
            break;
        }
        let mid = lo.lerp(&hi, 0.5);
        if d.contains(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub(crate) fn walk(
    d: &Domain,
    stepper: &Stepper,
    pole: &SpacetimePoint,
    cfg: &WalkConfig,
    path_index: u64,
    full_below: Option<f64>,
) -> Result<ExitRecord, WalkError> {
    let mut rng = path_rng(cfg.seed, path_index);
    let mut p = pole.clone();
    let floor_dt = cfg.kappa * cfg.boundary_tol * cfg.boundary_tol;
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
        let delta = d.past_boundary_distance(&p);
        // Far from t = 0 a tiny step can vanish in rounding; keep it above a few ulps of t.
        let ulp_dt = 4.0 * f64::EPSILON * p.t.abs();
        let dt = cfg.dt_max.min((cfg.kappa * delta * delta).max(floor_dt)).max(ulp_dt);
        let q = stepper.step(&p, dt, &mut rng)?;
        if !d.contains(&q) {
            let exit = locate_exit(d, &p, &q, cfg.boundary_tol);
            debug_assert!(exit.t < pole.t);
            return Ok(finish(ExitStatus::Boundary, Some(exit), steps + 1));
        }
        p = q;
    }
    Ok(finish(ExitStatus::BudgetExhausted, None, cfg.max_steps))
}

fn check_pole(d: &Domain, op: &Operator, pole: &SpacetimePoint, cfg: &WalkConfig) -> Result<(), WalkError> {
    cfg.validate()?;
    if pole.dim() != op.dim() {
        return Err(WalkError::InvalidConfig(format!(
            "pole has dimension {} but the operator has {}",
            pole.dim(),
            op.dim()
        )));
    }
    if !d.contains(pole) {
        return Err(WalkError::PoleOutside(pole.clone()));
    }
    Ok(())
}

/// Run one backward path from `pole`.
pub fn sample_exit(
    d: &Domain,
    op: &Operator,
    pole: &SpacetimePoint,
    cfg: &WalkConfig,
    path_index: u64,
) -> Result<ExitRecord, WalkError> {
    check_pole(d, op, pole, cfg)?;
    let stepper = Stepper::new(op)?;
    walk(d, &stepper, pole, cfg, path_index, d.full_below())
}

pub(crate) fn run_paths(
    d: &Domain,
    op: &Operator,
    pole: &SpacetimePoint,
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<Vec<ExitRecord>, WalkError> {
    if n_paths == 0 {
        return Err(WalkError::InvalidConfig("need at least one path".into()));
    }
    check_pole(d, op, pole, cfg)?;
    let stepper = Stepper::new(op)?;
    let full_below = d.full_below();
    (0..n_paths)
        .into_par_iter()
        .map(|i| walk(d, &stepper, pole, cfg, i, full_below))
        .collect()
}

/// Empirical parabolic measure at `pole` from paths `0..n_paths`.
pub fn estimate_measure(
    d: &Domain,
    op: &Operator,
    pole: &SpacetimePoint,
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<EmpiricalBoundaryMeasure, WalkError> {
    let records = run_paths(d, op, pole, n_paths, cfg)?;
    Ok(EmpiricalBoundaryMeasure::from_records(pole.clone(), &records, cfg))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletValue {
    pub pole: SpacetimePoint,
    pub value: f64,
    pub standard_error: f64,
    /// Fraction of paths stopped by the time floor; their value is the datum at infinity.
    pub truncated_fraction: f64,
    pub infinity_fraction: f64,
    pub flagged: bool,
}

/// Mean and standard error of a sample.
pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `u(pole) = E f(exit)`, one pole at a time. Pole `i` uses seed `mix_seed(cfg.seed, i)`.
pub fn solve_dirichlet(
    d: &Domain,
    op: &Operator,
    f: &dyn BoundaryDatum,
    poles: &[SpacetimePoint],
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<Vec<DirichletValue>, WalkError> {
    poles
        .iter()
        .enumerate()
        .map(|(i, pole)| {
            let pole_cfg = WalkConfig {
                seed: mix_seed(cfg.seed, i as u64),
                ..cfg.clone()
            };
            let records = run_paths(d, op, pole, n_paths, &pole_cfg)?;
            Ok(evaluate(pole, &records, f, cfg))
        })
        .collect()
}

pub(crate) fn evaluate(
    pole: &SpacetimePoint,
    records: &[ExitRecord],
    f: &dyn BoundaryDatum,
    cfg: &WalkConfig,
) -> DirichletValue {
    let n = records.len() as f64;
    let mut counts = [0usize; 3];
    let values: Vec<f64> = records
        .iter()
        .map(|r| match r.status {
            ExitStatus::Boundary => f.value(r.exit_point.as_ref().expect("boundary point")),
            ExitStatus::Infinity => {
                counts[0] += 1;
                f.at_infinity()
            }
            ExitStatus::Truncated => {
                counts[1] += 1;
                f.at_infinity()
            }
            ExitStatus::BudgetExhausted => {
                counts[2] += 1;
                f.at_infinity()
            }
        })
        .collect();
    let (value, standard_error) = mean_and_se(&values);
    DirichletValue {
        pole: pole.clone(),
        value,
        standard_error,
        truncated_fraction: counts[1] as f64 / n,
        infinity_fraction: counts[0] as f64 / n,
        flagged: counts[2] as f64 / n > cfg.budget_flag_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walker::Datum;

    fn half_space() -> Domain {
        Domain::after(0.0)
    }

    #[test]
    fn half_space_exits_on_the_bottom_slice() {
        let op = Operator::scaled_heat(1.0, 1);
        let pole = SpacetimePoint::new(&[0.0], 1.0);
        let cfg = WalkConfig::with_seed(11);
        for i in 0..200 {
            let r = sample_exit(&half_space(), &op, &pole, &cfg, i).unwrap();
            assert_eq!(r.status, ExitStatus::Boundary);
            let e = r.exit_point.unwrap();
            assert!(e.t <= 0.0 && e.t > -1e-4, "{e:?}");
        }
    }

    #[test]
    fn pole_outside_is_rejected() {
        let op = Operator::scaled_heat(1.0, 1);
        let err = sample_exit(
            &half_space(),
            &op,
            &SpacetimePoint::new(&[0.0], -1.0),
            &WalkConfig::default(),
            0,
        );
        assert!(matches!(err, Err(WalkError::PoleOutside(_))));
    }

    #[test]
    fn bounded_box_has_no_infinity_mass_and_unit_constant_solution() {
        let d = Domain::cylinder(&[(-1.0, 1.0)], (0.0, 2.0));
        let op = Operator::scaled_heat(1.0, 1);
        let cfg = WalkConfig::with_seed(5);
        let pole = SpacetimePoint::new(&[0.2], 1.5);
        let m = estimate_measure(&d, &op, &pole, 2000, &cfg).unwrap();
        assert_eq!(m.mass_infinity, 0.0);
        assert_eq!(m.hits.len(), 2000);
        assert!(m.hits.iter().all(|(p, _)| p.t < pole.t));
        let u = solve_dirichlet(&d, &op, &Datum::constant(1.0), &[pole], 500, &cfg).unwrap();
        assert_eq!(u[0].value, 1.0);
        assert_eq!(u[0].standard_error, 0.0);
    }

    #[test]
    fn exit_points_sit_within_tolerance_of_the_boundary() {
        let d = Domain::cylinder(&[(-1.0, 1.0), (-1.0, 1.0)], (0.0, 2.0));
        let op = Operator::scaled_heat(0.5, 2);
        let cfg = WalkConfig::with_seed(2);
        let m = estimate_measure(&d, &op, &SpacetimePoint::new(&[0.0, 0.3], 1.0), 300, &cfg).unwrap();
        for (p, _) in &m.hits {
            assert!(!d.contains(p));
            assert!(d.boundary_distance(p) <= cfg.boundary_tol);
        }
    }

    #[test]
    fn records_do_not_depend_on_thread_count() {
        let d = Domain::cylinder(&[(-1.0, 1.0)], (0.0, 2.0));
        let op = Operator::scaled_heat(1.0, 1);
        let cfg = WalkConfig::with_seed(99);
        let pole = SpacetimePoint::new(&[0.1], 1.0);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| estimate_measure(&d, &op, &pole, 400, &cfg).unwrap());
        let b = three.install(|| estimate_measure(&d, &op, &pole, 400, &cfg).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn checkerboard_is_routed_away() {
        let op = Operator::DiagonalField {
            coefficients: vec![CoefficientField::Checkerboard {
                cell: 0.25,
                low: 0.5,
                high: 1.5,
            }],
            lambda: 0.5,
        };
        let r = sample_exit(
            &half_space(),
            &op,
            &SpacetimePoint::new(&[0.0], 1.0),
            &WalkConfig::default(),
            0,
        );
        assert_eq!(r.unwrap_err(), WalkError::RoughField);
    }

    #[test]
    fn constant_tensor_matches_isotropic_heat() {
        let d = half_space();
        let pole = SpacetimePoint::new(&[0.0, 0.0], 1.0);
        let cfg = WalkConfig::with_seed(4);
        let tensor = Operator::ConstantTensor {
            matrix: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            lambda: 0.2,
        };
        let m = estimate_measure(&d, &tensor, &pole, 4000, &cfg).unwrap();
        // covariance of the exit law is 2·A·t
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (p, w) in &m.hits {
            sxx += w * p.x[0] * p.x[0];
            sxy += w * p.x[0] * p.x[1];
        }
        assert!((sxx - 2.0).abs() < 0.15, "{sxx}");
        assert!((sxy - 1.0).abs() < 0.12, "{sxy}");
        let bad = Operator::ConstantTensor {
            matrix: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            lambda: 0.2,
        };
        assert!(matches!(
            sample_exit(&d, &bad, &pole, &cfg, 0),
            Err(WalkError::Ellipticity { .. })
        ));
    }
}
