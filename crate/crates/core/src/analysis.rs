//! Boundary-behaviour experiments: Bourgain lower bounds, decay exponents and power-law fits.

use crate::geometry::{CubeKind, Domain, ParabolicCube, SpacetimePoint};
use crate::walker::{
    estimate_measure, mix_seed, path_rng, solve_dirichlet, BoundaryDatum, Datum, Operator, WalkConfig, WalkError,
};
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point {0:?} does not sit on the boundary at the sampling resolution")]
    NotOnBoundary(SpacetimePoint),
    #[error("no poles found inside the domain near the boundary point")]
    NoAdmissiblePoles,
    #[error("fit rejected: {reason}")]
    FitRejected { reason: String, fit: Box<ExponentFit> },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleMass {
    pub pole: SpacetimePoint,
    pub mass: f64,
    pub standard_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BourgainReport {
    pub x0: SpacetimePoint,
    pub r: f64,
    pub gamma: f64,
    pub eta_hat: f64,
    pub eta_se: f64,
    pub poles: Vec<PoleMass>,
    pub n_paths: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    HolderDecay,
    TailDecay,
    ComplementCube,
    Synthetic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitSample {
    pub scale: f64,
    pub value: f64,
    pub standard_error: f64,
}

/// Least-squares slope of `log value` against `log scale`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub kind: FitKind,
    pub samples: Vec<FitSample>,
    pub slope: f64,
    pub intercept: f64,
    /// Slope standard error from the regression residuals.
    pub se_residual: f64,
    /// Slope standard error propagated from the Monte Carlo errors of the values.
    pub se_sampling: f64,
    /// Half-width `2·√(se_residual² + se_sampling²)`.
    pub band: f64,
}

/// Largest relative standard error a fitted value may carry.
pub const MAX_RELATIVE_SE: f64 = 0.25;

/// Fit a power law to at least four samples. Values must be positive and have relative
/// standard error at most [`MAX_RELATIVE_SE`].
pub fn fit_power_law(kind: FitKind, samples: Vec<FitSample>) -> Result<ExponentFit, AnalysisError> {
    if samples.len() < 4 {
        return Err(AnalysisError::InvalidArgument(format!(
            "a fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.scale.ln()).collect();
    let logs: Vec<f64> = samples.iter().map(|s| s.value.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = logs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&logs).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss: f64 = xs
        .iter()
        .zip(&logs)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se_residual = (rss / (n - 2.0) / sxx).sqrt();
    let se_sampling = xs
        .iter()
        .zip(&samples)
        .map(|(x, s)| {
            let rel = s.standard_error / s.value;
            ((x - x_mean) / sxx * rel).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let fit = ExponentFit {
        kind,
        samples,
        slope,
        intercept,
        se_residual,
        se_sampling,
        band: 2.0 * (se_residual.powi(2) + se_sampling.powi(2)).sqrt(),
    };
    if let Some(bad) = fit
        .samples
        .iter()
        .find(|s| !(s.value > 0.0) || s.standard_error / s.value > MAX_RELATIVE_SE)
    {
        return Err(AnalysisError::FitRejected {
            reason: format!(
                "value {} at scale {} has standard error {}",
                bad.value, bad.scale, bad.standard_error
            ),
            fit: Box::new(fit),
        });
    }
    Ok(fit)
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `Normal(mean, sd)`.
pub fn ks_distance_normal(samples: &[f64], mean: f64, sd: f64) -> Result<f64, AnalysisError> {
    let normal = Normal::new(mean, sd).map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
    if samples.is_empty() {
        return Err(AnalysisError::InvalidArgument("no samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max))
}

/// `log(1 − η)/(2·log γ)`.
pub fn iteration_exponent(eta: f64, gamma: f64) -> Result<f64, AnalysisError> {
    if !(eta > 0.0 && eta < 1.0 && gamma > 0.0 && gamma < 1.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "need η, γ in (0,1), got η = {eta}, γ = {gamma}"
        )));
    }
    Ok((1.0 - eta).ln() / (2.0 * gamma.ln()))
}

fn uniform_in_cube(cube: &ParabolicCube, rng: &mut impl Rng) -> SpacetimePoint {
    let n = cube.center.dim();
    let (t_lo, t_hi) = cube.time_window();
    loop {
        let x: Vec<f64> = (0..n)
            .map(|k| cube.center.x[k] + cube.radius * rng.random_range(-1.0..1.0))
            .collect();
        let p = SpacetimePoint::new(&x, rng.random_range(t_lo..t_hi));
        if cube.contains(&p) {
            return p;
        }
    }
}

/// Whether both the domain and its complement are seen near `x0`.
fn membership_flips(d: &Domain, x0: &SpacetimePoint, radius: f64, seed: u64) -> bool {
    let cube = ParabolicCube::full(x0.clone(), radius);
    let mut rng = path_rng(seed, u64::MAX);
    let (mut inside, mut outside) = (d.contains(x0), !d.contains(x0));
    for _ in 0..4000 {
        if d.contains(&uniform_in_cube(&cube, &mut rng)) {
            inside = true;
        } else {
            outside = true;
        }
        if inside && outside {
            return true;
        }
    }
    false
}

/// Minimum over sampled poles in `Q_{γr}(x0) ∩ Ω` of the parabolic measure of `Q_r(x0)`.
#[allow(clippy::too_many_arguments)]
pub fn bourgain_eta(
    d: &Domain,
    op: &Operator,
    x0: &SpacetimePoint,
    r: f64,
    gamma: f64,
    pole_count: usize,
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<BourgainReport, AnalysisError> {
    if !(gamma > 0.0 && gamma < 1.0) || !(r > 0.0) || pole_count == 0 {
        return Err(AnalysisError::InvalidArgument(format!(
            "need γ in (0,1), r > 0 and at least one pole; got γ = {gamma}, r = {r}"
        )));
    }
    if d.contains(x0) || !membership_flips(d, x0, gamma * r / 8.0, cfg.seed) {
        return Err(AnalysisError::NotOnBoundary(x0.clone()));
    }
    let window = ParabolicCube::full(x0.clone(), gamma * r);
    let mut rng = path_rng(mix_seed(cfg.seed, 0xB0B), 0);
    let mut poles = Vec::with_capacity(pole_count);
    for _ in 0..10_000 * pole_count {
        let p = uniform_in_cube(&window, &mut rng);
        if d.contains(&p) {
            poles.push(p);
            if poles.len() == pole_count {
                break;
            }
        }
    }
    if poles.len() < pole_count {
        return Err(AnalysisError::NoAdmissiblePoles);
    }
    let target = ParabolicCube::full(x0.clone(), r);
    let table = poles
        .into_iter()
        .enumerate()
        .map(|(i, pole)| {
            let pole_cfg = WalkConfig {
                seed: mix_seed(cfg.seed, i as u64),
                ..cfg.clone()
            };
            let m = estimate_measure(d, op, &pole, n_paths, &pole_cfg)?;
            let hits = m.hits.iter().filter(|(p, _)| target.closure_contains(p)).count();
            let mass = hits as f64 / n_paths as f64;
            Ok(PoleMass {
                pole,
                mass,
                standard_error: (mass * (1.0 - mass) / n_paths as f64).sqrt(),
            })
        })
        .collect::<Result<Vec<_>, WalkError>>()?;
    let worst = table
        .iter()
        .min_by(|a, b| a.mass.total_cmp(&b.mass))
        .expect("at least one pole");
    Ok(BourgainReport {
        x0: x0.clone(),
        r,
        gamma,
        eta_hat: worst.mass,
        eta_se: worst.standard_error,
        n_paths,
        seed: cfg.seed,
        poles: table,
    })
}

/// Poles approaching a boundary point along a spatial direction, at time offset `δ²/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Approach {
    pub x0: SpacetimePoint,
    /// Unit inward direction.
    pub normal: Vec<f64>,
}

impl Approach {
    pub fn pole(&self, delta: f64) -> SpacetimePoint {
        let x: Vec<f64> = self.x0.x.iter().zip(&self.normal).map(|(a, b)| a + delta * b).collect();
        SpacetimePoint::new(&x, self.x0.t + 0.5 * delta * delta)
    }
}

/// Decay exponent of the solution with datum `datum` (which should vanish near `x0`) along the
/// ladder of distances.
pub fn holder_fit(
    d: &Domain,
    op: &Operator,
    datum: &Datum,
    approach: &Approach,
    ladder: &[f64],
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<ExponentFit, AnalysisError> {
    if datum.value(&approach.x0) != 0.0 {
        return Err(AnalysisError::InvalidArgument(
            "the datum must vanish at the approached boundary point".into(),
        ));
    }
    let poles: Vec<SpacetimePoint> = ladder.iter().map(|&delta| approach.pole(delta)).collect();
    let values = solve_dirichlet(d, op, datum as &dyn BoundaryDatum, &poles, n_paths, cfg)?;
    let samples = ladder
        .iter()
        .zip(values)
        .map(|(&scale, v)| FitSample {
            scale,
            value: v.value,
            standard_error: v.standard_error,
        })
        .collect();
    fit_power_law(FitKind::HolderDecay, samples)
}

/// Decay of the measure outside `Q_{4r}(x0)` as poles approach `x0`, against distance over `r`.
/// Mass escaping to infinity counts as outside.
#[allow(clippy::too_many_arguments)]
pub fn tail_decay_fit(
    d: &Domain,
    op: &Operator,
    approach: &Approach,
    r: f64,
    ladder: &[f64],
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<ExponentFit, AnalysisError> {
    let near = ParabolicCube::new(approach.x0.clone(), 4.0 * r, CubeKind::Full);
    let samples = ladder
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            let pole = approach.pole(delta);
            let pole_cfg = WalkConfig {
                seed: mix_seed(cfg.seed, i as u64),
                ..cfg.clone()
            };
            let m = estimate_measure(d, op, &pole, n_paths, &pole_cfg)?;
            let inside = m.hits.iter().filter(|(p, _)| near.closure_contains(p)).count();
            let tail = 1.0 - inside as f64 / n_paths as f64;
            Ok(FitSample {
                scale: crate::geometry::parabolic_distance(&pole, &approach.x0) / r,
                value: tail,
                standard_error: (tail * (1.0 - tail) / n_paths as f64).sqrt(),
            })
        })
        .collect::<Result<Vec<_>, WalkError>>()?;
    fit_power_law(FitKind::TailDecay, samples)
}
