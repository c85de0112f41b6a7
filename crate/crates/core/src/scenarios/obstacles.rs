//! Exterior domains: a single cube obstacle seen from far in its future, and a sparse stack of
//! obstacles receding into the past.

use super::{combined, Check, ScenarioConfig, ScenarioError, ScenarioResult, Table};
use crate::analysis::{fit_power_law, AnalysisError, FitKind, FitSample};
use crate::geometry::{Domain, ParabolicCube, SpacetimePoint};
use crate::walker::{estimate_measure, mix_seed, EmpiricalBoundaryMeasure, Operator, WalkConfig};
use serde::{Deserialize, Serialize};

/// Smallest pole distance accepted by the complement-cube experiment.
pub const MIN_OBSTACLE_DISTANCE: f64 = 8.0;

/// One-sided normal quantile at 99%.
const Z_99: f64 = 2.326;

/// Obstacle scenarios walk with exact Gaussian increments, so the step is limited only by the
/// distance to the obstacles.
fn obstacle_walk(seed: u64) -> WalkConfig {
    WalkConfig {
        dt_max: 1e6,
        ..WalkConfig::with_seed(seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementCubeConfig {
    pub n: usize,
    /// Pole distances `R`; the pole sits at `(0, R²)`.
    pub radii: Vec<f64>,
    pub n_paths: u64,
    pub walk: WalkConfig,
}

impl ComplementCubeConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            n: 1,
            radii: vec![8.0, 16.0, 32.0, 64.0],
            n_paths: 20_000,
            walk: obstacle_walk(seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseCubesConfig {
    pub n: usize,
    /// Obstacle depths `R_j`; obstacle `j` is the closed unit cube centered at `(0, −R_j²)`.
    pub radii: Vec<f64>,
    pub n_paths: u64,
    /// Paths per pole for the three reference cases.
    pub case_paths: u64,
    pub walk: WalkConfig,
}

impl SparseCubesConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            n: 1,
            radii: (1..=4).map(|j| 100.0 * 4f64.powi(j)).collect(),
            n_paths: 200_000,
            case_paths: 20_000,
            walk: obstacle_walk(seed),
        }
    }
}

fn unit_obstacle(n: usize, t: f64) -> ParabolicCube {
    ParabolicCube::full(SpacetimePoint::new(&vec![0.0; n], t), 1.0)
}

fn bernoulli_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Mass that the parabolic measure of `ℝ^{n+1} \ closed(obstacle)` at `pole` puts on the
/// obstacle, with its standard error.
pub fn obstacle_mass(
    obstacle: &ParabolicCube,
    pole: &SpacetimePoint,
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<(f64, f64), ScenarioError> {
    let d = Domain::ComplementCubes {
        cubes: vec![obstacle.clone()],
    };
    let op = Operator::scaled_heat(1.0, pole.dim());
    let m = estimate_measure(&d, &op, pole, n_paths, cfg)?;
    Ok((m.mass_boundary(), m.se_boundary()))
}

/// Decay of the obstacle's measure as the pole `(0, R²)` recedes into its future.
pub fn run_complement_cube(cfg: &ComplementCubeConfig) -> Result<ScenarioResult, ScenarioError> {
    let radii = &cfg.radii;
    if radii.len() < 4 || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ScenarioError::InvalidParameters(
            "need at least four increasing pole distances".into(),
        ));
    }
    if let Some(r) = radii.iter().find(|&&r| !(r >= MIN_OBSTACLE_DISTANCE)) {
        return Err(ScenarioError::InvalidParameters(format!(
            "pole distance {r} is below the floor {MIN_OBSTACLE_DISTANCE}"
        )));
    }
    let mut out = ScenarioResult::new("complement-cube", ScenarioConfig::ComplementCube(cfg.clone()));
    let obstacle = unit_obstacle(cfg.n, -1.0);
    let mut table = Table::new(&["R", "mass", "standard_error"]);
    let mut samples = Vec::new();
    for (j, &r) in radii.iter().enumerate() {
        let pole = SpacetimePoint::new(&vec![0.0; cfg.n], r * r);
        let walk = WalkConfig {
            seed: mix_seed(cfg.walk.seed, j as u64),
            ..cfg.walk.clone()
        };
        let (mass, se) = obstacle_mass(&obstacle, &pole, cfg.n_paths, &walk)?;
        table.push(vec![r, mass, se]);
        samples.push(FitSample {
            scale: r,
            value: mass,
            standard_error: se,
        });
    }
    let min_mass = samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    if samples.iter().any(|s| s.standard_error > 0.2 * min_mass) {
        out.flagged = true;
        out.notices.push(format!(
            "standard errors exceed 20% of the smallest mass {min_mass}; increase the path count"
        ));
    }
    let decreasing = samples.windows(2).all(|w| w[1].value < w[0].value);
    out.checks.push(Check::new(
        "masses decrease with R",
        decreasing,
        format!("{:?}", samples.iter().map(|s| s.value).collect::<Vec<_>>()),
    ));
    let bound = -0.5 * cfg.n as f64 + 0.15;
    match fit_power_law(FitKind::ComplementCube, samples) {
        Ok(fit) => {
            out.quantity("slope", fit.slope, Some(0.5 * fit.band));
            out.quantity("band", fit.band, None);
            out.checks.push(Check::new(
                "fitted slope at most -n/2 + 0.15",
                fit.slope <= bound,
                format!("slope {} against bound {bound}", fit.slope),
            ));
        }
        Err(AnalysisError::FitRejected { reason, fit }) => {
            out.flagged = true;
            out.quantity("slope", fit.slope, Some(0.5 * fit.band));
            out.checks
                .push(Check::new("fitted slope at most -n/2 + 0.15", false, reason));
        }
        Err(e) => return Err(e.into()),
    }
    out.tables.insert("masses".into(), table);
    Ok(out)
}

/// Index of the obstacle whose closure is nearest in time to `t`.
fn nearest_obstacle(cubes: &[ParabolicCube], t: f64) -> usize {
    cubes
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.center.t - t).abs().total_cmp(&(b.1.center.t - t).abs()))
        .map(|(j, _)| j)
        .expect("at least one obstacle")
}

/// Measure of the finite boundary of `ℝ^{n+1} \ ⋃ K_j` at the origin.
pub fn run_sparse_cubes(cfg: &SparseCubesConfig) -> Result<ScenarioResult, ScenarioError> {
    if cfg.radii.windows(2).any(|w| !(w[1] > w[0])) || cfg.radii.iter().any(|&r| !(r > 1.0)) {
        return Err(ScenarioError::InvalidParameters(
            "obstacle depths must be increasing and exceed 1".into(),
        ));
    }
    let mut out = ScenarioResult::new("sparse-cubes", ScenarioConfig::SparseCubes(cfg.clone()));
    let cubes: Vec<ParabolicCube> = cfg.radii.iter().map(|r| unit_obstacle(cfg.n, -r * r)).collect();
    let d = Domain::ComplementCubes { cubes: cubes.clone() };
    let op = Operator::scaled_heat(1.0, cfg.n);
    let pole = SpacetimePoint::origin(cfg.n);
    let m = estimate_measure(&d, &op, &pole, cfg.n_paths, &cfg.walk)?;

    let mut per_obstacle = vec![0u64; cubes.len()];
    for (p, _) in &m.hits {
        per_obstacle[nearest_obstacle(&cubes, p.t)] += 1;
    }
    let mut table = Table::new(&["j", "R", "mass", "standard_error"]);
    let masses: Vec<(f64, f64)> = per_obstacle
        .iter()
        .map(|&c| {
            let p = c as f64 / cfg.n_paths as f64;
            (p, bernoulli_se(p, cfg.n_paths))
        })
        .collect();
    for (j, (&r, &(mass, se))) in cfg.radii.iter().zip(&masses).enumerate() {
        table.push(vec![(j + 1) as f64, r, mass, se]);
    }
    out.tables.insert("obstacles".into(), table);

    let total = m.mass_boundary();
    let total_se = m.se_boundary();
    out.quantity("mass_boundary", total, Some(total_se));
    out.quantity("mass_infinity", m.mass_infinity, Some(m.se_infinity));
    out.quantity("mass_truncated", m.mass_truncated, None);
    out.quantity("mass_budget", m.mass_budget, None);
    if m.flagged {
        out.flagged = true;
        out.notices.push("too many paths exhausted the step budget".into());
    }
    if let Some(min_mass) = masses.iter().map(|m| m.0).reduce(f64::min) {
        if masses.iter().any(|m| m.1 > 0.2 * min_mass) {
            out.flagged = true;
            out.notices.push(format!(
                "per-obstacle standard errors exceed 20% of the smallest mass {min_mass}"
            ));
        }
    }

    out.checks.push(Check::new(
        "boundary mass + 3 SE < 1",
        total + 3.0 * total_se < 1.0,
        format!("{total} ± {total_se}"),
    ));
    out.checks.push(Check::new(
        "mass at infinity positive at 99% confidence",
        m.mass_infinity - Z_99 * m.se_infinity > 0.0,
        format!("{} ± {}", m.mass_infinity, m.se_infinity),
    ));
    let ordered = masses
        .windows(2)
        .all(|w| w[1].0 <= w[0].0 + 3.0 * combined(w[0].1, w[1].1));
    out.checks.push(Check::new(
        "obstacle masses decrease with depth within 3 SE",
        ordered,
        format!("{:?}", masses.iter().map(|m| m.0).collect::<Vec<_>>()),
    ));

    let cases = reference_cases(cfg)?;
    let mut case_table = Table::new(&["case", "mass", "standard_error"]);
    for (k, m) in cases.iter().enumerate() {
        case_table.push(vec![(k + 1) as f64, m.mass_boundary(), m.se_boundary()]);
    }
    out.tables.insert("cases".into(), case_table);
    let unit = |m: &EmpiricalBoundaryMeasure| (m.mass_boundary() - 1.0).abs() <= 3.0 * m.se_boundary();
    out.checks.push(Check::new(
        "bounded box: boundary mass 1",
        unit(&cases[0]),
        format!("{}", cases[0].mass_boundary()),
    ));
    out.checks.push(Check::new(
        "bounded obstacle: boundary mass below 1",
        cases[1].mass_boundary() + 3.0 * cases[1].se_boundary() < 1.0,
        format!("{} ± {}", cases[1].mass_boundary(), cases[1].se_boundary()),
    ));
    out.checks.push(Check::new(
        "cylinder with finite start: boundary mass 1",
        unit(&cases[2]),
        format!("{}", cases[2].mass_boundary()),
    ));
    Ok(out)
}

/// Bounded box, bounded obstacle, and a spatially unbounded cylinder with a bottom.
fn reference_cases(cfg: &SparseCubesConfig) -> Result<Vec<EmpiricalBoundaryMeasure>, ScenarioError> {
    let n = cfg.n;
    let op = Operator::scaled_heat(1.0, n);
    let origin_at = |t: f64| SpacetimePoint::new(&vec![0.0; n], t);
    let cases = [
        (Domain::cylinder(&vec![(-1.0, 1.0); n], (0.0, 1.0)), origin_at(0.5)),
        (
            Domain::ComplementCubes {
                cubes: vec![unit_obstacle(n, -1.0)],
            },
            origin_at(4.0),
        ),
        (
            Domain::cylinder(&vec![(f64::NEG_INFINITY, f64::INFINITY); n], (0.0, f64::INFINITY)),
            origin_at(1.0),
        ),
    ];
    cases
        .iter()
        .enumerate()
        .map(|(k, (d, pole))| {
            let walk = WalkConfig {
                seed: mix_seed(cfg.walk.seed, 100 + k as u64),
                ..cfg.walk.clone()
            };
            Ok(estimate_measure(d, &op, pole, cfg.case_paths, &walk)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obstacle_in_the_future_receives_nothing() {
        let obstacle = unit_obstacle(1, 70.0);
        let (mass, se) = obstacle_mass(&obstacle, &SpacetimePoint::new(&[0.0], 64.0), 500, &obstacle_walk(1)).unwrap();
        assert_eq!((mass, se), (0.0, 0.0));
    }

    #[test]
    fn distances_below_the_floor_are_rejected() {
        let cfg = ComplementCubeConfig {
            radii: vec![4.0, 8.0, 16.0, 32.0],
            ..ComplementCubeConfig::new(1)
        };
        assert!(matches!(
            run_complement_cube(&cfg),
            Err(ScenarioError::InvalidParameters(_))
        ));
        let short = ComplementCubeConfig {
            radii: vec![8.0, 16.0, 32.0],
            ..ComplementCubeConfig::new(1)
        };
        assert!(run_complement_cube(&short).is_err());
    }

    #[test]
    fn no_obstacles_sends_everything_to_infinity() {
        let cfg = SparseCubesConfig {
            radii: vec![],
            n_paths: 200,
            case_paths: 200,
            ..SparseCubesConfig::new(3)
        };
        let r = run_sparse_cubes(&cfg).unwrap();
        assert_eq!(r.get("mass_infinity").unwrap().value, 1.0);
        assert_eq!(r.get("mass_boundary").unwrap().value, 0.0);
    }

    #[test]
    fn small_complement_cube_run_decays() {
        let cfg = ComplementCubeConfig {
            n_paths: 4000,
            ..ComplementCubeConfig::new(9)
        };
        let r = run_complement_cube(&cfg).unwrap();
        let masses = r.tables["masses"].column("mass").unwrap();
        assert!(masses[0] > masses[3], "{masses:?}");
    }
}
