//! Closed-form and structural oracles across all modules, gathered into one result.

use super::{Check, ScenarioConfig, ScenarioError, ScenarioResult};
use crate::analysis::{bourgain_eta, fit_power_law, iteration_exponent, ks_distance_normal, FitKind, FitSample};
use crate::capacity::{capacity_of, pinned_slab_capacity, CompactSetSample};
use crate::geometry::{
    classify_boundary, dyadic_scales, parabolic_norm, BoundaryClass, Domain, ParabolicCube, SpacetimePoint,
};
use crate::kernels::{chapman_kolmogorov_residual, kernel_mass, ScaledHeatKernel};
use crate::walker::{estimate_measure, mix_seed, solve_dirichlet, Datum, Operator, WalkConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Paths for the exit-law check.
    pub n_paths: u64,
    pub seed: u64,
}

impl ValidationConfig {
    pub fn new(seed: u64) -> Self {
        Self { n_paths: 100_000, seed }
    }
}

fn walk(cfg: &ValidationConfig, salt: u64) -> WalkConfig {
    WalkConfig::with_seed(mix_seed(cfg.seed, salt))
}

pub fn run_validation_suite(cfg: &ValidationConfig) -> Result<ScenarioResult, ScenarioError> {
    let mut out = ScenarioResult::new("validation", ScenarioConfig::Validation(cfg.clone()));
    let pt = |x: &[f64], t: f64| SpacetimePoint::new(x, t);

    let mut worst_mass = 0.0f64;
    for n in 1..=2 {
        for m in [0.5, 1.0, 2.0] {
            let k = ScaledHeatKernel::new(m, n).expect("valid kernel");
            worst_mass = worst_mass.max((kernel_mass(&k, 0.7) - 1.0).abs());
        }
    }
    out.checks.push(Check::new(
        "kernel integrates to 1 within 1e-6",
        worst_mass < 1e-6,
        format!("largest deviation {worst_mass:e}"),
    ));
    let ck = chapman_kolmogorov_residual(1.0, 0.4, 1.0, 0.35, -0.3, 0.0);
    out.checks.push(Check::new(
        "Chapman-Kolmogorov residual below 1e-4",
        ck < 1e-4,
        format!("{ck:e}"),
    ));

    let norms = [
        parabolic_norm(&pt(&[0.0], 0.0)),
        parabolic_norm(&pt(&[3.0, 0.0], -4.0)),
        parabolic_norm(&pt(&[0.5], -1.0)),
    ];
    out.checks.push(Check::new(
        "parabolic norm examples",
        norms == [0.0, 3.0, 1.0],
        format!("{norms:?}"),
    ));

    let lobe = Domain::Petrovsky { reflected: false };
    let membership = lobe.contains(&pt(&[0.5], -0.1)) && !lobe.contains(&pt(&[0.6], -0.1));
    out.checks
        .push(Check::new("Petrovsky membership examples", membership, ""));

    let rectangle = Domain::cylinder(&[(-1.0, 1.0)], (0.0, 1.0));
    let scales = dyadic_scales(0.25, 8);
    let faces = [
        (pt(&[0.0], 0.0), BoundaryClass::Bottom),
        (pt(&[0.0], 1.0), BoundaryClass::Singular),
        (pt(&[1.0], 0.5), BoundaryClass::Normal),
    ];
    let classes: Vec<BoundaryClass> = faces
        .iter()
        .map(|(p, _)| classify_boundary(&rectangle, p, &scales, 200).map(|c| c.class))
        .collect::<Result<_, _>>()?;
    out.checks.push(Check::new(
        "rectangle faces classify as bottom, singular, normal",
        faces.iter().zip(&classes).all(|((_, want), got)| want == got),
        format!("{classes:?}"),
    ));

    let tall = Domain::cylinder(&[(-1.0, 1.0)], (0.0, 4.0));
    let lateral = tall.essential_distance(&pt(&[0.0], 2.0))?.value;
    let obstacle = Domain::ComplementCubes {
        cubes: vec![ParabolicCube::full(pt(&[0.0], -1.0), 1.0)],
    };
    let above = obstacle.essential_distance(&pt(&[0.0], 3.0))?.value;
    out.checks.push(Check::new(
        "essential distance examples",
        (lateral - 1.0).abs() < 1e-12 && (above - 3f64.sqrt()).abs() < 1e-6,
        format!("{lateral}, {above}"),
    ));

    // Exit law of the half-space from (0, 1): Normal(0, 2) on the bottom slice.
    let half = Domain::after(0.0);
    let heat = Operator::scaled_heat(1.0, 1);
    let m = estimate_measure(&half, &heat, &pt(&[0.0], 1.0), cfg.n_paths, &walk(cfg, 1))?;
    let xs: Vec<f64> = m.hits.iter().map(|(p, _)| p.x[0]).collect();
    let ks = ks_distance_normal(&xs, 0.0, 2f64.sqrt())?;
    out.quantity("exit_law_ks", ks, None);
    out.checks.push(Check::new(
        "half-space exit law: KS distance to Normal(0, 2) below 0.02, no mass at infinity",
        ks < 0.02 && m.mass_infinity == 0.0,
        format!("KS {ks}, infinity mass {}", m.mass_infinity),
    ));

    let one = solve_dirichlet(
        &rectangle,
        &heat,
        &Datum::constant(1.0),
        &[pt(&[0.3], 0.6)],
        2000,
        &walk(cfg, 2),
    )?;
    out.checks.push(Check::new(
        "constant datum on a bounded box gives exactly 1",
        one[0].value == 1.0,
        format!("{}", one[0].value),
    ));

    let k1 = ScaledHeatKernel { m: 1.0, n: 1 };
    let singleton = capacity_of(&CompactSetSample::singleton(pt(&[0.0], 0.0)), &k1)?.lp_value;
    out.checks.push(Check::new(
        "singleton capacity below 1e-6",
        singleton < 1e-6,
        format!("{singleton:e}"),
    ));

    let small = pinned_slab_capacity(&k1, 1.0)?.certified_lower;
    let large = pinned_slab_capacity(&k1, 2.0)?.certified_lower;
    let ratio = large / small;
    out.quantity("slab_capacity_ratio_n1", ratio, None);
    out.checks.push(Check::new(
        "slab capacity doubles with the radius (n = 1) within 30%",
        (0.7 * 2.0..=1.3 * 2.0).contains(&ratio),
        format!("{large} / {small} = {ratio}"),
    ));

    let exps = [
        iteration_exponent(0.5, 0.5)?,
        iteration_exponent(0.75, 0.5)?,
        iteration_exponent(0.19, 0.3)?,
    ];
    out.checks.push(Check::new(
        "iteration exponent examples",
        (exps[0] - 0.5).abs() < 1e-12 && (exps[1] - 1.0).abs() < 1e-12 && (exps[2] - 0.0875).abs() < 5e-5,
        format!("{exps:?}"),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 3));
    let beta = 0.8;
    let samples = (0..6)
        .map(|j| {
            let scale = 0.5f64.powi(j);
            let value = scale.powf(beta);
            let noise: f64 = StandardNormal.sample(&mut rng);
            FitSample {
                scale,
                value: value * (1.0 + 0.02 * noise),
                standard_error: 0.02 * value,
            }
        })
        .collect();
    let fit = fit_power_law(FitKind::Synthetic, samples)?;
    out.checks.push(Check::new(
        "synthetic power law recovered within the band",
        (fit.slope - beta).abs() <= fit.band,
        format!("slope {} ± {}", fit.slope, fit.band),
    ));

    let bottom = bourgain_eta(&tall, &heat, &pt(&[0.0], 0.0), 0.2, 0.25, 4, 400, &walk(cfg, 4))?;
    out.checks.push(Check::new(
        "bottom point: parabolic measure of the nearby cube near 1",
        bottom.eta_hat > 0.9,
        format!("{}", bottom.eta_hat),
    ));

    let future = super::obstacle_mass(
        &ParabolicCube::full(pt(&[0.0], 70.0), 1.0),
        &pt(&[0.0], 64.0),
        1000,
        &walk(cfg, 5),
    )?;
    out.checks.push(Check::new(
        "obstacle in the future receives no mass",
        future.0 == 0.0,
        "",
    ));

    out.quantity(
        "checks_passed",
        out.checks.iter().filter(|c| c.passed).count() as f64,
        None,
    );
    out.quantity("checks_total", out.checks.len() as f64, None);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_reproducible() {
        let cfg = ValidationConfig {
            n_paths: 20_000,
            seed: 7,
        };
        let a = run_validation_suite(&cfg).unwrap();
        let failed: Vec<_> = a.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        let b = run_validation_suite(&cfg).unwrap();
        assert_eq!(super::super::to_json(&a), super::super::to_json(&b));
    }
}
