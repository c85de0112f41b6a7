//! Cross-checks between the continuous and lattice walkers on closed-form problems.

use caloric::geometry::{Domain, SpacetimePoint};
use caloric::walker::{
    estimate_lattice_measure, measure_mean, solve_dirichlet, BoundaryDatum, Datum, LatticeConfig, Operator, WalkConfig,
};

fn unit_box() -> Domain {
    Domain::cylinder(&[(-1.0, 1.0)], (0.0, 1.0))
}

/// `x + 1/2` solves the heat equation, so it is its own Dirichlet solution.
fn affine() -> Datum {
    Datum::Linear {
        gradient: vec![1.0],
        offset: 0.5,
        infinity: 0.0,
    }
}

#[test]
fn continuous_walker_reproduces_an_affine_solution() {
    let poles = [SpacetimePoint::new(&[0.3], 0.6), SpacetimePoint::new(&[-0.7], 0.9)];
    let values = solve_dirichlet(
        &unit_box(),
        &Operator::scaled_heat(1.0, 1),
        &affine(),
        &poles,
        20_000,
        &WalkConfig::with_seed(4),
    )
    .unwrap();
    for (p, v) in poles.iter().zip(&values) {
        let exact = p.x[0] + 0.5;
        assert!(
            (v.value - exact).abs() < 3.0 * v.standard_error + 5e-3,
            "{} vs {exact}",
            v.value
        );
    }
}

#[test]
fn lattice_and_continuous_walkers_agree() {
    let d = unit_box();
    let op = Operator::scaled_heat(0.5, 1);
    let pole = SpacetimePoint::new(&[0.2], 0.8);
    let lattice = estimate_lattice_measure(
        &d,
        &op,
        &pole,
        &LatticeConfig {
            h: 0.05,
            time_step: None,
        },
        20_000,
        &WalkConfig::with_seed(5),
    )
    .unwrap();
    let datum = affine();
    let (lat, lat_se) = measure_mean(&lattice, |p| datum.value(p), 0.0);
    let cont = solve_dirichlet(&d, &op, &datum, &[pole], 20_000, &WalkConfig::with_seed(6)).unwrap();
    let combined = lat_se.hypot(cont[0].standard_error);
    assert!(
        (lat - cont[0].value).abs() < 3.0 * combined + 0.05,
        "{lat} vs {}",
        cont[0].value
    );
}

#[test]
fn bounded_domains_lose_no_mass() {
    let d = Domain::ball_cylinder(&[0.0, 0.0], 1.0, (0.0, 2.0));
    let values = solve_dirichlet(
        &d,
        &Operator::scaled_heat(2.0, 2),
        &Datum::constant(1.0),
        &[SpacetimePoint::new(&[0.5, -0.5], 1.5)],
        3000,
        &WalkConfig::with_seed(7),
    )
    .unwrap();
    assert_eq!(values[0].value, 1.0);
}
