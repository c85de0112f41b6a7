//! Boundary-behavior estimates on small reference domains.

use caloric::analysis::{bourgain_eta, holder_fit, iteration_exponent, tail_decay_fit, Approach};
use caloric::geometry::{Domain, SpacetimePoint};
use caloric::walker::{Datum, Operator, WalkConfig};

fn strip() -> Domain {
    Domain::cylinder(&[(0.0, 2.0)], (0.0, 5.0))
}

/// Zero on the left wall, one elsewhere on the boundary.
fn wall_datum() -> Datum {
    Datum::Wall {
        axis: 0,
        threshold: 0.0,
        below: 0.0,
        above: 1.0,
        infinity: 0.0,
    }
}

fn left_wall() -> Approach {
    Approach {
        x0: SpacetimePoint::new(&[0.0], 4.0),
        normal: vec![1.0],
    }
}

fn heat() -> Operator {
    Operator::scaled_heat(1.0, 1)
}

const LADDER: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

#[test]
fn holder_exponent_is_scale_invariant() {
    let cfg = WalkConfig::with_seed(21);
    let base = holder_fit(&strip(), &heat(), &wall_datum(), &left_wall(), &LADDER, 20_000, &cfg).unwrap();
    let doubled: Vec<f64> = LADDER.iter().map(|d| 2.0 * d).collect();
    let twice = holder_fit(&strip(), &heat(), &wall_datum(), &left_wall(), &doubled, 20_000, &cfg).unwrap();
    assert!(
        (base.slope - twice.slope).abs() <= base.band.max(twice.band),
        "{} ± {} vs {} ± {}",
        base.slope,
        base.band,
        twice.slope,
        twice.band
    );
}

#[test]
fn exterior_slab_exponent_is_positive() {
    let slab = Domain::cylinder(&[(f64::NEG_INFINITY, 0.0)], (2.0, 4.5));
    let d = Domain::intersection(vec![
        Domain::cylinder(&[(-2.0, 2.0)], (0.0, 5.0)),
        Domain::complement(slab),
    ]);
    let fit = holder_fit(
        &d,
        &heat(),
        &wall_datum(),
        &left_wall(),
        &LADDER,
        20_000,
        &WalkConfig::with_seed(22),
    )
    .unwrap();
    assert!(fit.slope - fit.band > 0.0, "{} ± {}", fit.slope, fit.band);
}

fn cylinder() -> Domain {
    Domain::cylinder(&[(-1.0, 1.0)], (0.0, 4.0))
}

fn cylinder_wall() -> Approach {
    Approach {
        x0: SpacetimePoint::new(&[-1.0], 2.0),
        normal: vec![1.0],
    }
}

const FINE_LADDER: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

#[test]
fn tail_exponent_is_positive_and_not_below_the_holder_exponent() {
    let cfg = WalkConfig::with_seed(23);
    let tail = tail_decay_fit(&cylinder(), &heat(), &cylinder_wall(), 0.1, &FINE_LADDER, 20_000, &cfg).unwrap();
    assert!(tail.slope - tail.band > 0.0, "{} ± {}", tail.slope, tail.band);
    let datum = Datum::Wall {
        axis: 0,
        threshold: -1.0,
        below: 0.0,
        above: 1.0,
        infinity: 0.0,
    };
    let holder = holder_fit(
        &cylinder(),
        &heat(),
        &datum,
        &cylinder_wall(),
        &FINE_LADDER,
        20_000,
        &cfg,
    )
    .unwrap();
    assert!(
        tail.slope >= holder.slope - holder.band.max(tail.band),
        "tail {} ± {}, Hölder {} ± {}",
        tail.slope,
        tail.band,
        holder.slope,
        holder.band
    );
}

#[test]
fn iteration_exponent_of_measured_eta_is_below_the_fitted_exponent() {
    let cfg = WalkConfig::with_seed(24);
    let gamma = 0.25;
    let eta = bourgain_eta(&cylinder(), &heat(), &cylinder_wall().x0, 0.2, gamma, 8, 4000, &cfg).unwrap();
    let predicted = iteration_exponent(eta.eta_hat, gamma).unwrap();
    let datum = Datum::Wall {
        axis: 0,
        threshold: -1.0,
        below: 0.0,
        above: 1.0,
        infinity: 0.0,
    };
    let fit = holder_fit(
        &cylinder(),
        &heat(),
        &datum,
        &cylinder_wall(),
        &FINE_LADDER,
        20_000,
        &cfg,
    )
    .unwrap();
    assert!(
        predicted <= fit.slope + fit.band,
        "{predicted} vs {} ± {}",
        fit.slope,
        fit.band
    );
}

#[test]
fn wider_pole_window_lowers_eta() {
    let cfg = WalkConfig::with_seed(25);
    let x0 = cylinder_wall().x0;
    let near = bourgain_eta(&cylinder(), &heat(), &x0, 0.2, 0.25, 8, 4000, &cfg).unwrap();
    let far = bourgain_eta(&cylinder(), &heat(), &x0, 0.2, 0.9, 8, 4000, &cfg).unwrap();
    assert!(far.eta_hat < near.eta_hat, "{} vs {}", far.eta_hat, near.eta_hat);
}
