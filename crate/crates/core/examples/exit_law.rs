//! Prints the empirical exit law of the half-space `t > 0` from `(0, 1)` next to the
//! Normal(0, 2) density it should follow.

use caloric::geometry::{Domain, SpacetimePoint};
use caloric::walker::{estimate_measure, Operator, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = estimate_measure(
        &Domain::after(0.0),
        &Operator::scaled_heat(1.0, 1),
        &SpacetimePoint::new(&[0.0], 1.0),
        50_000,
        &WalkConfig::with_seed(1),
    )?;
    let width = 0.5;
    println!("bin_center,empirical,exact");
    for k in -8..8 {
        let lo = k as f64 * width;
        let count = m
            .hits
            .iter()
            .filter(|(p, _)| (lo..lo + width).contains(&p.x[0]))
            .count();
        let center = lo + width / 2.0;
        let exact = (-center * center / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt();
        println!("{center},{:.4},{exact:.4}", count as f64 / (m.n_paths as f64 * width));
    }
    Ok(())
}
