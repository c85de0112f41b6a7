//! The reflected Petrovsky domain with two diffusion speeds. Exploratory: the sharp
//! regular/irregular split at the tip is a limit statement, so the scenario only reports
//! deficits and Wiener partial sums and checks that the two speeds are told apart.

use super::{combined, Check, ScenarioConfig, ScenarioError, ScenarioResult, Table};
use crate::capacity::{wiener_partial_sums, WienerMode, WienerOptions};
use crate::geometry::{Domain, SpacetimePoint};
use crate::kernels::ScaledHeatKernel;
use crate::walker::{mix_seed, solve_dirichlet, Datum, Operator, WalkConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerProfile {
    pub lambda: f64,
    pub terms: usize,
    pub options: WienerOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PetrovskyConfig {
    /// Diffusion constants; must contain 1 and 0.5.
    pub m_list: Vec<f64>,
    /// Poles sit at `(0, −δ²)`.
    pub delta_ladder: Vec<f64>,
    pub n_paths: u64,
    /// Radius of the tent datum centered at the tip.
    pub bump_radius: f64,
    pub wiener: WienerProfile,
    pub walk: WalkConfig,
}

impl PetrovskyConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            m_list: vec![1.0, 0.5],
            delta_ladder: vec![0.1, 0.05, 0.025, 0.0125],
            n_paths: 20_000,
            bump_radius: 1.0,
            wiener: WienerProfile {
                lambda: 0.25,
                terms: 10,
                options: WienerOptions {
                    cells_per_radius: 16,
                    resolution_floor: 0.0,
                    slab_ratio: 0.25,
                },
            },
            walk: WalkConfig::with_seed(seed),
        }
    }
}

struct Rung {
    delta: f64,
    value: f64,
    se: f64,
}

pub fn run_petrovsky(cfg: &PetrovskyConfig) -> Result<ScenarioResult, ScenarioError> {
    let has = |m: f64| cfg.m_list.contains(&m);
    if !has(1.0) || !has(0.5) {
        return Err(ScenarioError::InvalidParameters(
            "the M list must contain 1 and 0.5".into(),
        ));
    }
    if cfg.delta_ladder.is_empty() {
        return Err(ScenarioError::InvalidParameters("empty δ ladder".into()));
    }
    let mut out = ScenarioResult::new("petrovsky", ScenarioConfig::Petrovsky(cfg.clone()));
    let d = Domain::Petrovsky { reflected: true };
    let tip = SpacetimePoint::origin(1);
    let datum = Datum::TentBump {
        center: tip.clone(),
        radius: cfg.bump_radius,
        infinity: 0.0,
    };
    let mut ladder = Vec::new();
    for &delta in &cfg.delta_ladder {
        let pole = SpacetimePoint::new(&[0.0], -delta * delta);
        if d.contains(&pole) {
            ladder.push((delta, pole));
        } else {
            out.notices
                .push(format!("rung δ = {delta} leaves the domain and is skipped"));
        }
    }
    if ladder.is_empty() {
        return Err(ScenarioError::InvalidParameters(
            "no rung lies inside the domain".into(),
        ));
    }
    let poles: Vec<SpacetimePoint> = ladder.iter().map(|(_, p)| p.clone()).collect();

    let mut table = Table::new(&["M", "delta", "u", "standard_error", "deficit"]);
    let mut finest = Vec::new();
    let mut all_finite = true;
    for (i, &m) in cfg.m_list.iter().enumerate() {
        let walk = WalkConfig {
            seed: mix_seed(cfg.walk.seed, i as u64),
            ..cfg.walk.clone()
        };
        let values = solve_dirichlet(&d, &Operator::scaled_heat(m, 1), &datum, &poles, cfg.n_paths, &walk)?;
        let rungs: Vec<Rung> = ladder
            .iter()
            .zip(&values)
            .map(|((delta, _), v)| Rung {
                delta: *delta,
                value: v.value,
                se: v.standard_error,
            })
            .collect();
        for r in &rungs {
            all_finite &= r.value.is_finite() && r.se.is_finite();
            table.push(vec![m, r.delta, r.value, r.se, 1.0 - r.value]);
        }
        let last = rungs.last().expect("non-empty ladder");
        out.quantity(&format!("deficit_M{m}"), 1.0 - last.value, Some(last.se));
        finest.push((m, 1.0 - last.value, last.se));
    }
    out.tables.insert("ladder".into(), table);
    out.checks.push(Check::new("outputs are finite", all_finite, ""));

    let pick = |m: f64| finest.iter().find(|f| f.0 == m).expect("checked above");
    let (a, b) = (pick(1.0), pick(0.5));
    let gap = (a.1 - b.1).abs();
    let noise = combined(a.2, b.2);
    out.checks.push(Check::new(
        "M = 1 and M = 0.5 deficits differ by more than 3 combined SE at the finest rung",
        gap > 3.0 * noise,
        format!("deficits {} and {}, combined SE {noise}", a.1, b.1),
    ));

    let mut wiener_table = Table::new(&["M", "index", "scale", "capacity", "term", "partial_sum"]);
    let mut sums = Vec::new();
    for &m in &cfg.m_list {
        let k = ScaledHeatKernel::new(m, 1).map_err(|e| ScenarioError::InvalidParameters(e.to_string()))?;
        let report = wiener_partial_sums(
            &d,
            &k,
            &tip,
            cfg.wiener.lambda,
            cfg.wiener.terms,
            WienerMode::Cylinder,
            &cfg.wiener.options,
        )?;
        for t in &report.terms {
            wiener_table.push(vec![m, t.index as f64, t.scale, t.capacity, t.term, t.partial_sum]);
        }
        out.notices.extend(report.warnings.iter().cloned());
        let partial = report.partial_sums();
        out.quantity(
            &format!("wiener_sum_M{m}"),
            *partial.last().expect("at least one term"),
            None,
        );
        sums.push((m, partial));
    }
    out.tables.insert("wiener".into(), wiener_table);
    let s1 = &sums.iter().find(|s| s.0 == 1.0).expect("checked above").1;
    let s05 = &sums.iter().find(|s| s.0 == 0.5).expect("checked above").1;
    let above = s1.iter().zip(s05).all(|(a, b)| a > b);
    let below = s1.iter().zip(s05).all(|(a, b)| a < b);
    out.checks.push(Check::new(
        "Wiener partial sums are ordered between the two M values",
        above || below,
        if above {
            "M = 1 partial sums exceed M = 0.5 at every index"
        } else if below {
            "M = 0.5 partial sums exceed M = 1 at every index"
        } else {
            "the partial sums cross"
        },
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_list_must_contain_both_speeds() {
        let cfg = PetrovskyConfig {
            m_list: vec![1.0, 2.0],
            ..PetrovskyConfig::new(1)
        };
        assert!(run_petrovsky(&cfg).is_err());
    }

    #[test]
    fn rungs_outside_are_skipped_with_notice() {
        let cfg = PetrovskyConfig {
            delta_ladder: vec![0.9, 0.05],
            n_paths: 200,
            wiener: WienerProfile {
                terms: 2,
                ..PetrovskyConfig::new(1).wiener
            },
            ..PetrovskyConfig::new(1)
        };
        let r = run_petrovsky(&cfg).unwrap();
        assert_eq!(r.notices.iter().filter(|n| n.contains("skipped")).count(), 1);
        assert_eq!(r.tables["ladder"].rows.len(), 2);
    }
}
