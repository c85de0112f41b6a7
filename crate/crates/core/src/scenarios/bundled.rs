//! Reference domains with tuned check settings, and the suite that runs both thickness
//! conditions on each of them.

use super::ScenarioError;
use crate::capacity::{check_tbcdc, check_tbhcc_with, ConditionReport, ContentCheckOptions, DEFAULT_PASS_THRESHOLD};
use crate::geometry::{sample_sigma, Domain, ParabolicCube, SpacetimePoint};
use crate::kernels::ScaledHeatKernel;
use crate::walker::mix_seed;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundledDomain {
    pub name: String,
    pub domain: Domain,
    pub n: usize,
    /// Radii at which both conditions are evaluated.
    pub scales: Vec<f64>,
    pub eps: f64,
    /// Slab aspect for the capacity condition.
    pub slab_ratio: f64,
    pub sigma_count: usize,
    pub content: ContentCheckOptions,
    /// Smallest parabolic distance between separate pieces of the complement, if relevant.
    pub gap: Option<f64>,
}

/// Depths of the sparse obstacle stack `K_j = closed Q_1(0, −R_j²)`.
pub(crate) fn sparse_depths() -> Vec<f64> {
    (1..=4).map(|j| 100.0 * 4f64.powi(j)).collect()
}

fn unit_cube_at(t: f64) -> ParabolicCube {
    ParabolicCube::full(SpacetimePoint::new(&[0.0], t), 1.0)
}

fn entry(name: &str, domain: Domain, scales: Vec<f64>) -> BundledDomain {
    BundledDomain {
        name: name.into(),
        domain,
        n: 1,
        scales,
        eps: 1.0,
        slab_ratio: 0.5,
        sigma_count: 6,
        content: ContentCheckOptions::default(),
        gap: None,
    }
}

/// Cylinder, single obstacle, sparse obstacle stack, spatial half-space and the Petrovsky lobe.
pub fn bundled_domains() -> Vec<BundledDomain> {
    let depths = sparse_depths();
    let gap = depths
        .windows(2)
        .map(|w| ((w[1] * w[1] - 1.0) - (w[0] * w[0] + 1.0)).sqrt())
        .fold(f64::INFINITY, f64::min);
    let sparse = BundledDomain {
        scales: vec![0.5, 0.25, 2048.0, 4096.0],
        content: ContentCheckOptions {
            min_side: Some(0.25),
            ..ContentCheckOptions::default()
        },
        gap: Some(gap),
        sigma_count: 8,
        ..entry(
            "sparse-cubes",
            Domain::ComplementCubes {
                cubes: depths.iter().map(|r| unit_cube_at(-r * r)).collect(),
            },
            vec![],
        )
    };
    vec![
        entry(
            "cylinder",
            Domain::cylinder(&[(-1.0, 1.0)], (0.0, 4.0)),
            vec![0.4, 0.2, 0.1, 0.05],
        ),
        entry(
            "complement-cube",
            Domain::ComplementCubes {
                cubes: vec![unit_cube_at(-1.0)],
            },
            vec![0.5, 0.25, 0.125],
        ),
        sparse,
        entry(
            "half-space",
            Domain::cylinder(&[(0.0, f64::INFINITY)], (0.0, 4.0)),
            vec![0.4, 0.2, 0.1],
        ),
        BundledDomain {
            slab_ratio: 0.25,
            ..entry(
                "petrovsky",
                Domain::Petrovsky { reflected: false },
                vec![0.1, 0.05, 0.025],
            )
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionSuiteRow {
    pub name: String,
    pub tbhcc: ConditionReport,
    pub tbcdc: ConditionReport,
    pub tbhcc_passes: bool,
    pub tbcdc_passes: bool,
}

impl ConditionSuiteRow {
    /// The content condition passing without the capacity condition would contradict the
    /// expected implication.
    pub fn implication_holds(&self) -> bool {
        !self.tbhcc_passes || self.tbcdc_passes
    }
}

/// Both condition checks on every domain, with the heat kernel `M = 1`.
pub fn run_condition_suite(domains: &[BundledDomain], seed: u64) -> Result<Vec<ConditionSuiteRow>, ScenarioError> {
    domains
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let sigma = sample_sigma(&b.domain, b.n, b.sigma_count, mix_seed(seed, i as u64))?;
            let k = ScaledHeatKernel { m: 1.0, n: b.n };
            let tbhcc = check_tbhcc_with(&b.domain, &sigma, &b.scales, b.eps, &b.content);
            let tbcdc = check_tbcdc(&b.domain, &k, &sigma, &b.scales, b.slab_ratio)?;
            Ok(ConditionSuiteRow {
                name: b.name.clone(),
                tbhcc_passes: tbhcc.passes(DEFAULT_PASS_THRESHOLD),
                tbcdc_passes: tbcdc.passes(DEFAULT_PASS_THRESHOLD),
                tbhcc,
                tbcdc,
            })
        })
        .collect()
}
