//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the lines always reach the console.

use caloric::analysis::{bourgain_eta, fit_power_law, holder_fit, ks_distance_normal, Approach, FitKind, FitSample};
use caloric::capacity::{capacity_of, pinned_slab_capacity, CompactSetSample};
use caloric::geometry::{Domain, SpacetimePoint};
use caloric::kernels::{chapman_kolmogorov_residual, kernel_mass, ScaledHeatKernel};
use caloric::scenarios::{
    bundled_domains, run_complement_cube, run_condition_suite, run_petrovsky, run_sparse_cubes, ComplementCubeConfig,
    PetrovskyConfig, SparseCubesConfig,
};
use caloric::walker::{estimate_measure, solve_dirichlet, Datum, Operator, WalkConfig};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

const SEED: u64 = 20_240_601;

type Outcome = Result<(bool, String), String>;

struct Gate {
    failed: Vec<u32>,
}

impl Gate {
    fn run(&mut self, id: u32, title: &str, budget: Option<Duration>, body: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = body();
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(limit) = budget {
            if elapsed > limit {
                passed = false;
                detail.push_str(&format!("; exceeded the {}s budget", limit.as_secs()));
            }
        }
        let tag = if passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {title} ({:.1}s): {detail}", elapsed.as_secs_f64());
        if !passed {
            self.failed.push(id);
        }
    }
}

fn heat() -> Operator {
    Operator::scaled_heat(1.0, 1)
}

fn kernel_normalization() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=2 {
        for m in [0.5, 1.0, 2.0] {
            let k = ScaledHeatKernel::new(m, n).map_err(|e| e.to_string())?;
            for tau in [0.01, 0.7, 5.0] {
                worst = worst.max((kernel_mass(&k, tau) - 1.0).abs());
            }
        }
    }
    // Tuples are (x, t, u, y, s) with s < u < t.
    let mut ck = 0.0f64;
    for m in [0.5, 1.0, 2.0] {
        for (x, t, u, y, s) in [(0.4, 1.0, 0.35, -0.3, 0.0), (-1.0, 2.0, 1.2, 0.5, 0.5)] {
            ck = ck.max(chapman_kolmogorov_residual(m, x, t, u, y, s));
        }
    }
    Ok((
        worst <= 1e-6 && ck < 1e-4,
        format!("mass deviation {worst:.2e}, CK residual {ck:.2e}"),
    ))
}

fn exit_law() -> Outcome {
    let m = estimate_measure(
        &Domain::after(0.0),
        &heat(),
        &SpacetimePoint::new(&[0.0], 1.0),
        100_000,
        &WalkConfig::with_seed(SEED),
    )
    .map_err(|e| e.to_string())?;
    let xs: Vec<f64> = m.hits.iter().map(|(p, _)| p.x[0]).collect();
    let ks = ks_distance_normal(&xs, 0.0, 2f64.sqrt()).map_err(|e| e.to_string())?;
    Ok((
        ks < 0.02 && m.mass_infinity == 0.0,
        format!("KS {ks:.4}, mass at infinity {}", m.mass_infinity),
    ))
}

fn constant_datum() -> Outcome {
    let d = Domain::cylinder(&[(-1.0, 1.0), (-1.0, 1.0)], (0.0, 1.0));
    let poles = [
        SpacetimePoint::new(&[0.0, 0.0], 0.5),
        SpacetimePoint::new(&[0.9, -0.3], 0.95),
    ];
    let op = Operator::scaled_heat(1.0, 2);
    let values = solve_dirichlet(
        &d,
        &op,
        &Datum::constant(1.0),
        &poles,
        5000,
        &WalkConfig::with_seed(SEED),
    )
    .map_err(|e| e.to_string())?;
    let all_one = values.iter().all(|v| v.value == 1.0);
    Ok((
        all_one,
        format!("{:?}", values.iter().map(|v| v.value).collect::<Vec<_>>()),
    ))
}

fn capacity_scaling() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 1..=2usize {
        let k = ScaledHeatKernel { m: 1.0, n };
        let small = pinned_slab_capacity(&k, 1.0)
            .map_err(|e| e.to_string())?
            .certified_lower;
        let large = pinned_slab_capacity(&k, 2.0)
            .map_err(|e| e.to_string())?
            .certified_lower;
        let ratio = large / small;
        let target = 2f64.powi(n as i32);
        ok &= (0.7 * target..=1.3 * target).contains(&ratio);
        detail.push(format!("n={n}: {large:.3}/{small:.3} = {ratio:.3} (target {target})"));
    }
    Ok((ok, detail.join(", ")))
}

fn singleton() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=2 {
        let k = ScaledHeatKernel { m: 1.0, n };
        let sample = CompactSetSample::singleton(SpacetimePoint::origin(n));
        worst = worst.max(capacity_of(&sample, &k).map_err(|e| e.to_string())?.lp_value);
    }
    Ok((worst < 1e-6, format!("largest LP value {worst:.2e}")))
}

fn condition_checks() -> Result<(bool, String, bool, String), String> {
    let domains = bundled_domains();
    let rows = run_condition_suite(&domains, SEED).map_err(|e| e.to_string())?;
    let row = |name: &str| rows.iter().find(|r| r.name == name).expect("bundled domain present");
    let cylinder = row("cylinder");
    let cyl_positive = [&cylinder.tbhcc, &cylinder.tbcdc]
        .iter()
        .all(|rep| !rep.rows.is_empty() && rep.worst_by_radius().iter().all(|(_, w)| *w > 0.0));
    let cyl_worst = cylinder.tbhcc.worst_ratio.unwrap_or(0.0);
    let gap = domains
        .iter()
        .find(|b| b.name == "sparse-cubes")
        .and_then(|b| b.gap)
        .expect("sparse domain records its gap");
    let sparse_far = row("sparse-cubes").tbhcc.worst_at_or_above(gap);
    let discriminated = cylinder.tbhcc_passes
        && cylinder.tbcdc_passes
        && cyl_positive
        && sparse_far.is_some_and(|w| w < 0.1 * cyl_worst);
    let six = format!(
        "cylinder worst TBHCC {cyl_worst:.3}, TBCDC {:.3}; sparse TBHCC at r >= {gap:.0}: {sparse_far:?}",
        cylinder.tbcdc.worst_ratio.unwrap_or(0.0)
    );
    let seven = rows
        .iter()
        .map(|r| format!("{} {}/{}", r.name, r.tbhcc_passes, r.tbcdc_passes))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((discriminated, six, rows.iter().all(|r| r.implication_holds()), seven))
}

fn holder() -> Outcome {
    let d = Domain::cylinder(&[(0.0, 2.0)], (0.0, 5.0));
    let datum = Datum::Wall {
        axis: 0,
        threshold: 0.0,
        below: 0.0,
        above: 1.0,
        infinity: 0.0,
    };
    let approach = Approach {
        x0: SpacetimePoint::new(&[0.0], 4.0),
        normal: vec![1.0],
    };
    let fit = holder_fit(
        &d,
        &heat(),
        &datum,
        &approach,
        &[0.4, 0.2, 0.1, 0.05],
        100_000,
        &WalkConfig::with_seed(SEED),
    )
    .map_err(|e| e.to_string())?;
    let beta = 0.6;
    let synthetic: Vec<FitSample> = (0..6)
        .map(|j| {
            let scale = 0.5f64.powi(j);
            let wobble = if j % 2 == 0 { 1.01 } else { 0.99 };
            FitSample {
                scale,
                value: scale.powf(beta) * wobble,
                standard_error: 0.01 * scale.powf(beta),
            }
        })
        .collect();
    let syn = fit_power_law(FitKind::Synthetic, synthetic).map_err(|e| e.to_string())?;
    let ok = (0.8..=1.1).contains(&fit.slope) && (syn.slope - beta).abs() <= syn.band;
    Ok((
        ok,
        format!(
            "flat wall slope {:.3} ± {:.3}; synthetic {:.3} ± {:.3} (true {beta})",
            fit.slope, fit.band, syn.slope, syn.band
        ),
    ))
}

fn bourgain() -> Outcome {
    let d = Domain::cylinder(&[(-1.0, 1.0)], (0.0, 4.0));
    let x0 = SpacetimePoint::new(&[1.0], 2.0);
    let mut etas = Vec::new();
    for r in [0.4, 0.2, 0.1] {
        let rep = bourgain_eta(&d, &heat(), &x0, r, 0.25, 8, 4000, &WalkConfig::with_seed(SEED))
            .map_err(|e| e.to_string())?;
        etas.push(rep.eta_hat);
    }
    let max = etas.iter().cloned().fold(f64::MIN, f64::max);
    let min = etas.iter().cloned().fold(f64::MAX, f64::min);
    Ok((
        min > 0.0 && max / min < 2.0,
        format!("eta at r = 0.4, 0.2, 0.1: {etas:?}"),
    ))
}

fn complement_cube() -> Outcome {
    let result = run_complement_cube(&ComplementCubeConfig::new(SEED)).map_err(|e| e.to_string())?;
    let slope = result.get("slope").map(|q| q.value).unwrap_or(f64::NAN);
    let ok = slope <= -0.35 && !result.flagged && result.passed();
    Ok((
        ok,
        format!(
            "slope {slope:.3}, SE gate {}",
            if result.flagged { "tripped" } else { "clear" }
        ),
    ))
}

fn sparse_cubes() -> Outcome {
    let result = run_sparse_cubes(&SparseCubesConfig::new(SEED)).map_err(|e| e.to_string())?;
    let boundary = result.get("mass_boundary").ok_or("missing mass_boundary")?;
    let se = boundary.standard_error.unwrap_or(0.0);
    let cases = &result.tables["cases"];
    let mass = cases.column("mass").ok_or("missing case masses")?;
    let case_se = cases.column("standard_error").ok_or("missing case errors")?;
    let trio = (1.0 - mass[0]).abs() <= 3.0 * case_se[0]
        && mass[1] + 3.0 * case_se[1] < 1.0
        && (1.0 - mass[2]).abs() <= 3.0 * case_se[2];
    let ok = boundary.value + 3.0 * se < 1.0 && trio && result.passed();
    Ok((
        ok,
        format!("boundary mass {:.5} ± {se:.5}; cases {mass:?}", boundary.value),
    ))
}

fn petrovsky() -> Outcome {
    let mut small = PetrovskyConfig::new(SEED);
    small.n_paths = 1000;
    let a = serde_json::to_string(&run_petrovsky(&small).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let b = serde_json::to_string(&run_petrovsky(&small).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let result = run_petrovsky(&PetrovskyConfig::new(SEED)).map_err(|e| e.to_string())?;
    let ordering = result
        .checks
        .iter()
        .find(|c| c.rule.starts_with("Wiener"))
        .map(|c| c.detail.clone())
        .unwrap_or_default();
    let deficits = ["deficit_M1", "deficit_M0.5"].map(|k| result.get(k).map(|q| q.value).unwrap_or(f64::NAN));
    Ok((
        a == b && result.passed(),
        format!(
            "repeatable {}; deficits {:.4} vs {:.4}; {ordering}",
            a == b,
            deficits[0],
            deficits[1]
        ),
    ))
}

fn run_cli(args: &[&str], workers: usize, out: &Path) -> Result<Vec<u8>, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_caloric"))
        .args(args)
        .args(["--workers", &workers.to_string(), "--out-dir"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if output.status.code() == Some(2) {
        return Err(format!("usage error: {}", String::from_utf8_lossy(&output.stderr)));
    }
    Ok(output.stdout)
}

/// Every file in `dir`, with the manifest's timestamps blanked.
fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        if name == "manifest.json" {
            let mut v: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
            v["started_unix"] = serde_json::Value::Null;
            v["finished_unix"] = serde_json::Value::Null;
            bytes = v.to_string().into_bytes();
        }
        files.push((name, bytes));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let domain = work.path().join("box.json");
    let datum = work.path().join("datum.json");
    let box_domain = Domain::cylinder(&[(-1.0, 1.0)], (0.0, 1.0));
    std::fs::write(&domain, serde_json::to_string(&box_domain).unwrap()).map_err(|e| e.to_string())?;
    let linear = Datum::Linear {
        gradient: vec![1.0],
        offset: 0.5,
        infinity: 0.0,
    };
    std::fs::write(&datum, serde_json::to_string(&linear).unwrap()).map_err(|e| e.to_string())?;
    let (d, f) = (domain.to_str().unwrap(), datum.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "measure", "estimate", "--domain", d, "--pole", "0.3,0.6", "--paths", "4000",
        ],
        vec![
            "dirichlet",
            "solve",
            "--domain",
            d,
            "--datum",
            f,
            "--pole",
            "0.3,0.6",
            "--pole",
            "-0.5,0.9",
            "--paths",
            "4000",
        ],
        vec!["check", "tbhcc", "--domain", d, "--count", "4"],
        vec!["check", "tbcdc", "--domain", d, "--count", "3", "--scales", "0.2,0.1"],
        vec!["scenario", "complement-cube", "--paths", "4000"],
        vec!["scenario", "sparse-cubes", "--paths", "20000"],
        vec!["scenario", "petrovsky", "--paths", "400"],
        vec!["validate", "--format", "csv"],
    ];
    let seed = SEED.to_string();
    let mut mismatched = Vec::new();
    for (i, cmd) in commands.iter().enumerate() {
        let mut args = cmd.clone();
        args.extend(["--seed", &seed]);
        let mut runs = Vec::new();
        for workers in [1, 4] {
            let out = work.path().join(format!("run{i}_{workers}"));
            let stdout = run_cli(&args, workers, &out)?;
            runs.push((stdout, snapshot(&out)?));
        }
        if runs[0] != runs[1] {
            mismatched.push(format!("{} {}", cmd[0], cmd[1]));
        }
    }
    Ok((
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} commands byte-identical across 1 and 4 workers", commands.len())
        } else {
            format!("differing: {}", mismatched.join(", "))
        },
    ))
}

fn main() {
    let mut gate = Gate { failed: Vec::new() };
    let secs = Duration::from_secs;
    gate.run(
        1,
        "kernel normalization and Chapman-Kolmogorov",
        Some(secs(10)),
        kernel_normalization,
    );
    gate.run(2, "half-space exit law", Some(secs(60)), exit_law);
    gate.run(3, "constant datum gives a probability measure", None, constant_datum);
    gate.run(4, "slab capacity scales like r^n", Some(secs(300)), capacity_scaling);
    gate.run(5, "singleton capacity vanishes", None, singleton);
    let start = Instant::now();
    let checks = condition_checks();
    let took = start.elapsed();
    let (six, seven) = match checks {
        Ok((a, da, b, db)) => (Ok((a, da)), Ok((b, db))),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    gate.run(6, "content and capacity conditions discriminate", None, || {
        six.map(|(ok, detail)| {
            (
                ok && took < secs(300),
                format!("{detail}; suite took {:.1}s", took.as_secs_f64()),
            )
        })
    });
    gate.run(7, "content condition implies capacity condition", None, || seven);
    gate.run(8, "Hölder exponent on a flat wall", Some(secs(600)), holder);
    gate.run(9, "Bourgain estimate is stable across scales", None, bourgain);
    gate.run(10, "complement-cube mass decay", Some(secs(900)), complement_cube);
    gate.run(11, "sparse cubes lose mass to infinity", None, sparse_cubes);
    gate.run(12, "Petrovsky comparison", None, petrovsky);
    gate.run(13, "CLI output independent of worker count", None, determinism);
    if gate.failed.is_empty() {
        println!("acceptance: all 13 criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", gate.failed);
        std::process::exit(1);
    }
}
