//! Subcommand implementations. Each returns an [`Outcome`] that the caller prints or writes.

use crate::args::*;
use caloric::capacity::{
    backward_content, capacity_of, check_tbcdc_with, check_tbhcc_with, slab_sample, AtomSelection,
    CapacityCheckOptions, ConditionReport, ContentCheckOptions, WienerMode, WienerOptions, DEFAULT_PASS_THRESHOLD,
};
use caloric::geometry::{sample_sigma, Domain, DomainFile, SpacetimePoint};
use caloric::kernels::{heat_kernel, ScaledHeatKernel};
use caloric::scenarios::{self, ScenarioConfig, ScenarioResult, Table};
use caloric::walker::{estimate_measure, solve_dirichlet, Datum, Operator, WalkConfig};
use serde_json::{json, Value};
use std::fs;
use std::path::Path;

const DEFAULT_PATHS: u64 = 10_000;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unreadable input: exit code 2.
    Usage(String),
    /// The computation ran and reported failure or an error: exit code 1.
    Failed(String),
}

impl CliError {
    fn failed(e: impl std::fmt::Display) -> Self {
        CliError::Failed(e.to_string())
    }
}

pub struct Outcome {
    pub command: String,
    pub summary: Value,
    pub table: Option<(String, Table)>,
    pub scenario: Option<ScenarioResult>,
    pub passed: bool,
    /// Every input that affects the numbers; hashed into the manifest.
    pub inputs: Value,
    pub seed: Option<u64>,
}

impl Outcome {
    fn new(command: &str, summary: Value, inputs: Value) -> Self {
        Self {
            command: command.into(),
            summary,
            table: None,
            scenario: None,
            passed: true,
            inputs,
            seed: None,
        }
    }
}

fn parse_point(text: &str) -> Result<SpacetimePoint, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("cannot parse point {text:?}: {e}")))?;
    if values.len() < 2 {
        return Err(CliError::Usage(format!("point {text:?} needs at least x and t")));
    }
    let (t, x) = values.split_last().expect("non-empty");
    Ok(SpacetimePoint::new(x, *t))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_domain(g: &GlobalArgs) -> Result<Domain, CliError> {
    let path = g
        .domain
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --domain".into()))?;
    DomainFile::parse(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_operator(g: &GlobalArgs, n: usize) -> Result<Operator, CliError> {
    match &g.operator {
        None => Ok(Operator::scaled_heat(1.0, n)),
        Some(path) => {
            let op: Operator =
                serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            op.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(op)
        }
    }
}

fn require_seed(g: &GlobalArgs) -> Result<u64, CliError> {
    g.seed
        .ok_or_else(|| CliError::Usage("randomized commands require an explicit --seed".into()))
}

fn kernel(m: f64, n: usize) -> Result<ScaledHeatKernel, CliError> {
    ScaledHeatKernel::new(m, n).map_err(|e| CliError::Usage(e.to_string()))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("outputs serialize")
}

fn point_columns(n: usize) -> Vec<String> {
    let mut cols: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    cols.push("t".into());
    cols
}

fn point_row(p: &SpacetimePoint) -> Vec<f64> {
    let mut row: Vec<f64> = p.x.to_vec();
    row.push(p.t);
    row
}

fn condition_table(report: &ConditionReport, n: usize) -> Table {
    let mut cols = point_columns(n);
    cols.extend(["radius".to_string(), "ratio".to_string()]);
    let mut table = Table {
        columns: cols,
        rows: vec![],
    };
    for row in &report.rows {
        let mut r = point_row(&row.point);
        r.extend([row.radius, row.ratio]);
        table.push(r);
    }
    table
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Kernel {
            action: KernelAction::Eval { m, n, target, source },
        } => {
            let k = kernel(*m, *n)?;
            let (p, q) = (parse_point(target)?, parse_point(source)?);
            if p.dim() != *n || q.dim() != *n {
                return Err(CliError::Usage(format!("points must have {n} spatial coordinates")));
            }
            let value = heat_kernel(&k, &p, &q);
            let inputs = json!({"M": m, "n": n, "target": p, "source": q});
            let mut out = Outcome::new("kernel eval", json!({ "value": value }), inputs);
            let mut table = Table::new(&["value"]);
            table.push(vec![value]);
            out.table = Some(("kernel".into(), table));
            Ok(out)
        }
        Command::Capacity {
            action:
                CapacityAction::Estimate {
                    center,
                    radius,
                    a,
                    cells_per_radius,
                    m,
                },
        } => {
            let p = parse_point(center)?;
            let k = kernel(*m, p.dim())?;
            if !(*radius > 0.0 && *a > 0.0 && *a < 1.0) || *cells_per_radius == 0 {
                return Err(CliError::Usage(
                    "need radius > 0, a in (0,1), cells per radius ≥ 1".into(),
                ));
            }
            let domain = g.domain.as_ref().map(|_| load_domain(g)).transpose()?;
            let (t_lo, t_hi) = (p.t - radius * radius, p.t - a * a * radius * radius);
            let sample = slab_sample(
                &p.x,
                *radius,
                t_lo,
                t_hi,
                *cells_per_radius,
                AtomSelection::ParabolicBoundary,
                |cell| match &domain {
                    None => true,
                    Some(d) => !d.contains(&cell.center()),
                },
            );
            let estimate = if sample.atom_count() == 0 {
                caloric::capacity::CapacityEstimate::zero()
            } else {
                capacity_of(&sample, &k).map_err(CliError::failed)?
            };
            let inputs = json!({"center": p, "radius": radius, "a": a, "cells_per_radius": cells_per_radius, "M": m, "domain": domain});
            Ok(Outcome::new("capacity estimate", to_value(&estimate), inputs))
        }
        Command::Content {
            action:
                ContentAction::Estimate {
                    point,
                    radius,
                    s,
                    levels,
                    extra_levels,
                    min_side,
                },
        } => {
            let d = load_domain(g)?;
            let p = parse_point(point)?;
            let opts = ContentCheckOptions {
                levels: *levels,
                extra_levels: *extra_levels,
                min_side: *min_side,
            };
            let estimate = backward_content(&d, &p, *radius, *s, &opts);
            let mut summary = to_value(&estimate);
            summary["ratio"] = json!(estimate.frostman_mass / radius.powf(*s));
            let inputs = json!({"point": p, "radius": radius, "s": s, "options": opts, "domain": d});
            Ok(Outcome::new("content estimate", summary, inputs))
        }
        Command::Check { action } => {
            let d = load_domain(g)?;
            let seed = require_seed(g)?;
            let (sigma_args, name) = match action {
                CheckAction::Tbhcc { sigma, .. } => (sigma, "check tbhcc"),
                CheckAction::Tbcdc { sigma, .. } => (sigma, "check tbcdc"),
            };
            let n = sigma_args.n.or(d.dim()).unwrap_or(1);
            let sigma = sample_sigma(&d, n, sigma_args.count, seed).map_err(CliError::failed)?;
            let (report, params) = match action {
                CheckAction::Tbhcc { eps, min_side, .. } => {
                    let opts = ContentCheckOptions {
                        min_side: *min_side,
                        ..ContentCheckOptions::default()
                    };
                    (
                        check_tbhcc_with(&d, &sigma, &sigma_args.scales, *eps, &opts),
                        json!({"eps": eps, "min_side": min_side}),
                    )
                }
                CheckAction::Tbcdc {
                    a, cells_per_radius, ..
                } => {
                    let k = kernel(1.0, n)?;
                    let opts = CapacityCheckOptions {
                        cells_per_radius: *cells_per_radius,
                    };
                    let report =
                        check_tbcdc_with(&d, &k, &sigma, &sigma_args.scales, *a, &opts).map_err(CliError::failed)?;
                    (report, json!({"a": a, "cells_per_radius": cells_per_radius}))
                }
            };
            let passed = report.passes(DEFAULT_PASS_THRESHOLD);
            let mut summary = to_value(&report);
            summary["passes"] = json!(passed);
            summary["threshold"] = json!(DEFAULT_PASS_THRESHOLD);
            let inputs = json!({"domain": d, "n": n, "count": sigma_args.count, "scales": sigma_args.scales, "seed": seed, "params": params});
            let mut out = Outcome::new(name, summary, inputs);
            out.table = Some(("condition".into(), condition_table(&report, n)));
            out.passed = passed;
            out.seed = Some(seed);
            Ok(out)
        }
        Command::Measure {
            action: MeasureAction::Estimate { pole },
        } => {
            let d = load_domain(g)?;
            let seed = require_seed(g)?;
            let p = parse_point(pole)?;
            let op = load_operator(g, p.dim())?;
            let n_paths = g.paths.unwrap_or(DEFAULT_PATHS);
            let cfg = WalkConfig::with_seed(seed);
            let m = estimate_measure(&d, &op, &p, n_paths, &cfg).map_err(CliError::failed)?;
            let mut cols = point_columns(p.dim());
            cols.push("weight".into());
            let mut table = Table {
                columns: cols,
                rows: vec![],
            };
            for (q, w) in &m.hits {
                let mut row = point_row(q);
                row.push(*w);
                table.push(row);
            }
            let inputs = json!({"domain": d, "operator": op, "pole": p, "paths": n_paths, "walk": cfg});
            let mut out = Outcome::new("measure estimate", to_value(&m.header(&cfg)), inputs);
            out.table = Some(("hits".into(), table));
            out.seed = Some(seed);
            Ok(out)
        }
        Command::Dirichlet {
            action: DirichletAction::Solve { pole, datum },
        } => {
            let d = load_domain(g)?;
            let seed = require_seed(g)?;
            let poles: Vec<SpacetimePoint> = pole.iter().map(|p| parse_point(p)).collect::<Result<_, _>>()?;
            let f: Datum = serde_json::from_str(&read(datum)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", datum.display())))?;
            let n = poles[0].dim();
            let op = load_operator(g, n)?;
            let n_paths = g.paths.unwrap_or(DEFAULT_PATHS);
            let cfg = WalkConfig::with_seed(seed);
            let values = solve_dirichlet(&d, &op, &f, &poles, n_paths, &cfg).map_err(CliError::failed)?;
            let mut cols = point_columns(n);
            cols.extend(["value", "standard_error", "infinity_fraction"].map(String::from));
            let mut table = Table {
                columns: cols,
                rows: vec![],
            };
            for v in &values {
                let mut row = point_row(&v.pole);
                row.extend([v.value, v.standard_error, v.infinity_fraction]);
                table.push(row);
            }
            let inputs =
                json!({"domain": d, "operator": op, "poles": poles, "datum": f, "paths": n_paths, "walk": cfg});
            let mut out = Outcome::new("dirichlet solve", to_value(&values), inputs);
            out.table = Some(("values".into(), table));
            out.seed = Some(seed);
            Ok(out)
        }
        Command::Wiener {
            action:
                WienerAction::Series {
                    point,
                    lambda,
                    terms,
                    mode,
                    a,
                    cells_per_radius,
                    m,
                },
        } => {
            let d = load_domain(g)?;
            let p = parse_point(point)?;
            let k = kernel(*m, p.dim())?;
            let mode = match mode {
                Mode::HeatBall => WienerMode::HeatBall,
                Mode::Cylinder => WienerMode::Cylinder,
            };
            let opts = WienerOptions {
                cells_per_radius: *cells_per_radius,
                resolution_floor: 0.0,
                slab_ratio: *a,
            };
            let report = caloric::capacity::wiener_partial_sums(&d, &k, &p, *lambda, *terms, mode, &opts)
                .map_err(CliError::failed)?;
            let mut table = Table::new(&["index", "scale", "capacity", "term", "partial_sum", "cell_side"]);
            for t in &report.terms {
                table.push(vec![
                    t.index as f64,
                    t.scale,
                    t.capacity,
                    t.term,
                    t.partial_sum,
                    t.cell_side,
                ]);
            }
            let inputs = json!({"domain": d, "point": p, "lambda": lambda, "terms": terms, "mode": mode, "options": opts, "M": m});
            let mut out = Outcome::new("wiener series", to_value(&report), inputs);
            out.table = Some(("terms".into(), table));
            Ok(out)
        }
        Command::Scenario { name } => run_scenario(g, name.as_str()),
        Command::Validate => run_scenario(g, "validation"),
    }
}

fn run_scenario(g: &GlobalArgs, name: &str) -> Result<Outcome, CliError> {
    let seed = require_seed(g)?;
    let mut config =
        ScenarioConfig::by_name(name, seed).ok_or_else(|| CliError::Usage(format!("unknown scenario {name}")))?;
    if let Some(p) = g.paths {
        config.set_paths(p);
    }
    let result = scenarios::run(&config).map_err(CliError::failed)?;
    let command = if name == "validation" {
        "validate".to_string()
    } else {
        format!("scenario {name}")
    };
    let mut out = Outcome::new(&command, to_value(&result), to_value(&config));
    out.passed = result.passed();
    out.seed = Some(seed);
    out.scenario = Some(result);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_with_time_last() {
        let p = parse_point("0.5,-1,2").unwrap();
        assert_eq!(p.x.as_slice(), &[0.5, -1.0]);
        assert_eq!(p.t, 2.0);
        assert!(parse_point("1").is_err());
        assert!(parse_point("a,b").is_err());
    }
}
