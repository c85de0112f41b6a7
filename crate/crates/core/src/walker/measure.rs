//! Aggregated exit records.

use super::{ExitRecord, ExitStatus, WalkConfig};
use crate::geometry::SpacetimePoint;
use serde::Serialize;
use std::io::Write;

/// Equal-weight empirical law of exit points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalBoundaryMeasure {
    pub pole: SpacetimePoint,
    pub n_paths: u64,
    pub seed: u64,
    /// Boundary exits in path-index order, each with weight `1/n_paths`.
    pub hits: Vec<(SpacetimePoint, f64)>,
    pub mass_infinity: f64,
    pub mass_truncated: f64,
    pub mass_budget: f64,
    /// Standard error of each bucket's mass.
    pub se_infinity: f64,
    pub se_truncated: f64,
    /// Set when the exhausted-budget fraction exceeds the configured limit.
    pub flagged: bool,
}

/// JSON header accompanying the CSV of hits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureHeader {
    pub pole: SpacetimePoint,
    pub seed: u64,
    pub n_paths: u64,
    pub mass_boundary: f64,
    pub mass_infinity: f64,
    pub mass_truncated: f64,
    pub mass_budget: f64,
    pub se_infinity: f64,
    pub flagged: bool,
    pub config_hash: String,
}

fn bernoulli_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

impl EmpiricalBoundaryMeasure {
    pub fn from_records(pole: SpacetimePoint, records: &[ExitRecord], cfg: &WalkConfig) -> Self {
        let n = records.len() as u64;
        let w = 1.0 / n as f64;
        let mut hits = Vec::new();
        let mut counts = [0u64; 3];
        for r in records {
            match r.status {
                ExitStatus::Boundary => {
                    let p = r.exit_point.clone().expect("boundary exits carry a point");
                    hits.push((p, w));
                }
                ExitStatus::Infinity => counts[0] += 1,
                ExitStatus::Truncated => counts[1] += 1,
                ExitStatus::BudgetExhausted => counts[2] += 1,
            }
        }
        let frac = |c: u64| c as f64 / n as f64;
        Self {
            pole,
            n_paths: n,
            seed: cfg.seed,
            hits,
            mass_infinity: frac(counts[0]),
            mass_truncated: frac(counts[1]),
            mass_budget: frac(counts[2]),
            se_infinity: bernoulli_se(frac(counts[0]), n),
            se_truncated: bernoulli_se(frac(counts[1]), n),
            flagged: frac(counts[2]) > cfg.budget_flag_fraction,
        }
    }

    /// Mass on the boundary, from the hit count.
    pub fn mass_boundary(&self) -> f64 {
        self.hits.len() as f64 / self.n_paths as f64
    }

    pub fn se_boundary(&self) -> f64 {
        bernoulli_se(self.mass_boundary(), self.n_paths)
    }

    pub fn header(&self, cfg: &WalkConfig) -> MeasureHeader {
        MeasureHeader {
            pole: self.pole.clone(),
            seed: self.seed,
            n_paths: self.n_paths,
            mass_boundary: self.mass_boundary(),
            mass_infinity: self.mass_infinity,
            mass_truncated: self.mass_truncated,
            mass_budget: self.mass_budget,
            se_infinity: self.se_infinity,
            flagged: self.flagged,
            config_hash: cfg.hash(),
        }
    }

    /// Hits as CSV rows `x0, …, t, weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let n = self.pole.dim();
        let mut head: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        head.push("t".into());
        head.push("weight".into());
        wtr.write_record(&head)?;
        for (p, w) in &self.hits {
            let mut row: Vec<String> = p.x.iter().map(|v| v.to_string()).collect();
            row.push(p.t.to_string());
            row.push(w.to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(status: ExitStatus, i: u64) -> ExitRecord {
        ExitRecord {
            status,
            exit_point: (status == ExitStatus::Boundary).then(|| SpacetimePoint::new(&[0.5], -1.0)),
            steps: 1,
            path_index: i,
        }
    }

    #[test]
    fn masses_add_up() {
        let statuses = [
            ExitStatus::Boundary,
            ExitStatus::Infinity,
            ExitStatus::Boundary,
            ExitStatus::Truncated,
            ExitStatus::BudgetExhausted,
            ExitStatus::Boundary,
            ExitStatus::Boundary,
        ];
        let records: Vec<_> = statuses.iter().enumerate().map(|(i, s)| rec(*s, i as u64)).collect();
        let m = EmpiricalBoundaryMeasure::from_records(SpacetimePoint::origin(1), &records, &WalkConfig::default());
        let weights: f64 = m.hits.iter().map(|h| h.1).sum();
        let total = weights + m.mass_infinity + m.mass_truncated + m.mass_budget;
        assert!((total - 1.0).abs() < 1e-12);
        assert!(m.flagged);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("x0,t,weight"));
    }
}
