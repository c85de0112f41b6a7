//! Closed-form heat kernels, Gaussian envelopes, heat potentials and coefficient fields.

use crate::geometry::{parabolic_distance, spatial_distance, Domain, SpacetimePoint};
use crate::quadrature::composite;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("the sup bound needs distinct points")]
    CoincidentPoints,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Fundamental solution of `∂_t − M·Δ` in `n` space dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledHeatKernel {
    #[serde(rename = "M")]
    pub m: f64,
    pub n: usize,
}

impl ScaledHeatKernel {
    pub fn new(m: f64, n: usize) -> Result<Self, KernelError> {
        if !(m > 0.0) || !m.is_finite() || n == 0 {
            return Err(KernelError::InvalidParameter(format!(
                "need M > 0 and n ≥ 1, got M = {m}, n = {n}"
            )));
        }
        Ok(Self { m, n })
    }

    /// Kernel as a function of the time gap `tau = t − s` and squared spatial offset.
    #[inline]
    pub fn eval_gap(&self, tau: f64, dist_sq: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let four_m_tau = 4.0 * self.m * tau;
        (PI * four_m_tau).powf(-0.5 * self.n as f64) * (-dist_sq / four_m_tau).exp()
    }

    /// `C_M = max{(4πM)^{−n/2}, (n/(2π))^{n/2}·e^{−n/2}}`.
    pub fn sup_constant(&self) -> f64 {
        let half_n = 0.5 * self.n as f64;
        let time_dominated = (4.0 * PI * self.m).powf(-half_n);
        let space_dominated = (self.n as f64 / (2.0 * PI)).powf(half_n) * (-half_n).exp();
        time_dominated.max(space_dominated)
    }
}

/// `Γ_M(target; source)`; zero unless `target.t > source.t`.
pub fn heat_kernel(k: &ScaledHeatKernel, target: &SpacetimePoint, source: &SpacetimePoint) -> f64 {
    let tau = target.t - source.t;
    if tau <= 0.0 {
        return 0.0;
    }
    let d = spatial_distance(&target.x, &source.x);
    k.eval_gap(tau, d * d)
}

/// Spatial integral of `Γ_M(·, τ; 0, 0)` by tensor Gauss–Legendre quadrature over ±6 standard
/// deviations. Supported for `n ≤ 3`.
pub fn kernel_mass(k: &ScaledHeatKernel, tau: f64) -> f64 {
    let sigma = (2.0 * k.m * tau).sqrt();
    let rule = composite(-6.0 * sigma, 6.0 * sigma, 48, 10);
    let mut total = 0.0;
    let mut index = vec![0usize; k.n];
    loop {
        let mut weight = 1.0;
        let mut dist_sq = 0.0;
        for &i in &index {
            let (x, w) = rule[i];
            weight *= w;
            dist_sq += x * x;
        }
        total += weight * k.eval_gap(tau, dist_sq);
        let mut axis = 0;
        loop {
            if axis == k.n {
                return total;
            }
            index[axis] += 1;
            if index[axis] < rule.len() {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

/// `|∫Γ(x,t;z,u)Γ(z,u;y,s)dz − Γ(x,t;y,s)|` in one space dimension.
pub fn chapman_kolmogorov_residual(m: f64, x: f64, t: f64, u: f64, y: f64, s: f64) -> f64 {
    let k = ScaledHeatKernel { m, n: 1 };
    let reach = 12.0 * (2.0 * m * (t - s)).sqrt() + x.abs() + y.abs();
    let lhs: f64 = composite(-reach, reach, 96, 10)
        .iter()
        .map(|(z, w)| w * k.eval_gap(t - u, (x - z) * (x - z)) * k.eval_gap(u - s, (z - y) * (z - y)))
        .sum();
    (lhs - k.eval_gap(t - s, (x - y) * (x - y))).abs()
}

/// `C_M·‖p − q‖^{−n}`, which dominates `Γ_M(p; q)` for all `p ≠ q`.
pub fn kernel_sup_bound(k: &ScaledHeatKernel, p: &SpacetimePoint, q: &SpacetimePoint) -> Result<f64, KernelError> {
    let r = parabolic_distance(p, q);
    if r == 0.0 {
        return Err(KernelError::CoincidentPoints);
    }
    Ok(k.sup_constant() * r.powi(-(k.n as i32)))
}

/// Two-sided Gaussian envelope with constant `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AronsonEnvelope {
    #[serde(rename = "N")]
    pub big_n: f64,
    pub n: usize,
}

impl AronsonEnvelope {
    pub fn new(big_n: f64, n: usize) -> Result<Self, KernelError> {
        if !(big_n >= 1.0) || n == 0 {
            return Err(KernelError::InvalidParameter(format!(
                "need N ≥ 1 and n ≥ 1, got N = {big_n}, n = {n}"
            )));
        }
        Ok(Self { big_n, n })
    }

    /// Smallest `N` for which the envelope brackets `Γ_M` everywhere.
    ///
    /// Comparing exponents needs `1/(4M) ≤ N` and `4M ≤ N`; comparing prefactors needs
    /// `(4πM)^{±n/2} ≤ N`.
    pub fn for_scaled_heat(m: f64, n: usize) -> Result<Self, KernelError> {
        let half_n = 0.5 * n as f64;
        let big_n = [
            1.0,
            4.0 * m,
            1.0 / (4.0 * m),
            (4.0 * PI * m).powf(half_n),
            (4.0 * PI * m).powf(-half_n),
        ]
        .into_iter()
        .fold(f64::MIN, f64::max);
        Self::new(big_n, n)
    }
}

/// `(lower, upper)` envelope values; both zero unless `target.t > source.t`.
pub fn aronson_envelope(e: &AronsonEnvelope, target: &SpacetimePoint, source: &SpacetimePoint) -> (f64, f64) {
    let tau = target.t - source.t;
    if tau <= 0.0 {
        return (0.0, 0.0);
    }
    let d = spatial_distance(&target.x, &source.x);
    let d2 = d * d;
    let base = tau.powf(-0.5 * e.n as f64);
    let lower = base / e.big_n * (-e.big_n * d2 / tau).exp();
    let upper = base * e.big_n * (-d2 / (e.big_n * tau)).exp();
    (lower, upper)
}

/// Constants with `C_low·Γ_{M₁} ≤ lower envelope` and `upper envelope ≤ C_high·Γ_{M₂}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConstants {
    pub m1: f64,
    pub m2: f64,
    pub c_low: f64,
    pub c_high: f64,
}

impl ComparisonConstants {
    /// With `M₁ = 1/(4N)` and `M₂ = N/4` the exponents match and the ratios are constant.
    pub fn from_envelope(e: &AronsonEnvelope) -> Self {
        let half_n = 0.5 * e.n as f64;
        let m1 = 1.0 / (4.0 * e.big_n);
        let m2 = e.big_n / 4.0;
        Self {
            m1,
            m2,
            c_low: (4.0 * PI * m1).powf(half_n) / e.big_n,
            c_high: e.big_n * (4.0 * PI * m2).powf(half_n),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(SpacetimePoint, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(SpacetimePoint, f64)>) -> Result<Self, KernelError> {
        if atoms
            .iter()
            .any(|(p, w)| !(*w >= 0.0) || !w.is_finite() || !p.is_finite())
        {
            return Err(KernelError::InvalidParameter(
                "atoms need finite points and finite nonnegative weights".into(),
            ));
        }
        Ok(Self { atoms })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }
}

/// `Σᵢ wᵢ·Γ(p; atomᵢ)`.
pub fn potential(k: &ScaledHeatKernel, mu: &DiscreteMeasure, p: &SpacetimePoint) -> f64 {
    mu.atoms.iter().map(|(a, w)| w * heat_kernel(k, p, a)).sum()
}

/// Regular grid of nodes `origin + spacing·i`, `0 ≤ iₖ < shape[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl LatticeSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut rem = flat;
        self.shape
            .iter()
            .zip(&self.origin)
            .map(|(&m, &o)| {
                let i = rem % m;
                rem /= m;
                o + self.spacing * i as f64
            })
            .collect()
    }
}

/// Scalar coefficient field on space (time-independent), nodal values on a lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub grid: LatticeSpec,
    pub values: Vec<f64>,
}

impl LatticeField {
    /// Multilinear interpolation, extended by the nearest boundary value.
    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.grid.shape.len();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for k in 0..n {
            let m = self.grid.shape[k];
            let u = ((x[k] - self.grid.origin[k]) / self.grid.spacing).clamp(0.0, (m - 1) as f64);
            let i = (u.floor() as usize).min(m.saturating_sub(2));
            base[k] = i;
            frac[k] = if m == 1 { 0.0 } else { u - i as f64 };
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0;
            let mut stride = 1;
            for k in 0..n {
                let bit = (corner >> k) & 1;
                let m = self.grid.shape[k];
                let idx = (base[k] + bit).min(m - 1);
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                flat += idx * stride;
                stride *= m;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }
}

/// Per-axis scalar coefficient `a(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CoefficientField {
    Constant {
        value: f64,
    },
    /// `low` on cells with even coordinate-index sum, `high` on the others.
    Checkerboard {
        cell: f64,
        low: f64,
        high: f64,
    },
    Lattice(LatticeField),
}

impl CoefficientField {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            CoefficientField::Constant { value } => *value,
            CoefficientField::Checkerboard { cell, low, high } => {
                let parity: i64 = x.iter().map(|v| (v / cell).floor() as i64).sum();
                if parity.rem_euclid(2) == 0 {
                    *low
                } else {
                    *high
                }
            }
            CoefficientField::Lattice(f) => f.value(x),
        }
    }

    /// Central-difference gradient; zero for piecewise-constant fields.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            CoefficientField::Lattice(f) => {
                let h = 1e-4 * f.grid.spacing;
                let mut y = x.to_vec();
                for k in 0..x.len() {
                    y[k] = x[k] + h;
                    let up = f.value(&y);
                    y[k] = x[k] - h;
                    let down = f.value(&y);
                    y[k] = x[k];
                    out[k] = (up - down) / (2.0 * h);
                }
            }
            _ => out.iter_mut().for_each(|g| *g = 0.0),
        }
    }

    /// Whether the field is continuous (required by the continuous stepper).
    pub fn is_continuous(&self) -> bool {
        !matches!(self, CoefficientField::Checkerboard { .. })
    }

    /// `(min, max)` of the field values.
    pub fn range(&self) -> (f64, f64) {
        match self {
            CoefficientField::Constant { value } => (*value, *value),
            CoefficientField::Checkerboard { low, high, .. } => (low.min(*high), low.max(*high)),
            CoefficientField::Lattice(f) => f
                .values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
        }
    }
}

/// Standard bump `exp(−1/(1 − |z|²))` on the unit ball.
fn bump(z2: f64) -> f64 {
    if z2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - z2)).exp()
    }
}

/// Mollify `field` with the unit-mass bump of radius `1/k` and sample on `grid`.
///
/// Outside `mask` (a domain frozen at a time slice) the field is replaced by the identity
/// value `1` before averaging. The fields here do not depend on time, so the time part of
/// the space-time mollifier integrates out.
pub fn mollify_coefficients(
    field: &CoefficientField,
    k: f64,
    grid: &LatticeSpec,
    mask: Option<(&Domain, f64)>,
) -> Result<LatticeField, KernelError> {
    if !(k >= 1.0) {
        return Err(KernelError::InvalidParameter("smoothing index k must be ≥ 1".into()));
    }
    let n = grid.shape.len();
    let radius = 1.0 / k;
    let per_radius: i64 = match n {
        1 => 32,
        2 => 12,
        _ => 6,
    };
    let step = radius / per_radius as f64;
    let span = (2 * per_radius + 1) as usize;
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    for flat in 0..span.pow(n as u32) {
        let mut rem = flat;
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            z.push(((rem % span) as i64 - per_radius) as f64 * step);
            rem /= span;
        }
        let w = bump(z.iter().map(|v| v * v).sum::<f64>() / (radius * radius));
        if w > 0.0 {
            offsets.push(z);
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    let values = (0..grid.len())
        .map(|flat| {
            let node = grid.node(flat);
            let mut acc = 0.0;
            let mut y = node.clone();
            for (z, w) in offsets.iter().zip(&weights) {
                for i in 0..n {
                    y[i] = node[i] - z[i];
                }
                let v = match mask {
                    Some((d, t)) if !d.contains(&SpacetimePoint::new(&y, t)) => 1.0,
                    _ => field.value(&y),
                };
                acc += w * v;
            }
            acc / total
        })
        .collect();
    Ok(LatticeField {
        grid: grid.clone(),
        values,
    })
}
