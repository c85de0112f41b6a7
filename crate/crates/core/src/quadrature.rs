//! Gauss–Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..m {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = m as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule on `[a, b]` with `panels` equal panels of an `m`-point rule.
pub fn composite(a: f64, b: f64, panels: usize, m: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(m);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * m);
    for k in 0..panels {
        let mid = a + h * (k as f64 + 0.5);
        for (z, w) in nodes.iter().zip(&weights) {
            out.push((mid + 0.5 * h * z, 0.5 * h * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        for deg in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn composite_integrates_exponential() {
        let q: f64 = composite(0.0, 3.0, 4, 6).iter().map(|(x, w)| w * x.exp()).sum();
        assert!((q - (3f64.exp() - 1.0)).abs() < 1e-12);
    }
}
