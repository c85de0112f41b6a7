//! Boundary data for Dirichlet problems.

use crate::geometry::{parabolic_distance, SpacetimePoint};
use serde::{Deserialize, Serialize};

/// A function on the essential boundary, extended by a value at infinity.
pub trait BoundaryDatum: Sync {
    fn value(&self, p: &SpacetimePoint) -> f64;
    fn at_infinity(&self) -> f64;
}

/// Serializable boundary data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Datum {
    Constant {
        value: f64,
        #[serde(default)]
        infinity: f64,
    },
    /// `amplitude·exp(−|x − center|²/(2·width²))`, independent of time.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        infinity: f64,
    },
    /// `gradient·x + offset`.
    Linear {
        gradient: Vec<f64>,
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        infinity: f64,
    },
    /// `max(0, 1 − ‖p − center‖/radius)` in the parabolic norm.
    TentBump {
        center: SpacetimePoint,
        radius: f64,
        #[serde(default)]
        infinity: f64,
    },
    /// `below` where `x[axis] ≤ threshold`, `above` elsewhere.
    Wall {
        axis: usize,
        threshold: f64,
        below: f64,
        above: f64,
        #[serde(default)]
        infinity: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Datum {
    pub fn constant(value: f64) -> Self {
        Datum::Constant { value, infinity: value }
    }
}

impl BoundaryDatum for Datum {
    fn value(&self, p: &SpacetimePoint) -> f64 {
        match self {
            Datum::Constant { value, .. } => *value,
            Datum::Gaussian {
                center,
                width,
                amplitude,
                ..
            } => {
                let d2: f64 = p.x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                amplitude * (-d2 / (2.0 * width * width)).exp()
            }
            Datum::Linear { gradient, offset, .. } => {
                offset + p.x.iter().zip(gradient).map(|(a, b)| a * b).sum::<f64>()
            }
            Datum::TentBump { center, radius, .. } => (1.0 - parabolic_distance(p, center) / radius).max(0.0),
            Datum::Wall {
                axis,
                threshold,
                below,
                above,
                ..
            } => {
                if p.x[*axis] <= *threshold {
                    *below
                } else {
                    *above
                }
            }
        }
    }

    fn at_infinity(&self) -> f64 {
        match self {
            Datum::Constant { infinity, .. }
            | Datum::Gaussian { infinity, .. }
            | Datum::Linear { infinity, .. }
            | Datum::TentBump { infinity, .. }
            | Datum::Wall { infinity, .. } => *infinity,
        }
    }
}

impl<F: Fn(&SpacetimePoint) -> f64 + Sync> BoundaryDatum for (F, f64) {
    fn value(&self, p: &SpacetimePoint) -> f64 {
        (self.0)(p)
    }
    fn at_infinity(&self) -> f64 {
        self.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_bump_peaks_at_center() {
        let d = Datum::TentBump {
            center: SpacetimePoint::origin(1),
            radius: 0.5,
            infinity: 0.0,
        };
        assert_eq!(d.value(&SpacetimePoint::origin(1)), 1.0);
        assert!((d.value(&SpacetimePoint::new(&[0.25], 0.0)) - 0.5).abs() < 1e-15);
        assert_eq!(d.value(&SpacetimePoint::new(&[0.0], -1.0)), 0.0);
    }

    #[test]
    fn data_parse_from_json() {
        let d: Datum = serde_json::from_str(r#"{"type":"wall","axis":0,"threshold":0,"below":0,"above":1}"#).unwrap();
        assert_eq!(d.value(&SpacetimePoint::new(&[-1e-5], 1.0)), 0.0);
        assert_eq!(d.value(&SpacetimePoint::new(&[1.0], 1.0)), 1.0);
        let g: Datum = serde_json::from_str(r#"{"type":"gaussian","center":[0],"width":0.5}"#).unwrap();
        assert_eq!(g.value(&SpacetimePoint::origin(1)), 1.0);
    }
}
