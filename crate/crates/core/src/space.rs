//! Value spaces: how `||.||` is evaluated on `R^m`.

use serde::{Deserialize, Serialize};

use crate::error::{dimension, invalid, Error, Result};

/// Target normed space for the chaos coefficients.
///
/// `Lq` is a weighted `m`-point discretization of `L_q(X, mu)`; `FiniteSup`
/// is the norm `v -> max_{t in T} <t, v>` for a finite symmetric set `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueSpace {
    Lq {
        q: f64,
        weights: Vec<f64>,
    },
    FiniteSup {
        #[serde(rename = "T")]
        points: Vec<Vec<f64>>,
    },
}

const SYMMETRY_TOL: f64 = 1e-12;

impl ValueSpace {
    /// Unweighted `l_2` on `R^m`.
    pub fn euclidean(m: usize) -> Self {
        ValueSpace::Lq {
            q: 2.0,
            weights: vec![1.0; m],
        }
    }

    pub fn lq(q: f64, weights: Vec<f64>) -> Result<Self> {
        let s = ValueSpace::Lq { q, weights };
        s.validate()?;
        Ok(s)
    }

    pub fn finite_sup(points: Vec<Vec<f64>>) -> Result<Self> {
        let s = ValueSpace::FiniteSup { points };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            ValueSpace::Lq { weights, .. } => weights.len(),
            ValueSpace::FiniteSup { points } => points.first().map_or(0, Vec::len),
        }
    }

    /// The exponent `q` of an `Lq` space.
    pub fn q(&self) -> Option<f64> {
        match self {
            ValueSpace::Lq { q, .. } => Some(*q),
            ValueSpace::FiniteSup { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ValueSpace::Lq { q, weights } => {
                if !(q.is_finite() && *q >= 1.0) {
                    return Err(invalid(format!("lq space needs q >= 1, got {q}")));
                }
                if weights.is_empty() {
                    return Err(invalid("lq space needs at least one weight"));
                }
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                    return Err(invalid(format!("lq weights must be positive, got {w}")));
                }
            }
            ValueSpace::FiniteSup { points } => {
                let m = match points.first() {
                    Some(t) if !t.is_empty() => t.len(),
                    _ => return Err(invalid("finite_sup space needs a nonempty T")),
                };
                if points.iter().any(|t| t.len() != m) {
                    return Err(dimension("finite_sup points have differing lengths"));
                }
                for t in points {
                    let mirrored = points.iter().any(|s| {
                        s.iter()
                            .zip(t)
                            .all(|(a, b)| (a + b).abs() <= SYMMETRY_TOL * (1.0 + b.abs()))
                    });
                    if !mirrored {
                        return Err(invalid("finite_sup T must be closed under negation"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Norm of `v`, checking its length.
    pub fn norm_value(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(dimension(format!(
                "vector length {} does not match space dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(self.norm(v))
    }

    /// Norm of `v`; `v.len()` must equal `self.dim()`.
    pub fn norm(&self, v: &[f64]) -> f64 {
        match self {
            ValueSpace::Lq { q, weights } => lq_norm(*q, weights, v),
            ValueSpace::FiniteSup { points } => points
                .iter()
                .map(|t| dot(t, v))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// A subgradient of the norm at `v`, written into `out`.
    ///
    /// At `v = 0` the zero vector is returned. For `FiniteSup` ties in the
    /// maximizing point go to the first one in `T`.
    pub fn subgradient(&self, v: &[f64], out: &mut [f64]) {
        match self {
            ValueSpace::Lq { q, weights } => {
                let nv = lq_norm(*q, weights, v);
                if nv == 0.0 {
                    out.iter_mut().for_each(|o| *o = 0.0);
                    return;
                }
                for ((o, &x), &w) in out.iter_mut().zip(v).zip(weights) {
                    *o = if *q == 2.0 {
                        w * x / nv
                    } else if *q == 1.0 {
                        w * x.signum() * (x != 0.0) as u8 as f64
                    } else {
                        w * x.signum() * (x.abs() / nv).powf(q - 1.0)
                    };
                }
            }
            ValueSpace::FiniteSup { points } => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (k, t) in points.iter().enumerate() {
                    let val = dot(t, v);
                    if val > best_val {
                        best_val = val;
                        best = k;
                    }
                }
                if best_val <= 0.0 {
                    out.iter_mut().for_each(|o| *o = 0.0);
                } else {
                    out.copy_from_slice(&points[best]);
                }
            }
        }
    }

    /// Constant `K = c * sqrt(q)` in the Gaussian (alpha+) comparison for `L_q`.
    ///
    /// The absolute constant `c` is a calibration parameter (default 1).
    pub fn type2_k(&self, calibration: f64) -> Result<f64> {
        match self {
            ValueSpace::Lq { q, .. } => Ok(calibration * q.sqrt()),
            ValueSpace::FiniteSup { .. } => Err(Error::Unsupported(
                "the (alpha+) constant K is unknown for finite_sup spaces; supply --K".into(),
            )),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lq_norm(q: f64, weights: &[f64], v: &[f64]) -> f64 {
    if q == 2.0 {
        return weights
            .iter()
            .zip(v)
            .map(|(w, x)| w * x * x)
            .sum::<f64>()
            .sqrt();
    }
    if q == 1.0 {
        return weights.iter().zip(v).map(|(w, x)| w * x.abs()).sum();
    }
    // scale by the largest entry so that |x|^q cannot overflow
    let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = weights
        .iter()
        .zip(v)
        .map(|(w, x)| w * (x.abs() / scale).powf(q))
        .sum();
    scale * s.powf(1.0 / q)
}
