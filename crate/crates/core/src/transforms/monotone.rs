use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

/// Which point of a level set or jump gap the inverse returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `inf{x | s(x) ≥ σ}`: left end of a plateau.
    Min,
    /// `sup{x | s(x) ≤ σ}`: right end of a plateau.
    Sup,
}

/// Nondecreasing map `s(x)` and its generalized inverse.
///
/// A table is a list of points `(x, s)` nondecreasing in both coordinates and
/// interpolated linearly. Two points with equal `x` encode a jump of `s`
/// (the map is left-continuous there); two with equal `s` encode a plateau.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneMap {
    Table {
        points: Vec<(f64, f64)>,
        convention: Convention,
    },
    /// `η(x) = ∫₀ˣ tr H` with the min-inverse `ξ`.
    #[serde(skip_serializing)]
    TraceIntegral { h: Box<Hamiltonian> },
}

/// Builds the inverse of the tabulated map under `convention`.
pub fn generalized_inverse(points: Vec<(f64, f64)>, convention: Convention) -> Result<MonotoneMap> {
    if points.is_empty() {
        return Err(Error::EmptyMesh);
    }
    for w in points.windows(2) {
        let ((x0, s0), (x1, s1)) = (w[0], w[1]);
        if !(x1 >= x0 && s1 >= s0) || (x1 == x0 && s1 == s0) {
            return Err(Error::InvalidParameter(format!(
                "table not nondecreasing at ({x1}, {s1})"
            )));
        }
    }
    if points.iter().any(|(x, s)| !x.is_finite() || !s.is_finite()) {
        return Err(Error::InvalidParameter("non-finite table entry".into()));
    }
    Ok(MonotoneMap::Table { points, convention })
}

fn lerp(a: (f64, f64), b: (f64, f64), t: f64) -> f64 {
    if b.0 == a.0 {
        a.1
    } else {
        a.1 + (t - a.0) / (b.0 - a.0) * (b.1 - a.1)
    }
}

impl MonotoneMap {
    pub fn identity() -> Self {
        MonotoneMap::Table {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
            convention: Convention::Min,
        }
    }

    /// `s(x)`, left-continuous at jumps; continued with the last slope.
    pub fn forward(&self, x: f64) -> f64 {
        match self {
            MonotoneMap::TraceIntegral { h } => h.trace_integral(x),
            MonotoneMap::Table { points, .. } => {
                let k = points.partition_point(|p| p.0 < x);
                if k == 0 {
                    return points[0].1;
                }
                if k == points.len() {
                    return extrapolate(points, x, |p| *p);
                }
                lerp(points[k - 1], points[k], x)
            }
        }
    }

    /// Generalized inverse `x(σ)`.
    pub fn inverse(&self, sigma: f64) -> f64 {
        match self {
            MonotoneMap::TraceIntegral { h } => h.trace_inverse(sigma),
            MonotoneMap::Table { points, convention } => {
                let swap = |p: &(f64, f64)| (p.1, p.0);
                let n = points.len();
                match convention {
                    Convention::Min => {
                        let j = points.partition_point(|p| p.1 < sigma);
                        match j {
                            0 => points[0].0,
                            j if j == n => extrapolate(points, sigma, swap),
                            j => lerp(swap(&points[j - 1]), swap(&points[j]), sigma),
                        }
                    }
                    Convention::Sup => {
                        let j = points.partition_point(|p| p.1 <= sigma);
                        match j {
                            0 => points[0].0,
                            j if j == n => extrapolate(points, sigma, swap),
                            j => {
                                let (a, b) = (points[j - 1], points[j]);
                                if b.0 == a.0 {
                                    a.0
                                } else {
                                    lerp(swap(&a), swap(&b), sigma)
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Points of the inverse map `(σ, x(σ))`.
    pub fn inverse_table(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            MonotoneMap::Table { points, .. } => Some(points.iter().map(|p| (p.1, p.0)).collect()),
            MonotoneMap::TraceIntegral { .. } => None,
        }
    }
}

/// Linear continuation past the last point with the slope of the last
/// nondegenerate segment (flat when there is none).
fn extrapolate(points: &[(f64, f64)], t: f64, orient: impl Fn(&(f64, f64)) -> (f64, f64)) -> f64 {
    let last = orient(&points[points.len() - 1]);
    let slope = points
        .windows(2)
        .rev()
        .map(|w| (orient(&w[0]), orient(&w[1])))
        .find(|(a, b)| b.0 > a.0)
        .map_or(0.0, |(a, b)| (b.1 - a.1) / (b.0 - a.0));
    last.1 + slope * (t - last.0)
}
