//! Structure-preserving reductions: trace normalization, scaling, strings
//! and the gauge transform removing a potential.

mod monotone;
mod strings;

pub use monotone::{generalized_inverse, Convention, MonotoneMap};
pub use strings::{
    indefinite_string_to_canonical, parse_string_descriptor, string_to_canonical,
    IndefiniteStringData, Mass, StringData, StringDescriptor,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{Cell, CellTable, Form, Hamiltonian, MeshPolicy, PrimitiveIntegrals};
use crate::numerics::gauss_legendre_points;
use crate::propagator::{j_times, traceless_exp};
use crate::weyl::{m_function, MFunctionSample, TruncationPolicy};

/// How the m-function of a transformed Hamiltonian relates to the original data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Relation {
    /// Same m-function.
    Identity,
    /// `m_r(z) = r₃ m((r₂/r₁) z)`.
    Scaled { r1: f64, r2: f64, r3: f64 },
    /// `z m(z) = m_D(z²)` for the string's Weyl function `m_D`.
    KreinString,
    /// `M(z) = -m(-z)` for the string's Weyl function `M`.
    IndefiniteString,
    /// The m-function of the system with potential equals that of the result.
    Gauge,
}

impl Relation {
    pub fn statement(&self) -> String {
        match self {
            Relation::Identity => "m unchanged".into(),
            Relation::Scaled { r1, r2, r3 } => format!("m_r(z) = {r3}·m(({r2}/{r1})·z)"),
            Relation::KreinString => "z·m(z) = m_D(z²)".into(),
            Relation::IndefiniteString => "M(z) = -m(-z)".into(),
            Relation::Gauge => "m(H, Q) = m(H̃)".into(),
        }
    }
}

/// A transformed Hamiltonian together with its m-relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub hamiltonian: Hamiltonian,
    pub relation: Relation,
}

/// Trace-normed reparametrization `H̃(s) = H(ξ(s)) / tr H(ξ(s))` with `ξ` the
/// inverse of `η(x) = ∫₀ˣ tr H`. Piecewise-constant input gives exactly
/// trace-normed cells; other forms are wrapped and evaluated lazily.
pub fn trace_normalize(h: &Hamiltonian) -> Result<(Transformed, MonotoneMap)> {
    let total = h.total_trace();
    if total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "trace integral is finite ({total:e}); nothing to normalize onto [0, ∞)"
        )));
    }
    let done = |hamiltonian: Hamiltonian, map: MonotoneMap| {
        Ok((
            Transformed {
                hamiltonian,
                relation: Relation::Identity,
            },
            map,
        ))
    };
    match &h.form {
        Form::Constant { a0, b0, c0 } => {
            let t = a0 + c0;
            let map = generalized_inverse(vec![(0.0, 0.0), (1.0, t)], Convention::Min)?;
            done(Hamiltonian::constant(a0 / t, b0 / t, c0 / t), map)
        }
        Form::PowerLawAlpha { alpha } if *alpha == 0.0 => {
            let map = generalized_inverse(vec![(0.0, 0.0), (1.0, 2.0)], Convention::Min)?;
            done(Hamiltonian::constant(0.5, 0.0, 0.5), map)
        }
        Form::PiecewiseConstant(t) => {
            let mut bps = Vec::new();
            let mut cells = Vec::new();
            let mut points = vec![(0.0, 0.0)];
            let (tb, tc) = (t.breakpoints(), t.cells());
            let mut eta = 0.0;
            for k in 0..tc.len() {
                let tr = tc[k].trace();
                let width = tb.get(k + 1).map_or(f64::INFINITY, |r| r - tb[k]);
                if tr > 0.0 {
                    bps.push(eta);
                    cells.push(Cell::new(tc[k].a / tr, tc[k].b / tr, tc[k].c / tr));
                }
                if width.is_finite() {
                    eta += tr * width;
                    points.push((tb[k + 1], eta));
                } else {
                    points.push((tb[k] + 1.0, eta + tr));
                }
            }
            if tc.last().is_some_and(|c| c.trace() == 0.0) {
                return Err(Error::InvalidParameter(
                    "last cell has zero trace; the trace integral is finite".into(),
                ));
            }
            points.dedup_by(|b, a| a == b);
            let map = generalized_inverse(points, Convention::Min)?;
            done(
                Hamiltonian::new(
                    f64::INFINITY,
                    Form::PiecewiseConstant(CellTable::new(bps, cells)?),
                ),
                map,
            )
        }
        Form::TraceNormalized { .. } => done(h.clone(), MonotoneMap::identity()),
        _ => {
            let map = MonotoneMap::TraceIntegral {
                h: Box::new(h.clone()),
            };
            done(h.clone().trace_normalized(), map)
        }
    }
}

/// `H_r(x) = r₂ [[r₃ a(r₁x), b(r₁x)], [b(r₁x), c(r₁x)/r₃]]` on `[0, L/r₁)`.
pub fn scale(h: &Hamiltonian, r1: f64, r2: f64, r3: f64) -> Result<Transformed> {
    Ok(Transformed {
        hamiltonian: h.scaled(r1, r2, r3)?,
        relation: Relation::Scaled { r1, r2, r3 },
    })
}

/// Real 2×2 matrix helpers for the gauge transform.
pub type Real2 = [[f64; 2]; 2];

fn mul(p: &Real2, q: &Real2) -> Real2 {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = p[i][0] * q[0][j] + p[i][1] * q[1][j];
        }
    }
    r
}

/// `exp(JQs)` for a constant symmetric `Q`.
fn zero_energy_step(q: &Cell, s: f64) -> Real2 {
    let c = |v: f64| Complex64::new(v * s, 0.0);
    let e = traceless_exp(&j_times(c(q.a), c(q.b), c(q.c)));
    let k = e.log_scale.exp();
    [
        [e.entries[0][0].re * k, e.entries[0][1].re * k],
        [e.entries[1][0].re * k, e.entries[1][1].re * k],
    ]
}

/// `Uᵀ H U`.
fn congruence(u: &Real2, h: &Cell) -> Cell {
    let hm = [[h.a, h.b], [h.b, h.c]];
    let ut = [[u[0][0], u[1][0]], [u[0][1], u[1][1]]];
    let r = mul(&ut, &mul(&hm, u));
    Cell::new(r[0][0], 0.5 * (r[0][1] + r[1][0]), r[1][1])
}

/// Result of [`gauge_transform`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    pub transformed: Transformed,
    /// Mesh cells `(l, r, Ū)` with `Ū = U(0, (l+r)/2)`, for pointwise checks.
    pub midpoints: Vec<(f64, f64, Real2)>,
    /// True when `Q` vanishes and `H` is constant past the mesh, so the
    /// continued last cell is exact.
    pub exact_tail: bool,
}

/// `H̃ = U(0,x)ᵀ H(x) U(0,x)` with `U` the zero-energy solution of
/// `JY' = -QY`, as a sampled-primitive Hamiltonian on the mesh (merged with
/// the breakpoints of `H` and `Q`). Each cell integral uses cell averages of
/// `H` and `Q` and Gauss-Legendre panels short enough to resolve `U`.
pub fn gauge_transform(h: &Hamiltonian, q: &Hamiltonian, mesh: &MeshPolicy) -> Result<Gauge> {
    let mut nodes = mesh.nodes()?;
    let end = *nodes.last().expect("mesh nodes");
    nodes.extend(h.breakpoints(end));
    nodes.extend(q.breakpoints(end));
    nodes.retain(|&x| x <= h.length.min(q.length));
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    nodes.dedup();
    if nodes.len() < 2 {
        return Err(Error::EmptyMesh);
    }
    let mut u: Real2 = [[1.0, 0.0], [0.0, 1.0]];
    let mut acc = PrimitiveIntegrals {
        a: 0.0,
        b: 0.0,
        c: 0.0,
    };
    let (mut xs, mut pa, mut pb, mut pc) = (vec![0.0], vec![0.0], vec![0.0], vec![0.0]);
    let mut midpoints = Vec::with_capacity(nodes.len());
    for w in nodes.windows(2) {
        let (l, r) = (w[0], w[1]);
        let (hc, qc) = (h.cell_average(l, r), q.cell_average(l, r));
        let norm = qc.a.abs() + 2.0 * qc.b.abs() + qc.c.abs();
        let panels = ((norm * (r - l)) / 0.5).ceil().max(1.0) as usize;
        for p in 0..panels {
            let (pl, pr) = (
                l + (r - l) * p as f64 / panels as f64,
                l + (r - l) * (p + 1) as f64 / panels as f64,
            );
            for (x, wt) in gauss_legendre_points(pl, pr) {
                let c = congruence(&mul(&zero_energy_step(&qc, x - l), &u), &hc);
                acc.a += wt * c.a;
                acc.b += wt * c.b;
                acc.c += wt * c.c;
            }
        }
        midpoints.push((l, r, mul(&zero_energy_step(&qc, 0.5 * (r - l)), &u)));
        u = mul(&zero_energy_step(&qc, r - l), &u);
        xs.push(r);
        pa.push(acc.a);
        pb.push(acc.b);
        pc.push(acc.c);
    }
    let length = h.length.min(q.length);
    let mut exact_tail = length <= end;
    if length > end {
        // continue with Uᵀ H U at the end of the mesh over one more mesh length
        let probe = if length.is_finite() {
            length
        } else {
            2.0 * end
        };
        let (hc, qc) = (h.cell_average(end, probe), q.cell_average(end, probe));
        let c = congruence(&u, &hc);
        xs.push(probe);
        pa.push(acc.a + c.a * (probe - end));
        pb.push(acc.b + c.b * (probe - end));
        pc.push(acc.c + c.c * (probe - end));
        exact_tail = qc == Cell::new(0.0, 0.0, 0.0)
            && h.breakpoints(probe).iter().all(|&b| b <= end)
            && h.is_piecewise_constant();
    }
    let hamiltonian = Hamiltonian::sampled(xs, pa, pb, pc, length)?;
    Ok(Gauge {
        transformed: Transformed {
            hamiltonian,
            relation: Relation::Gauge,
        },
        midpoints,
        exact_tail,
    })
}

/// Pointwise density `U(0,x)ᵀ H̄ U(0,x)` at the midpoint of every mesh cell.
pub fn gauge_midpoint_densities(h: &Hamiltonian, g: &Gauge) -> Vec<(f64, Cell, Cell)> {
    g.midpoints
        .iter()
        .map(|&(l, r, u)| {
            let hc = h.cell_average(l, r);
            (0.5 * (l + r), hc, congruence(&u, &hc))
        })
        .collect()
}

/// Weyl function `m_D(ζ) = z m(z)` of a Krein string at `z = √ζ ∈ ℂ₊`.
pub fn krein_weyl_function(
    h: &Hamiltonian,
    zeta: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let z = Complex64::i() * (-zeta).sqrt();
    Ok(z * m_function(h, z, policy)?.value)
}

/// Weyl function `M(z) = -m(-z)` of an indefinite string.
pub fn indefinite_weyl_function(
    h: &Hamiltonian,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<MFunctionSample> {
    let mut s = m_function(h, -z, policy)?;
    s.z = z;
    s.value = -s.value;
    Ok(s)
}

#[cfg(test)]
mod tests;
