//! Fundamental matrix `U(z, x)` of `JY' = zHY`, `U(z, 0) = I`, as an ordered
//! product of exact cell exponentials.
//!
//! Layout is `[[θ₁, φ₁], [θ₂, φ₂]]`. Large products are kept as
//! `e^{log_scale}·entries` so that nothing overflows; Möbius ratios never see
//! the scale.

use std::ops::Mul;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{Cell, Form, Hamiltonian, MeshPolicy};

const RENORMALIZE_ABOVE: f64 = 1e100;
const SERIES_BELOW: f64 = 1e-4;
/// Above this `|Im w|`, `cos w` and `sin w` are evaluated with `e^{|Im w|}` factored out.
const FACTOR_ABOVE: f64 = 50.0;

pub type Entries = [[Complex64; 2]; 2];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn mat_mul(p: &Entries, q: &Entries) -> Entries {
    let mut out = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = p[i][0] * q[0][j] + p[i][1] * q[1][j];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferMatrix {
    pub entries: Entries,
    /// The matrix is `e^{log_scale}·entries`.
    pub log_scale: f64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        TransferMatrix {
            entries: [[c(1.0), c(0.0)], [c(0.0), c(1.0)]],
            log_scale: 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    fn renormalized(mut self) -> Self {
        let m = self.max_abs();
        if m > RENORMALIZE_ABOVE && m.is_finite() {
            for e in self.entries.iter_mut().flatten() {
                *e /= m;
            }
            self.log_scale += m.ln();
        }
        self
    }

    /// Entries with the scale applied; may overflow for large `log_scale`.
    pub fn scaled_entries(&self) -> Entries {
        let s = self.log_scale.exp();
        self.entries.map(|row| row.map(|e| e * s))
    }

    /// `det(entries)·e^{2 log_scale}`.
    pub fn det(&self) -> Complex64 {
        let e = &self.entries;
        (e[0][0] * e[1][1] - e[0][1] * e[1][0]) * (2.0 * self.log_scale).exp()
    }

    /// `-(θ₁ξ + θ₂)/(φ₁ξ + φ₂)`.
    pub fn mobius(&self, xi: Complex64) -> Complex64 {
        let e = &self.entries;
        -(e[0][0] * xi + e[1][0]) / (e[0][1] * xi + e[1][1])
    }

    pub fn conj(&self) -> Self {
        TransferMatrix {
            entries: self.entries.map(|row| row.map(|e| e.conj())),
            log_scale: self.log_scale,
        }
    }
}

/// `self * rhs`: apply `rhs` first, then `self`.
impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            entries: mat_mul(&self.entries, &rhs.entries),
            log_scale: self.log_scale + rhs.log_scale,
        }
        .renormalized()
    }
}

/// One constant cell of `H` with its width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricCell {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub width: f64,
}

impl SymmetricCell {
    pub fn new(cell: Cell, width: f64) -> Self {
        SymmetricCell {
            a: cell.a,
            b: cell.b,
            c: cell.c,
            width,
        }
    }
}

/// `(cos w, sin(w)/w, s)` with both values multiplied by `e^{-s}`; even in `w`.
fn cos_sinc(w2: Complex64) -> (Complex64, Complex64, f64) {
    let w = w2.sqrt();
    if w.norm() < SERIES_BELOW {
        return (
            1.0 - w2 / 2.0 + w2 * w2 / 24.0,
            1.0 - w2 / 6.0 + w2 * w2 / 120.0,
            0.0,
        );
    }
    // sqrt has Re ≥ 0; flip so that Im w ≥ 0 (both functions are even)
    let w = if w.im < 0.0 { -w } else { w };
    if w.im <= FACTOR_ABOVE {
        return (w.cos(), w.sin() / w, 0.0);
    }
    let v = w.im;
    let i = Complex64::i();
    let small = (i * w - v).exp(); // e^{iu - 2v}
    let large = (-i * w - v).exp(); // e^{-iu}
    let cos = (small + large) / 2.0;
    let sin = (small - large) / (2.0 * i);
    (cos, sin / w, v)
}

/// `exp(X)` for a traceless `X`: `X² = -det(X)·I` gives `cos(w)I + sinc(w)X` with `w² = det X`.
pub fn traceless_exp(x: &Entries) -> TransferMatrix {
    let (p, q) = (x[0][0] * x[0][0], x[0][1] * x[1][0]);
    let det = -p - q;
    // a determinant at rounding level comes from a rank-one cell; left as is it
    // turns into spurious exponential growth over very long cells
    let det = if det.norm() <= 8.0 * f64::EPSILON * (p.norm() + q.norm()) {
        Complex64::new(0.0, 0.0)
    } else {
        det
    };
    let (cw, sw, log_scale) = cos_sinc(det);
    let entries = [
        [cw + sw * x[0][0], sw * x[0][1]],
        [sw * x[1][0], cw - sw * x[0][0]],
    ];
    TransferMatrix { entries, log_scale }.renormalized()
}

/// `J·S` for the symmetric `S = [[s11, s12], [s12, s22]]`.
pub fn j_times(s11: Complex64, s12: Complex64, s22: Complex64) -> Entries {
    [[-s12, -s22], [s11, s12]]
}

/// `exp(-JMΔ)` for the symmetric complex matrix `M = [[m11, m12], [m12, m22]]`,
/// that is `cos(ωΔ)I - Δ·sinc(ωΔ)·JM` with `ω² = det M`.
pub fn symmetric_exp(m11: Complex64, m12: Complex64, m22: Complex64, delta: f64) -> TransferMatrix {
    let jm = j_times(m11, m12, m22);
    traceless_exp(&jm.map(|row| row.map(|e| -e * delta)))
}

/// `exp(-zJH₀Δ)` on one cell.
pub fn step_exponential(cell: &SymmetricCell, z: Complex64) -> TransferMatrix {
    symmetric_exp(z * cell.a, z * cell.b, z * cell.c, cell.width)
}

/// Transfer matrix over a cell of `JY' + QY = zHY`: the exponential of `M = zH - Q`.
pub fn step_exponential_with_potential(
    h: &Cell,
    q: &Cell,
    z: Complex64,
    width: f64,
) -> TransferMatrix {
    symmetric_exp(z * h.a - q.a, z * h.b - q.b, z * h.c - q.c, width)
}

/// `(l, r)` pieces of the mesh up to `x`, cut at `x`.
fn mesh_pieces(policy: &MeshPolicy, x: f64) -> Result<Vec<(f64, f64)>> {
    let nodes = policy.nodes()?;
    let mut pieces: Vec<(f64, f64)> = nodes
        .windows(2)
        .filter(|w| w[0] < x)
        .map(|w| (w[0], w[1].min(x)))
        .collect();
    let end = *nodes.last().expect("nonempty mesh");
    if x > end {
        pieces.push((end, x));
    }
    Ok(pieces)
}

/// Piecewise-constant cells covering `[0, x]`: the tabulated cells of `h`
/// when it is already piecewise constant, else the averages over `policy`.
pub fn cells_up_to(h: &Hamiltonian, x: f64, policy: &MeshPolicy) -> Result<Vec<SymmetricCell>> {
    h.primitive_integrals(x)?;
    let d = match &h.form {
        Form::PiecewiseConstant(_) => h.clone(),
        _ => h.discretize(policy)?,
    };
    let Form::PiecewiseConstant(table) = &d.form else {
        unreachable!("discretize yields cells")
    };
    let bps = table.breakpoints();
    let mut out = Vec::new();
    for (k, cell) in table.cells().iter().enumerate() {
        let l = bps[k];
        if l >= x {
            break;
        }
        let r = bps.get(k + 1).copied().unwrap_or(f64::INFINITY).min(x);
        out.push(SymmetricCell::new(*cell, r - l));
    }
    if out.is_empty() && x > 0.0 {
        return Err(Error::EmptyMesh);
    }
    Ok(out)
}

/// Ordered product `E_n ⋯ E_1` over cells listed by increasing `x`.
pub fn product(cells: &[SymmetricCell], z: Complex64) -> TransferMatrix {
    cells.iter().fold(TransferMatrix::identity(), |u, cell| {
        step_exponential(cell, z) * u
    })
}

/// `U(z, x)` over the cells of `discretize(H, mesh)`.
pub fn fundamental_matrix(
    h: &Hamiltonian,
    z: Complex64,
    x: f64,
    mesh: &MeshPolicy,
) -> Result<TransferMatrix> {
    Ok(product(&cells_up_to(h, x, mesh)?, z))
}

/// `U(0, x)` for `JY' + QY = 0`, i.e. the solution of `Y' = JQY`. `Q` need not be PSD.
pub fn zero_energy_matrix(q: &Hamiltonian, x: f64, mesh: &MeshPolicy) -> Result<TransferMatrix> {
    q.primitive_integrals(x)?;
    let pieces = match &q.form {
        Form::PiecewiseConstant(t) => {
            let bps = t.breakpoints();
            (0..bps.len())
                .filter(|&k| bps[k] < x)
                .map(|k| {
                    (
                        bps[k],
                        bps.get(k + 1).copied().unwrap_or(f64::INFINITY).min(x),
                    )
                })
                .collect()
        }
        _ => mesh_pieces(mesh, x)?,
    };
    Ok(pieces
        .into_iter()
        .fold(TransferMatrix::identity(), |u, (l, r)| {
            let cell = q.cell_average(l, r);
            symmetric_exp(c(-cell.a), c(-cell.b), c(-cell.c), r - l) * u
        }))
}
