//! Weyl-Titchmarsh m-function of a canonical system, computed from the
//! fundamental matrix at growing truncation points, plus the closed-form
//! model m-functions used as oracles.
//!
//! The fundamental matrix is accumulated cell by cell with the fourth-order
//! Magnus step built from primitive integrals only (exact on constant cells).
//! Cells of non-piecewise-constant forms are bisected until a whole-cell step
//! and two half-cell steps agree to `cell_tol`.

mod models;

use models::upper_half;

pub use models::{
    constant_from_m, d_nu, dirac_to_schrodinger_m, hypergeometric_0f1, kappa_reduce,
    model_fundamental_alpha, model_m, model_rho, model_solutions_alpha,
    model_solutions_alpha_with_derivatives, ModelFamily,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Cell, Hamiltonian};
use crate::propagator::{j_times, mat_mul, traceless_exp, Entries, TransferMatrix};

/// Stopping rule and discretization control for [`m_function`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationPolicy {
    pub rtol: f64,
    pub atol: f64,
    /// Number of doublings of the truncation point.
    pub k_max: usize,
    /// Accepted relative disagreement between one step and two half steps on a cell.
    pub cell_tol: f64,
    /// Hard cap on the number of cells per evaluation.
    pub max_cells: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            rtol: 1e-9,
            atol: 1e-15,
            k_max: 60,
            cell_tol: 1e-11,
            max_cells: 4_000_000,
        }
    }
}

impl TruncationPolicy {
    /// Looser setting for bulk sweeps (spectral inversion, verification ladders).
    pub fn sweep() -> Self {
        TruncationPolicy {
            rtol: 1e-7,
            cell_tol: 1e-9,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MFunctionSample {
    pub z: Complex64,
    pub value: Complex64,
    /// Truncation radius plus the discretization estimate.
    pub radius: f64,
    /// Last truncation point.
    pub truncation: f64,
    /// `|m_fine - m_coarse|` from the step-doubling comparison.
    pub discretization: f64,
    pub cells: usize,
    pub converged: bool,
}

type Sym = [Complex64; 3];

fn sym_comb(p: &Sym, kp: f64, q: &Sym, kq: f64) -> Sym {
    [
        p[0] * kp + q[0] * kq,
        p[1] * kp + q[1] * kq,
        p[2] * kp + q[2] * kq,
    ]
}

/// One fourth-order Magnus step for `Y' = -JM(x)Y` given the primitive of `M`
/// at the left end, midpoint and right end: `Ω = B₀ + [B₁, B₀]` with
/// `B₀ = -J ΔP` and `B₁ = -J (P_r - 2P_m + P_l)/3`.
fn magnus(pl: &Sym, pm: Option<&Sym>, pr: &Sym) -> TransferMatrix {
    let d = sym_comb(pr, 1.0, pl, -1.0);
    let b0 = j_times(d[0], d[1], d[2]).map(|row| row.map(|e| -e));
    let Some(pm) = pm else {
        return traceless_exp(&b0);
    };
    let s = sym_comb(&sym_comb(pr, 1.0, pl, 1.0), 1.0 / 3.0, pm, -2.0 / 3.0);
    let b1 = j_times(s[0], s[1], s[2]).map(|row| row.map(|e| -e));
    let (p, q) = (mat_mul(&b1, &b0), mat_mul(&b0, &b1));
    let mut omega: Entries = b0;
    for i in 0..2 {
        for j in 0..2 {
            omega[i][j] += p[i][j] - q[i][j];
        }
    }
    traceless_exp(&omega)
}

fn relative_gap(a: &TransferMatrix, b: &TransferMatrix) -> f64 {
    let k = (a.log_scale - b.log_scale).exp();
    let mut gap: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            gap = gap.max((a.entries[i][j] * k - b.entries[i][j]).norm());
        }
    }
    gap / b.max_abs()
}

const MAX_DEPTH: u32 = 40;
/// Ratio of the base geometric grid.
const GRID_RATIO: f64 = 1.090_507_732_665_257_7; // 2^{1/8}

struct Engine<'a> {
    h: &'a Hamiltonian,
    q: Option<&'a Hamiltonian>,
    z: Complex64,
    exact_cells: bool,
    cell_tol: f64,
    fine: TransferMatrix,
    coarse: TransferMatrix,
    cells: usize,
}

impl Engine<'_> {
    /// Primitive of `zH - Q`.
    fn prim(&self, x: f64) -> Sym {
        let p = self.h.primitives_unchecked(x);
        let mut s = [self.z * p.a, self.z * p.b, self.z * p.c];
        if let Some(q) = self.q {
            let p = q.primitives_unchecked(x);
            s[0] -= p.a;
            s[1] -= p.b;
            s[2] -= p.c;
        }
        s
    }

    /// Propagates from `left` to `right` through the breakpoints of `H` and
    /// `Q` and, for non-piecewise-constant forms, the geometric base grid.
    fn advance(
        &mut self,
        sources: &[&Hamiltonian],
        x_min: f64,
        left: &mut f64,
        p_left: &mut Sym,
        right: f64,
    ) {
        let mut nodes: Vec<f64> = Vec::new();
        for src in sources {
            nodes.extend(
                src.breakpoints(right)
                    .into_iter()
                    .filter(|&b| b > *left && b < right),
            );
        }
        if !self.exact_cells {
            if *left == 0.0 && x_min < right {
                nodes.push(x_min);
            }
            let mut g = if *left < x_min {
                x_min * GRID_RATIO
            } else {
                let j = ((*left / x_min).ln() / GRID_RATIO.ln()).floor() + 1.0;
                x_min * GRID_RATIO.powf(j)
            };
            while g < right {
                if g > *left {
                    nodes.push(g);
                }
                g *= GRID_RATIO;
            }
        }
        nodes.push(right);
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
        nodes.dedup();
        for x in nodes {
            if x <= *left {
                continue;
            }
            let p_right = self.prim(x);
            self.cell(*left, x, p_left, &p_right);
            *left = x;
            *p_left = p_right;
        }
    }

    fn apply(&mut self, fine: TransferMatrix, coarse: TransferMatrix) {
        self.fine = fine * self.fine;
        self.coarse = coarse * self.coarse;
        self.cells += 1;
    }

    fn cell(&mut self, l: f64, r: f64, pl: &Sym, pr: &Sym) {
        if self.exact_cells {
            let e = magnus(pl, None, pr);
            self.apply(e, e);
        } else {
            let pm = self.prim(0.5 * (l + r));
            self.refine(l, r, pl, &pm, pr, 0);
        }
    }

    fn refine(&mut self, l: f64, r: f64, pl: &Sym, pm: &Sym, pr: &Sym, depth: u32) {
        let m = 0.5 * (l + r);
        let q1 = self.prim(0.5 * (l + m));
        let q3 = self.prim(0.5 * (m + r));
        let whole = magnus(pl, Some(pm), pr);
        let fine = magnus(pm, Some(&q3), pr) * magnus(pl, Some(&q1), pm);
        let gap = relative_gap(&whole, &fine);
        // the primitives carry rounding of order ε·|zP|; bisection cannot go below it
        let floor = 16.0 * f64::EPSILON * (pr[0].norm() + pr[1].norm() + pr[2].norm());
        if gap <= self.cell_tol.max(floor) || depth >= MAX_DEPTH || r - l <= 1e-13 * r {
            self.apply(fine, whole);
        } else {
            self.refine(l, m, pl, &q1, pm, depth + 1);
            self.refine(m, r, pm, &q3, pr, depth + 1);
        }
    }
}

/// Start and value of a constant tail of `H` on which `Q` vanishes.
fn constant_tail(h: &Hamiltonian, q: Option<&Hamiltonian>) -> Option<(f64, Cell)> {
    let (x0, cell) = h.constant_tail().filter(|(_, c)| c.trace() > 0.0)?;
    match q {
        None => Some((x0, cell)),
        Some(q) => {
            let (xq, qc) = q.constant_tail()?;
            (qc == Cell::new(0.0, 0.0, 0.0)).then_some((x0.max(xq), cell))
        }
    }
}

/// m-function of the constant tail, `ζ₀ = (i h₀ - b₀)/c₀` for every `z ∈ ℂ₊`;
/// `None` stands for `∞` (`c₀ = 0`).
fn tail_m(h0: &Cell) -> Option<Complex64> {
    // rank-one cells compute a rounding-level determinant that sqrt would amplify
    let det = h0.det();
    let det = if det <= 8.0 * f64::EPSILON * h0.a * h0.c {
        0.0
    } else {
        det
    };
    (h0.c > 0.0).then(|| Complex64::new(-h0.b, det.sqrt()) / h0.c)
}

/// Reference values for `-(θ₁ξ + θ₂)/(φ₁ξ + φ₂)`. Points of the lower
/// half-plane map into the Weyl disk at every truncation point.
const XI: [Complex64; 2] = [Complex64::new(0.0, -1.0), Complex64::new(0.0, -2.0)];

fn evaluate(
    h: &Hamiltonian,
    q: Option<&Hamiltonian>,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<MFunctionSample> {
    let (zu, reflect) = upper_half(z)?;
    let mut length = h.length;
    let mut bps_source = vec![h];
    if let Some(q) = q {
        length = length.min(q.length);
        bps_source.push(q);
    }
    let exact_cells =
        h.is_piecewise_constant() && q.map_or(true, Hamiltonian::is_piecewise_constant);
    let mag = zu.norm();
    let anchor = h.trace_inverse(1.0 / mag);
    let schedule = |k: usize| -> f64 {
        if length.is_finite() {
            length * (1.0 - 0.5f64.powi(k as i32 + 1))
        } else {
            anchor * 2f64.powi(k as i32)
        }
    };
    if !(schedule(0) > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trace integral vanishes near 0 (anchor {anchor:e})"
        )));
    }
    let x_min = {
        let x = h.trace_inverse(1e-16 / mag);
        if x > 0.0 {
            x
        } else {
            schedule(0) * 1e-12
        }
    };
    let mut engine = Engine {
        h,
        q,
        z: zu,
        exact_cells,
        cell_tol: policy.cell_tol,
        fine: TransferMatrix::identity(),
        coarse: TransferMatrix::identity(),
        cells: 0,
    };
    let mut left = 0.0;
    let mut p_left = engine.prim(0.0);
    let mut previous: Option<Complex64> = None;
    let mut sample = MFunctionSample {
        z,
        value: Complex64::new(f64::NAN, f64::NAN),
        radius: f64::INFINITY,
        truncation: 0.0,
        discretization: 0.0,
        cells: 0,
        converged: false,
    };
    let tail = constant_tail(h, q);
    if let Some((x0, h0)) = tail {
        engine.advance(&bps_source, x_min, &mut left, &mut p_left, x0);
        let close = |t: &TransferMatrix| match tail_m(&h0) {
            Some(mt) => t.mobius(-mt),
            None => -t.entries[0][0] / t.entries[0][1],
        };
        let value = close(&engine.fine);
        let discretization = (close(&engine.coarse) - value).norm();
        sample.value = if reflect { value.conj() } else { value };
        sample.truncation = x0;
        sample.discretization = if discretization.is_finite() {
            discretization
        } else {
            f64::INFINITY
        };
        sample.radius = sample.discretization;
        sample.cells = engine.cells;
        sample.converged = value.re.is_finite() && value.im.is_finite();
        return Ok(sample);
    }
    for k in 0..=policy.k_max {
        let right = schedule(k);
        if !(right > left) {
            break;
        }
        engine.advance(&bps_source, x_min, &mut left, &mut p_left, right);
        let m = [engine.fine.mobius(XI[0]), engine.fine.mobius(XI[1])];
        let value = (m[0] + m[1]) * 0.5;
        let movement = previous.map_or(f64::INFINITY, |p| (value - p).norm());
        let truncation_radius = (m[0] - m[1]).norm() + movement;
        let discretization = (engine.coarse.mobius(XI[0]) - m[0]).norm();
        previous = Some(value);
        sample.value = if reflect { value.conj() } else { value };
        sample.truncation = right;
        sample.discretization = if discretization.is_finite() {
            discretization
        } else {
            f64::INFINITY
        };
        sample.radius = truncation_radius + sample.discretization;
        sample.cells = engine.cells;
        if !value.re.is_finite() || !value.im.is_finite() {
            sample.radius = f64::INFINITY;
            break;
        }
        if truncation_radius <= policy.atol + policy.rtol * value.norm() {
            sample.converged = true;
            break;
        }
        if engine.cells > policy.max_cells {
            break;
        }
    }
    Ok(sample)
}

/// m-function sample; `converged` is false when the stopping rule was not met.
pub fn m_function_sample(
    h: &Hamiltonian,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<MFunctionSample> {
    evaluate(h, None, z, policy)
}

/// `m(z)`; [`Error::NonConvergence`] when the truncation radius stays above tolerance.
pub fn m_function(
    h: &Hamiltonian,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<MFunctionSample> {
    strict(evaluate(h, None, z, policy)?)
}

/// m-function of `JY' + QY = zHY` (the square-integrable solution at `L`
/// normalized as in the potential-free case).
pub fn m_function_with_potential(
    h: &Hamiltonian,
    q: &Hamiltonian,
    z: Complex64,
    policy: &TruncationPolicy,
) -> Result<MFunctionSample> {
    strict(evaluate(h, Some(q), z, policy)?)
}

fn strict(s: MFunctionSample) -> Result<MFunctionSample> {
    if s.converged {
        Ok(s)
    } else {
        Err(Error::NonConvergence {
            radius: s.radius,
            truncation: s.truncation,
        })
    }
}

/// Samples at many points in parallel; the output order follows `zs`.
pub fn m_sweep(
    h: &Hamiltonian,
    zs: &[Complex64],
    policy: &TruncationPolicy,
) -> Vec<Result<MFunctionSample>> {
    zs.par_iter()
        .map(|&z| m_function_sample(h, z, policy))
        .collect()
}

#[cfg(test)]
mod tests;
