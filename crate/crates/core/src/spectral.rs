//! Spectral functions: Stieltjes inversion of a Herglotz function, the model
//! spectral functions and the Tauberian comparison of ρ against a scale.
//!
//! The smoothed distribution `(1/π) Im ∫ m(w) dw` is evaluated along a
//! contour that stays high above the real axis and only drops down to height
//! `ε_t = e(1 + |t|)` at the two endpoints `0` and `t`. Far fewer samples are
//! needed close to the axis, where the m-function is expensive and rough.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::numerics::gauss_legendre_points;
use crate::weyl::{m_function, ModelFamily, TruncationPolicy};

pub use crate::weyl::model_rho;

/// Relative heights `e` in `ε_t = e(1 + |t|)`.
pub const DEFAULT_EPS: [f64; 3] = [1e-1, 3e-2, 1e-2];

/// Relative height of the horizontal part of the contour.
const HEIGHT: f64 = 1.0;

/// Minimum ratio `ε·Im m` at the two smallest heights for a point mass.
const ATOM_RATIO: f64 = 0.7;
/// A point mass must exceed its grid neighbours by this factor.
const ATOM_CONCENTRATION: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub t: f64,
    pub mass: f64,
}

/// Nondecreasing function tabulated on increasing breakpoints containing 0,
/// with `ρ(0) = 0`. Point masses sit at breakpoints; between breakpoints the
/// table is interpolated linearly, which keeps the interpolant left-continuous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    atoms: Vec<Atom>,
}

impl SpectralFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_atoms(breakpoints, values, Vec::new())
    }

    pub fn with_atoms(breakpoints: Vec<f64>, values: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        if breakpoints.len() != values.len() || breakpoints.is_empty() {
            return Err(Error::InvalidParameter(
                "breakpoints and values must have equal nonzero length".into(),
            ));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite entry in spectral table".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let Some(zero) = breakpoints.iter().position(|&t| t == 0.0) else {
            return Err(Error::InvalidParameter("breakpoints must contain 0".into()));
        };
        if values[zero] != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ρ(0) = {} instead of 0",
                values[zero]
            )));
        }
        for a in &atoms {
            if !breakpoints.contains(&a.t) || !(a.mass > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "atom {a:?} is not a positive mass on a breakpoint"
                )));
            }
        }
        let s = SpectralFunction {
            breakpoints,
            values,
            atoms,
        };
        // a few ulps of slack: clamping writes ρ(t_k) = ρ(t_{k+1}) - μ_k, which need not round-trip
        let slack = 1e-13 * s.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for k in 1..s.values.len() {
            if s.values[k - 1] + s.atom_at(s.breakpoints[k - 1]) > s.values[k] + slack {
                return Err(Error::InvalidParameter(format!(
                    "decreasing at t = {}",
                    s.breakpoints[k]
                )));
            }
        }
        Ok(s)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    fn atom_at(&self, t: f64) -> f64 {
        self.atoms.iter().filter(|a| a.t == t).map(|a| a.mass).sum()
    }

    pub fn value(&self, t: f64) -> f64 {
        let (bp, v) = (&self.breakpoints, &self.values);
        match bp.partition_point(|&b| b < t) {
            0 => v[0],
            k if k == bp.len() => v[k - 1] + self.atom_at(bp[k - 1]),
            k if bp[k] == t => v[k],
            k => {
                let left = v[k - 1] + self.atom_at(bp[k - 1]);
                let w = (t - bp[k - 1]) / (bp[k] - bp[k - 1]);
                left + w * (v[k] - left)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InversionReport {
    pub rho: SpectralFunction,
    /// Number of negative increments set to zero.
    pub clamped: usize,
    /// Estimate of the coefficient of `z` in `m`, from `Im m(iY)/Y` at large `Y`.
    pub linear_term: f64,
    pub evaluations: usize,
}

fn check_inputs(t_grid: &[f64], eps: &[f64]) -> Result<()> {
    if t_grid.is_empty()
        || t_grid.iter().any(|t| !t.is_finite())
        || t_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidParameter(
            "t grid must be finite and strictly increasing".into(),
        ));
    }
    if eps.is_empty()
        || eps.iter().any(|&e| !(e > 0.0 && e < HEIGHT))
        || eps.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(Error::InvalidParameter(format!(
            "ε schedule must decrease within (0, {HEIGHT})"
        )));
    }
    Ok(())
}

/// Two-point linear extrapolation to height 0 from the last two entries.
fn richardson(eps: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return v[0];
    }
    let (el, es) = (eps[n - 2], eps[n - 1]);
    v[n - 1] - es * (v[n - 2] - v[n - 1]) / (el - es)
}

/// Geometric panels on `[lo, hi]` with ratio at most 2.
fn geometric_panels(lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> {
    let n = (hi / lo).log2().ceil().max(1.0) as i32;
    let r = (hi / lo).powf(1.0 / f64::from(n));
    (0..n).map(move |j| {
        (
            lo * r.powi(j),
            if j + 1 == n { hi } else { lo * r.powi(j + 1) },
        )
    })
}

/// Point on the horizontal part of the contour and `dw/ds`.
fn high_path(s: f64) -> (Complex64, Complex64) {
    (
        Complex64::new(s, HEIGHT * (1.0 + s.abs())),
        Complex64::new(1.0, HEIGHT * s.signum()),
    )
}

/// Evaluates `m` at every node in parallel.
fn sample_all<F>(m: &F, nodes: &[Complex64]) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    nodes.par_iter().map(|&z| m(z)).collect()
}

/// Stieltjes inversion of the Herglotz function `m` on `t_grid` (0 is added
/// when absent). `eps_schedule` lists decreasing relative heights; the last
/// two are combined by Richardson extrapolation.
pub fn stieltjes_invert<F>(m: F, t_grid: &[f64], eps_schedule: &[f64]) -> Result<InversionReport>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    check_inputs(t_grid, eps_schedule)?;
    let mut grid = t_grid.to_vec();
    if let Err(k) = grid.binary_search_by(|t| t.partial_cmp(&0.0).expect("finite")) {
        grid.insert(k, 0.0);
    }
    let zero = grid.iter().position(|&t| t == 0.0).expect("0 inserted");
    let ne = eps_schedule.len();

    // Node layout: horizontal panels, then per grid point the vertical legs and atom probes.
    let mut nodes: Vec<Complex64> = Vec::new();
    let mut weights: Vec<Complex64> = Vec::new();
    // (first node, last node) of the horizontal stretch from grid[k-1] or grid[k+1] to grid[k]
    let mut stretch = vec![(0usize, 0usize); grid.len()];
    let outward = (zero + 1..grid.len())
        .map(|k| (k - 1, k))
        .chain((0..zero).rev().map(|k| (k + 1, k)));
    for (from, to) in outward {
        let start = nodes.len();
        let (a, b) = (grid[from], grid[to]);
        let dir = (b - a).signum();
        let mut s = a;
        while (b - s) * dir > 0.0 {
            let next = s + dir * 0.5 * (1.0 + s.abs());
            let next = if (b - next) * dir > 0.0 { next } else { b };
            for (x, w) in gauss_legendre_points(s, next) {
                let (p, dp) = high_path(x);
                nodes.push(p);
                weights.push(dp * w);
            }
            s = next;
        }
        stretch[to] = (start, nodes.len());
    }
    // per grid point: for each height level j, nodes of ∫_{ε_j}^{ε_{j-1}} (ε_{-1} = top)
    let mut legs = vec![vec![(0usize, 0usize); ne]; grid.len()];
    let mut probes = vec![0usize; grid.len()];
    for (k, &t) in grid.iter().enumerate() {
        let scale = 1.0 + t.abs();
        for j in 0..ne {
            let hi = if j == 0 { HEIGHT } else { eps_schedule[j - 1] };
            let start = nodes.len();
            for (lo, up) in geometric_panels(eps_schedule[j] * scale, hi * scale) {
                for (y, w) in gauss_legendre_points(lo, up) {
                    nodes.push(Complex64::new(t, y));
                    weights.push(Complex64::new(w, 0.0));
                }
            }
            legs[k][j] = (start, nodes.len());
        }
        probes[k] = nodes.len();
        for &e in eps_schedule {
            nodes.push(Complex64::new(t, e * scale));
            weights.push(Complex64::new(e * scale, 0.0));
        }
    }
    let top = 1e6 * (1.0 + grid.iter().fold(0.0f64, |a, t| a.max(t.abs())));
    nodes.push(Complex64::new(0.0, top));
    let values = sample_all(&m, &nodes)?;
    let linear_term = values[values.len() - 1].im / top;
    let sum =
        |(a, b): (usize, usize)| -> Complex64 { (a..b).map(|i| values[i] * weights[i]).sum() };

    // horizontal integrals from 0 to each grid point
    let mut high = vec![Complex64::new(0.0, 0.0); grid.len()];
    for k in zero + 1..grid.len() {
        high[k] = high[k - 1] + sum(stretch[k]);
    }
    for k in (0..zero).rev() {
        high[k] = high[k + 1] + sum(stretch[k]);
    }
    // I_j(t) = ∫_{ε_j}^{top} m(t + iy) dy
    let vertical: Vec<Vec<Complex64>> = legs
        .iter()
        .map(|l| {
            let mut acc = Complex64::new(0.0, 0.0);
            l.iter()
                .map(|&r| {
                    acc += sum(r);
                    acc
                })
                .collect()
        })
        .collect();
    let smoothed: Vec<f64> = (0..grid.len())
        .map(|k| {
            // ∫ m dw from iε₀ up, along the high path, and down to t + iε_t
            let js: Vec<f64> = (0..ne)
                .map(|j| {
                    let d = high[k] - Complex64::i() * (vertical[k][j] - vertical[zero][j]);
                    d.im / std::f64::consts::PI
                })
                .collect();
            richardson(eps_schedule, &js)
        })
        .collect();

    // point masses from ε·Im m(t + iε)
    let mass: Vec<(f64, f64)> = probes
        .iter()
        .map(|&p| {
            let a: Vec<f64> = (0..ne)
                .map(|j| values[p + j].im * weights[p + j].re)
                .collect();
            let ratio = if ne >= 2 && a[ne - 2] > 0.0 {
                a[ne - 1] / a[ne - 2]
            } else {
                1.0
            };
            (richardson(eps_schedule, &a), ratio)
        })
        .collect();
    let spread = smoothed.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut atoms = Vec::new();
    let mut mu = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let (m_k, ratio) = mass[k];
        let neighbours = [k.checked_sub(1), Some(k + 1).filter(|&i| i < grid.len())]
            .into_iter()
            .flatten()
            .fold(0.0f64, |a, i| a.max(mass[i].0.abs()));
        if ratio > ATOM_RATIO
            && m_k > ATOM_CONCENTRATION * neighbours
            && m_k > 1e-10 * (1.0 + spread)
        {
            mu[k] = m_k;
            atoms.push(Atom {
                t: grid[k],
                mass: m_k,
            });
        }
    }

    let mut rho: Vec<f64> = (0..grid.len())
        .map(|k| smoothed[k] + 0.5 * mu[zero] - 0.5 * mu[k])
        .collect();
    rho[zero] = 0.0;
    let mut clamped = 0;
    for k in zero + 1..grid.len() {
        let floor = rho[k - 1] + mu[k - 1];
        if rho[k] < floor {
            rho[k] = floor;
            clamped += 1;
        }
    }
    for k in (0..zero).rev() {
        let ceiling = rho[k + 1] - mu[k];
        if rho[k] > ceiling {
            rho[k] = ceiling;
            clamped += 1;
        }
    }
    let rho = SpectralFunction::with_atoms(grid, rho, atoms)?;
    Ok(InversionReport {
        rho,
        clamped,
        linear_term,
        evaluations: nodes.len(),
    })
}

/// [`stieltjes_invert`] of the m-function of `h`.
pub fn invert_hamiltonian(
    h: &Hamiltonian,
    t_grid: &[f64],
    eps_schedule: &[f64],
    policy: &TruncationPolicy,
) -> Result<InversionReport> {
    stieltjes_invert(
        |z| m_function(h, z, policy).map(|s| s.value),
        t_grid,
        eps_schedule,
    )
}

/// Tabulates `model_rho` on a grid (0 is added when absent).
pub fn model_spectral_function(family: &ModelFamily, t_grid: &[f64]) -> Result<SpectralFunction> {
    check_inputs(t_grid, &DEFAULT_EPS)?;
    let mut grid = t_grid.to_vec();
    if !grid.contains(&0.0) {
        grid.push(0.0);
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    }
    let values = grid
        .iter()
        .map(|&t| model_rho(family, t))
        .collect::<Result<Vec<_>>>()?;
    let atoms = match family {
        ModelFamily::Step => vec![Atom { t: 0.0, mass: 1.0 }],
        _ => Vec::new(),
    };
    SpectralFunction::with_atoms(grid, values, atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TauberMode {
    /// `ρ(±t) ≈ t F(t) ρ̃(±1)`.
    Ratio,
    /// `ρ(t) − ρ(−t) ≈ t F(t) (ρ̃(1) − ρ̃(−1))`, for models with a jump at 0.
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauberRow {
    pub t: f64,
    /// `t F(t)`.
    pub scale: f64,
    pub plus: Option<f64>,
    pub minus: Option<f64>,
    pub jump: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauberianReport {
    pub mode: TauberMode,
    pub rows: Vec<TauberRow>,
    /// `F(t)/t` nonincreasing on the ladder.
    pub scale_condition: bool,
    pub tolerance: f64,
    pub passed: bool,
    pub issues: Vec<String>,
}

/// Compares `ρ` with the prediction `t F(t) ρ̃(±1)` of the model family on
/// the ladder. Only this direction is checked: agreement of ρ does not imply
/// asymptotics of m. Passes when the ratios at the top rung are within
/// `tolerance` of 1.
pub fn tauberian_compare<F: Fn(f64) -> f64>(
    rho: &SpectralFunction,
    scale: F,
    model: &ModelFamily,
    ladder: &[f64],
    tolerance: f64,
) -> Result<TauberianReport> {
    if ladder.is_empty()
        || ladder.iter().any(|&t| !(t > 0.0 && t.is_finite()))
        || ladder.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidParameter(
            "ladder must be positive and strictly increasing".into(),
        ));
    }
    let mode = match model {
        ModelFamily::Step => TauberMode::Jump,
        _ => TauberMode::Ratio,
    };
    let (up, down) = (model_rho(model, 1.0)?, model_rho(model, -1.0)?);
    let mut issues = Vec::new();
    let mut rows = Vec::with_capacity(ladder.len());
    let mut previous: Option<f64> = None;
    let mut scale_condition = true;
    for &t in ladder {
        let f = scale(t);
        if !(f > 0.0 && f.is_finite()) {
            issues.push(format!("scale function not positive at t = {t}: {f}"));
            scale_condition = false;
            continue;
        }
        if previous.is_some_and(|p| f / t > p * (1.0 + 1e-12)) {
            scale_condition = false;
        }
        previous = Some(f / t);
        let s = t * f;
        let ratio = |value: f64, model: f64| (model != 0.0).then(|| value / (s * model));
        let row = match mode {
            TauberMode::Ratio => TauberRow {
                t,
                scale: s,
                plus: ratio(rho.value(t), up),
                minus: ratio(rho.value(-t), down),
                jump: None,
            },
            TauberMode::Jump => TauberRow {
                t,
                scale: s,
                plus: None,
                minus: None,
                jump: ratio(rho.value(t) - rho.value(-t), up - down),
            },
        };
        rows.push(row);
    }
    if !scale_condition {
        issues.push(
            "F(t)/t is not nonincreasing on the ladder; the comparison has no theorem behind it"
                .into(),
        );
    }
    let passed = rows.last().is_some_and(|r| {
        let ratios: Vec<f64> = [r.plus, r.minus, r.jump].into_iter().flatten().collect();
        !ratios.is_empty() && ratios.iter().all(|q| (q - 1.0).abs() <= tolerance)
    });
    Ok(TauberianReport {
        mode,
        rows,
        scale_condition,
        tolerance,
        passed,
        issues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::model_m;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn constant_i_gives_linear_rho() {
        let r = stieltjes_invert(
            |_| Ok(Complex64::i()),
            &linspace(-5.0, 5.0, 11),
            &DEFAULT_EPS,
        )
        .unwrap();
        for (&t, &v) in r.rho.breakpoints().iter().zip(r.rho.values()) {
            assert!((v - t / PI).abs() < 1e-6, "{t}: {v}");
        }
        assert!(r.rho.atoms().is_empty() && r.clamped == 0);
    }

    #[test]
    fn pole_at_zero_is_a_unit_jump() {
        let r = stieltjes_invert(|z| Ok(-1.0 / z), &linspace(-3.0, 3.0, 13), &DEFAULT_EPS).unwrap();
        assert_eq!(r.rho.atoms().len(), 1);
        assert!((r.rho.atoms()[0].mass - 1.0).abs() < 1e-6);
        for (&t, &v) in r.rho.breakpoints().iter().zip(r.rho.values()) {
            let want = if t > 0.0 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-3, "{t}: {v}");
        }
        assert!((r.rho.value(0.1) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn off_grid_atom_is_counted_once() {
        // point mass 2 at t = 1.3 plus the Lebesgue part of m = i
        let m = |z: Complex64| Ok(Complex64::i() + 2.0 / (1.3 - z));
        let r = stieltjes_invert(m, &linspace(-2.0, 4.0, 7), &DEFAULT_EPS).unwrap();
        assert!(
            (r.rho.value(4.0) - (4.0 / PI + 2.0)).abs() < 1e-2,
            "{:?}",
            r.rho
        );
        assert!((r.rho.value(1.0) - 1.0 / PI).abs() < 2e-2);
    }

    fn pointwise_tolerance(family: &ModelFamily) -> f64 {
        match family {
            ModelFamily::Step => 1e-3,
            _ => 0.02,
        }
    }

    #[test]
    fn inversion_reproduces_model_families() {
        let families = [
            ModelFamily::ConstantZeta {
                a0: 0.3,
                b0: -0.2,
                c0: 0.7,
            },
            ModelFamily::alpha(-0.5),
            ModelFamily::alpha(0.0),
            ModelFamily::alpha(1.0),
            ModelFamily::Step,
            ModelFamily::DiracKappa { kappa: 0.25 },
            ModelFamily::DiracKappa { kappa: -0.25 },
        ];
        let grid = [-20.0, -5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0, 20.0];
        for f in &families {
            let r = stieltjes_invert(|z| model_m(f, z), &grid, &DEFAULT_EPS).unwrap();
            for &t in &grid {
                let (got, want) = (r.rho.value(t), model_rho(f, t).unwrap());
                let tol = pointwise_tolerance(f) * want.abs().max(0.05);
                assert!((got - want).abs() <= tol, "{f:?} at {t}: {got} vs {want}");
            }
            if matches!(f, ModelFamily::Alpha { .. }) {
                for &t in &grid[5..] {
                    let (p, n) = (r.rho.value(t), r.rho.value(-t));
                    assert!((p + n).abs() <= 0.02 * p.abs(), "{f:?} not odd at {t}");
                }
            }
        }
    }

    #[test]
    fn model_rho_examples() {
        assert!((model_rho(&ModelFamily::alpha(0.0), PI).unwrap() - 1.0).abs() < 1e-15);
        let empty = ModelFamily::ConstantZeta {
            a0: 0.0,
            b0: 0.0,
            c0: 1.0,
        };
        assert_eq!(model_rho(&empty, 3.0).unwrap(), 0.0);
        let k = model_rho(&ModelFamily::DiracKappa { kappa: 0.25 }, 1.0).unwrap();
        assert!((k - 2.0 / (3.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn table_rejects_bad_input() {
        assert!(SpectralFunction::new(vec![-1.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(SpectralFunction::new(vec![-1.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]).is_err());
        assert!(SpectralFunction::new(vec![0.0, 1.0], vec![0.1, 1.0]).is_err());
        assert!(stieltjes_invert(|_| Ok(Complex64::i()), &[1.0, 0.5], &DEFAULT_EPS).is_err());
    }

    #[test]
    fn sampler_errors_propagate() {
        let r = stieltjes_invert(
            |_| Err(Error::Inversion("boom".into())),
            &[1.0],
            &DEFAULT_EPS,
        );
        assert!(matches!(r, Err(Error::Inversion(_))));
    }

    #[test]
    fn tauberian_linear_is_exact() {
        let rho = model_spectral_function(&ModelFamily::alpha(0.0), &linspace(-100.0, 100.0, 21))
            .unwrap();
        let rep = tauberian_compare(
            &rho,
            |_| 1.0,
            &ModelFamily::alpha(0.0),
            &[10.0, 50.0, 100.0],
            1e-12,
        )
        .unwrap();
        assert!(rep.passed && rep.scale_condition);
        for row in &rep.rows {
            assert!(
                (row.plus.unwrap() - 1.0).abs() < 1e-12 && (row.minus.unwrap() - 1.0).abs() < 1e-12
            );
        }
    }

    #[test]
    fn tauberian_jump_form() {
        let r =
            stieltjes_invert(|z| Ok(-1.0 / z), &linspace(-10.0, 10.0, 21), &DEFAULT_EPS).unwrap();
        let rep = tauberian_compare(
            &r.rho,
            |t| 1.0 / t,
            &ModelFamily::Step,
            &[2.0, 5.0, 10.0],
            1e-3,
        )
        .unwrap();
        assert_eq!(rep.mode, TauberMode::Jump);
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn tauberian_reports_scale_violation() {
        let rho = model_spectral_function(&ModelFamily::alpha(0.0), &[1.0, 10.0]).unwrap();
        let rep = tauberian_compare(&rho, |t| t * t, &ModelFamily::alpha(0.0), &[1.0, 10.0], 0.1)
            .unwrap();
        assert!(!rep.scale_condition && !rep.issues.is_empty());
    }

    #[test]
    fn clamped_table_near_an_off_grid_pole() {
        let poles = [
            (4.011794463200848, 0.01),
            (-4.013659844992863, 1.9623272672270653),
        ];
        let (a, b) = (-0.7788047520375668, 0.14849477761180344);
        let m = move |z: Complex64| {
            let mut v = Complex64::new(a, 0.0) + b * z + (Complex64::i() * 0.5);
            for &(x, mu) in &poles {
                v += mu / (x - z);
            }
            Ok(v)
        };
        let r = stieltjes_invert(m, &linspace(-6.0, 6.0, 25), &DEFAULT_EPS).unwrap();
        assert!(r.clamped > 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn inversion_is_monotone(
            poles in prop::collection::vec((-5.0f64..5.0, 0.01f64..2.0), 0..5),
            a in -1.0f64..1.0,
            b in 0.0f64..1.0,
        ) {
            // Herglotz: a + bz + Σ μ/(x - z), plus a smooth background
            let m = move |z: Complex64| {
                let mut v = Complex64::new(a, 0.0) + b * z + (Complex64::i() * 0.5);
                for &(x, mu) in &poles {
                    v += mu / (x - z);
                }
                Ok(v)
            };
            let r = stieltjes_invert(m, &linspace(-6.0, 6.0, 25), &DEFAULT_EPS).unwrap();
            let v = r.rho.values();
            for k in 1..v.len() {
                prop_assert!(v[k] >= v[k - 1]);
            }
            prop_assert!((r.linear_term - b).abs() < 1e-6);
        }
    }
}
