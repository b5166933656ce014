//! Hamiltonians `H = [[a, b], [b, c]] ≥ 0` on `[0, L)` and their primitive
//! integrals `A, B, C`.
//!
//! Every form is evaluated through its primitives only. Densities are cell
//! averages of exact primitive differences, so integrable singularities at
//! `x = 0` are never evaluated pointwise.

pub(crate) mod json;
mod profile;

pub use json::{parse_descriptor, read_descriptor, to_descriptor_json};
pub use profile::Profile;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::invert_increasing;

/// Relative PSD slack accepted for measured data: `det ≥ -1e-12·(a+c)²`.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Constant entries `a, b, c` of `H` on a cell (densities, not primitives).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Cell {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Cell { a, b, c }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    /// PSD up to [`PSD_TOLERANCE`].
    pub fn is_psd(&self) -> bool {
        let slack = PSD_TOLERANCE * self.trace().powi(2);
        self.a >= -slack && self.c >= -slack && self.det() >= -slack
    }

    /// Projection onto the PSD cone for cells within tolerance.
    pub fn clamp_psd(self) -> Cell {
        let a = self.a.max(0.0);
        let c = self.c.max(0.0);
        let bound = (a * c).sqrt();
        Cell {
            a,
            b: self.b.clamp(-bound, bound),
            c,
        }
    }

    fn scale(self, k: f64) -> Cell {
        Cell {
            a: self.a * k,
            b: self.b * k,
            c: self.c * k,
        }
    }
}

/// `A(x), B(x), C(x)`: the integrals of the entries of `H` over `[0, x]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveIntegrals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PrimitiveIntegrals {
    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    fn diff(&self, earlier: &PrimitiveIntegrals) -> Cell {
        Cell {
            a: self.a - earlier.a,
            b: self.b - earlier.b,
            c: self.c - earlier.c,
        }
    }
}

/// Piecewise-constant cells: `cells[k]` covers `[breakpoints[k], breakpoints[k+1])`,
/// the last cell runs to the end of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTable {
    breakpoints: Vec<f64>,
    cells: Vec<Cell>,
    prefix: Vec<PrimitiveIntegrals>,
}

impl CellTable {
    pub fn new(breakpoints: Vec<f64>, cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if breakpoints.len() != cells.len() {
            return Err(Error::InvalidParameter(format!(
                "{} breakpoints for {} cells (breakpoints are left cell edges starting at 0)",
                breakpoints.len(),
                cells.len()
            )));
        }
        if breakpoints[0] != 0.0 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "breakpoints must start at 0 and increase".into(),
            ));
        }
        let mut prefix = Vec::with_capacity(cells.len());
        let mut acc = PrimitiveIntegrals {
            a: 0.0,
            b: 0.0,
            c: 0.0,
        };
        for k in 0..cells.len() {
            prefix.push(acc);
            if k + 1 < cells.len() {
                let w = breakpoints[k + 1] - breakpoints[k];
                acc.a += cells[k].a * w;
                acc.b += cells[k].b * w;
                acc.c += cells[k].c * w;
            }
        }
        Ok(CellTable {
            breakpoints,
            cells,
            prefix,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    fn locate(&self, x: f64) -> usize {
        self.breakpoints
            .partition_point(|&b| b <= x)
            .saturating_sub(1)
    }

    fn primitives(&self, x: f64) -> PrimitiveIntegrals {
        let k = self.locate(x);
        let w = x - self.breakpoints[k];
        let p = self.prefix[k];
        let cell = self.cells[k];
        PrimitiveIntegrals {
            a: p.a + cell.a * w,
            b: p.b + cell.b * w,
            c: p.c + cell.c * w,
        }
    }
}

/// Primitive integrals sampled on a grid, linearly interpolated; past the last
/// grid point the last cell's densities continue to the end of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    grid: Vec<f64>,
    values: Vec<PrimitiveIntegrals>,
}

impl SampledTable {
    pub fn new(grid: Vec<f64>, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if n < 2 || a.len() != n || b.len() != n || c.len() != n {
            return Err(Error::InvalidParameter(
                "sampled primitives need ≥ 2 rows of equal length".into(),
            ));
        }
        if grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "sample grid must start at 0 and increase".into(),
            ));
        }
        let values = (0..n)
            .map(|k| PrimitiveIntegrals {
                a: a[k] - a[0],
                b: b[k] - b[0],
                c: c[k] - c[0],
            })
            .collect();
        Ok(SampledTable { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[PrimitiveIntegrals] {
        &self.values
    }

    fn cell(&self, k: usize) -> Cell {
        let w = self.grid[k + 1] - self.grid[k];
        self.values[k + 1].diff(&self.values[k]).scale(1.0 / w)
    }

    fn primitives(&self, x: f64) -> PrimitiveIntegrals {
        let n = self.grid.len();
        let k = self
            .grid
            .partition_point(|&g| g <= x)
            .saturating_sub(1)
            .min(n - 2);
        let cell = self.cell(k);
        let w = x - self.grid[k];
        let p = self.values[k];
        PrimitiveIntegrals {
            a: p.a + cell.a * w,
            b: p.b + cell.b * w,
            c: p.c + cell.c * w,
        }
    }
}

/// Closed-form and tabulated descriptions of `H`.
#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    Constant {
        a0: f64,
        b0: f64,
        c0: f64,
    },
    /// `H_α = diag(p_α, p_{-α})` with `p_α = (1+α)x^α` for `α ≥ 0` and `1` otherwise.
    PowerLawAlpha {
        alpha: f64,
    },
    /// `diag(𝟙_{[1,∞)}, 𝟙_{[0,1)})`
    StepExample,
    /// Radial model `diag(x^{-2κ}/s², s² x^{2κ})` for `|κ| < 1/2`.
    DiagonalPower {
        kappa: f64,
        scale: f64,
    },
    PiecewiseConstant(CellTable),
    SampledPrimitive(SampledTable),
    /// Entries given by closed-form primitives.
    Profiles {
        a: Profile,
        b: Profile,
        c: Profile,
    },
    /// Canonical system of a Krein string with mass distribution `w`:
    /// `H(s) = diag(1 - x'(s), x'(s))`, `x` the inverse of `s(x) = x + w(x)`.
    KreinString {
        w: Profile,
    },
    /// `r₂·[[r₃ a(r₁x), b(r₁x)], [b(r₁x), c(r₁x)/r₃]]`
    Scaled {
        inner: Box<Hamiltonian>,
        r1: f64,
        r2: f64,
        r3: f64,
    },
    /// `-JHJ = [[c, -b], [-b, a]]`
    Flipped {
        inner: Box<Hamiltonian>,
    },
    /// `H(ξ(s)) / tr H(ξ(s))` with `ξ` the inverse of `η(x) = ∫₀ˣ tr H`.
    TraceNormalized {
        inner: Box<Hamiltonian>,
    },
}

/// `H` on `[0, length)`; `length` may be `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub length: f64,
    pub form: Form,
}

/// `C_κ = √π / (2^κ Γ(κ + 1/2))`
pub fn c_kappa(kappa: f64) -> f64 {
    PI.sqrt() / (2f64.powf(kappa) * statrs::function::gamma::gamma(kappa + 0.5))
}

impl Hamiltonian {
    pub fn new(length: f64, form: Form) -> Self {
        Hamiltonian { length, form }
    }

    pub fn constant(a0: f64, b0: f64, c0: f64) -> Self {
        Self::new(f64::INFINITY, Form::Constant { a0, b0, c0 })
    }

    pub fn power_law(alpha: f64) -> Self {
        Self::new(f64::INFINITY, Form::PowerLawAlpha { alpha })
    }

    pub fn step_example() -> Self {
        Self::new(f64::INFINITY, Form::StepExample)
    }

    /// Radial model with the normalization `scale = C_κ`.
    pub fn diagonal_power(kappa: f64) -> Result<Self> {
        if !(kappa.abs() < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "diagonal power needs |κ| < 1/2, got {kappa}"
            )));
        }
        Ok(Self::new(
            f64::INFINITY,
            Form::DiagonalPower {
                kappa,
                scale: c_kappa(kappa),
            },
        ))
    }

    pub fn piecewise(breakpoints: Vec<f64>, cells: Vec<Cell>, length: f64) -> Result<Self> {
        let table = CellTable::new(breakpoints, cells)?;
        if table.breakpoints.last().copied().unwrap_or(0.0) >= length {
            return Err(Error::InvalidParameter(
                "last breakpoint must lie inside the domain".into(),
            ));
        }
        Ok(Self::new(length, Form::PiecewiseConstant(table)))
    }

    pub fn sampled(
        grid: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        length: f64,
    ) -> Result<Self> {
        let table = SampledTable::new(grid, a, b, c)?;
        Ok(Self::new(length, Form::SampledPrimitive(table)))
    }

    pub fn profiles(a: Profile, b: Profile, c: Profile) -> Self {
        Self::new(f64::INFINITY, Form::Profiles { a, b, c })
    }

    /// Trace-normed diagonal Hamiltonian `diag(a, 1 - a)` with `A` given.
    pub fn trace_normed_diagonal(a: Profile) -> Self {
        let c = Profile::Complement {
            inner: Box::new(a.clone()),
        };
        Self::profiles(a, Profile::zero(), c)
    }

    pub fn flipped(self) -> Self {
        let length = self.length;
        Self::new(
            length,
            Form::Flipped {
                inner: Box::new(self),
            },
        )
    }

    pub fn trace_normalized(self) -> Self {
        Self::new(
            f64::INFINITY,
            Form::TraceNormalized {
                inner: Box::new(self),
            },
        )
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !(x >= 0.0) || x > self.length {
            return Err(Error::OutsideDomain {
                x,
                length: self.length,
            });
        }
        Ok(())
    }

    /// `A(x), B(x), C(x)`.
    pub fn primitive_integrals(&self, x: f64) -> Result<PrimitiveIntegrals> {
        self.check_domain(x)?;
        Ok(self.primitives_unchecked(x))
    }

    pub(crate) fn primitives_unchecked(&self, x: f64) -> PrimitiveIntegrals {
        let zero = PrimitiveIntegrals {
            a: 0.0,
            b: 0.0,
            c: 0.0,
        };
        if x <= 0.0 {
            return zero;
        }
        match &self.form {
            Form::Constant { a0, b0, c0 } => PrimitiveIntegrals {
                a: a0 * x,
                b: b0 * x,
                c: c0 * x,
            },
            Form::PowerLawAlpha { alpha } => {
                let p = x.powf(1.0 + alpha.abs());
                if *alpha >= 0.0 {
                    PrimitiveIntegrals { a: p, b: 0.0, c: x }
                } else {
                    PrimitiveIntegrals { a: x, b: 0.0, c: p }
                }
            }
            Form::StepExample => PrimitiveIntegrals {
                a: (x - 1.0).max(0.0),
                b: 0.0,
                c: x.min(1.0),
            },
            Form::DiagonalPower { kappa, scale } => {
                let s2 = scale * scale;
                PrimitiveIntegrals {
                    a: x.powf(1.0 - 2.0 * kappa) / ((1.0 - 2.0 * kappa) * s2),
                    b: 0.0,
                    c: s2 * x.powf(1.0 + 2.0 * kappa) / (1.0 + 2.0 * kappa),
                }
            }
            Form::PiecewiseConstant(table) => table.primitives(x),
            Form::SampledPrimitive(table) => table.primitives(x),
            Form::Profiles { a, b, c } => PrimitiveIntegrals {
                a: a.value(x),
                b: b.value(x),
                c: c.value(x),
            },
            Form::KreinString { w } => {
                let xs = krein_inverse(w, x);
                PrimitiveIntegrals {
                    a: x - xs,
                    b: 0.0,
                    c: xs,
                }
            }
            Form::Scaled { inner, r1, r2, r3 } => {
                let p = inner.primitives_unchecked(r1 * x);
                let k = r2 / r1;
                PrimitiveIntegrals {
                    a: k * r3 * p.a,
                    b: k * p.b,
                    c: k * p.c / r3,
                }
            }
            Form::Flipped { inner } => {
                let p = inner.primitives_unchecked(x);
                PrimitiveIntegrals {
                    a: p.c,
                    b: -p.b,
                    c: p.a,
                }
            }
            Form::TraceNormalized { inner } => {
                let xi = inner.trace_inverse(x);
                inner.primitives_unchecked(xi)
            }
        }
    }

    /// `η(x) = ∫₀ˣ tr H`.
    pub fn trace_integral(&self, x: f64) -> f64 {
        self.primitives_unchecked(x).trace()
    }

    /// Total trace integral over the domain (may be infinite).
    pub fn total_trace(&self) -> f64 {
        match &self.form {
            Form::TraceNormalized { inner } => inner.total_trace(),
            _ if self.length.is_finite() => self.trace_integral(self.length),
            _ => f64::INFINITY,
        }
    }

    /// `ξ = η⁻¹`, clamped to the domain.
    pub fn trace_inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if let Form::Constant { a0, c0, .. } = self.form {
            return (s / (a0 + c0)).min(self.length);
        }
        let total = self.total_trace();
        if s >= total {
            return self.length;
        }
        let guess = s.min(self.length * 0.5);
        invert_increasing(
            |x| self.trace_integral(x),
            s,
            guess.max(1e-300),
            self.length,
        )
        .unwrap_or(self.length)
    }

    /// Exact average of `H` over `[l, r]`.
    pub fn cell_average(&self, l: f64, r: f64) -> Cell {
        let pl = self.primitives_unchecked(l);
        let pr = self.primitives_unchecked(r);
        pr.diff(&pl).scale(1.0 / (r - l))
    }

    /// Points where the density of `H` is discontinuous, restricted to `[0, upto]`.
    pub fn breakpoints(&self, upto: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.form {
            Form::StepExample => out.push(1.0),
            Form::PiecewiseConstant(t) => {
                out.extend(t.breakpoints.iter().copied().take_while(|&b| b <= upto))
            }
            Form::SampledPrimitive(t) => {
                out.extend(t.grid.iter().copied().take_while(|&b| b <= upto))
            }
            Form::Profiles { a, b, c } => {
                a.breakpoints(&mut out);
                b.breakpoints(&mut out);
                c.breakpoints(&mut out);
            }
            Form::KreinString { w } => {
                let mut raw = Vec::new();
                w.breakpoints(&mut raw);
                out.extend(raw.into_iter().map(|x| x + w.value(x)));
            }
            Form::Scaled { inner, r1, .. } => {
                out.extend(inner.breakpoints(upto * r1).into_iter().map(|b| b / r1));
            }
            Form::Flipped { inner } => out.extend(inner.breakpoints(upto)),
            Form::TraceNormalized { inner } => {
                let upto_inner = inner.trace_inverse(upto);
                out.extend(
                    inner
                        .breakpoints(upto_inner)
                        .into_iter()
                        .map(|b| inner.trace_integral(b)),
                );
            }
            _ => {}
        }
        out.retain(|&b| b > 0.0 && b <= upto && b < self.length);
        out.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
        out.dedup();
        out
    }

    /// True when the density is constant between consecutive [`Self::breakpoints`].
    pub fn is_piecewise_constant(&self) -> bool {
        match &self.form {
            Form::Constant { .. }
            | Form::StepExample
            | Form::PiecewiseConstant(_)
            | Form::SampledPrimitive(_) => true,
            Form::PowerLawAlpha { alpha } => *alpha == 0.0,
            Form::Scaled { inner, .. }
            | Form::Flipped { inner }
            | Form::TraceNormalized { inner } => inner.is_piecewise_constant(),
            _ => false,
        }
    }

    /// `(x₀, H₀)` when `H = H₀` on all of `[x₀, ∞)`.
    pub fn constant_tail(&self) -> Option<(f64, Cell)> {
        if self.length.is_finite() {
            return None;
        }
        match &self.form {
            Form::Constant { a0, b0, c0 } => Some((0.0, Cell::new(*a0, *b0, *c0))),
            Form::PowerLawAlpha { alpha } if *alpha == 0.0 => Some((0.0, Cell::new(1.0, 0.0, 1.0))),
            Form::StepExample => Some((1.0, Cell::new(1.0, 0.0, 0.0))),
            Form::PiecewiseConstant(t) => Some((*t.breakpoints.last()?, *t.cells.last()?)),
            Form::Scaled { inner, r1, r2, r3 } => {
                let (x0, c) = inner.constant_tail()?;
                Some((x0 / r1, Cell::new(r2 * r3 * c.a, r2 * c.b, r2 * c.c / r3)))
            }
            Form::Flipped { inner } => {
                let (x0, c) = inner.constant_tail()?;
                Some((x0, Cell::new(c.c, -c.b, c.a)))
            }
            _ => None,
        }
    }

    /// Scaled Hamiltonian `H_r` on `[0, L/r₁)`; its m-function is `r₃·m((r₂/r₁)z)`.
    pub fn scaled(&self, r1: f64, r2: f64, r3: f64) -> Result<Hamiltonian> {
        if !(r1 > 0.0 && r2 > 0.0 && r3 > 0.0) {
            return Err(Error::InvalidParameter(
                "scaling factors must be positive".into(),
            ));
        }
        let length = self.length / r1;
        let map = |c: &Cell| Cell::new(r2 * r3 * c.a, r2 * c.b, r2 * c.c / r3);
        let form = match &self.form {
            Form::Constant { a0, b0, c0 } => {
                let c = map(&Cell::new(*a0, *b0, *c0));
                Form::Constant {
                    a0: c.a,
                    b0: c.b,
                    c0: c.c,
                }
            }
            Form::PiecewiseConstant(t) => Form::PiecewiseConstant(CellTable::new(
                t.breakpoints.iter().map(|b| b / r1).collect(),
                t.cells.iter().map(map).collect(),
            )?),
            _ => Form::Scaled {
                inner: Box::new(self.clone()),
                r1,
                r2,
                r3,
            },
        };
        Ok(Hamiltonian { length, form })
    }
}

/// Inverse of `s(x) = x + w(x)` for a continuous nondecreasing mass profile.
fn krein_inverse(w: &Profile, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    invert_increasing(|x| x + w.value(x), s, s * 0.5, f64::INFINITY).unwrap_or(s)
}

/// Status of the limit-point condition `∫₀ᴸ tr H = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitPoint {
    Divergent,
    /// Limit-circle: the trace integral is finite.
    Finite(f64),
    /// Tabulated or open-ended data where divergence cannot be decided.
    Unverifiable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub limit_point: LimitPoint,
    pub issues: Vec<String>,
}

impl Hamiltonian {
    /// Checks the structural hypotheses on `H`. Never fails; violations are listed.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let window = if self.length.is_finite() {
            self.length
        } else {
            1e3
        };
        for (l, r, cell) in self.validation_cells(window) {
            if !cell.is_psd() {
                issues.push(format!(
                    "not positive semidefinite on [{l:e}, {r:e}): a = {:e}, c = {:e}, det = {:e}",
                    cell.a,
                    cell.c,
                    cell.det()
                ));
            } else if cell.trace() <= 0.0 {
                issues.push(format!("H vanishes on [{l:e}, {r:e})"));
            }
            if issues.len() > 20 {
                break;
            }
        }
        if let Form::Scaled { r1, r2, r3, .. } = self.form {
            if !(r1 > 0.0 && r2 > 0.0 && r3 > 0.0) {
                issues.push("scaling factors must be positive".into());
            }
        }
        if let Form::DiagonalPower { kappa, .. } = self.form {
            if !(kappa.abs() < 0.5) {
                issues.push(format!("diagonal power needs |κ| < 1/2, got {kappa}"));
            }
        }
        if self.primitives_unchecked(window).c <= 0.0 {
            issues.push("b = c = 0 almost everywhere on the represented window".into());
        }
        let limit_point = self.limit_point();
        if let LimitPoint::Finite(t) = limit_point {
            issues.push(format!("limit-circle: trace integral finite ({t:e})"));
        }
        ValidationReport {
            valid: issues.is_empty(),
            limit_point,
            issues,
        }
    }

    fn limit_point(&self) -> LimitPoint {
        match &self.form {
            Form::TraceNormalized { inner } => inner.limit_point(),
            _ if self.length.is_finite() => LimitPoint::Finite(self.trace_integral(self.length)),
            Form::Constant { a0, c0, .. } => {
                if a0 + c0 > 0.0 {
                    LimitPoint::Divergent
                } else {
                    LimitPoint::Finite(0.0)
                }
            }
            Form::PowerLawAlpha { .. }
            | Form::StepExample
            | Form::DiagonalPower { .. }
            | Form::KreinString { .. } => LimitPoint::Divergent,
            Form::PiecewiseConstant(t) => {
                let last = t.cells.last().expect("nonempty");
                if last.trace() > 0.0 {
                    LimitPoint::Divergent
                } else {
                    LimitPoint::Finite(
                        t.primitives(*t.breakpoints.last().expect("nonempty"))
                            .trace(),
                    )
                }
            }
            Form::Scaled { inner, .. } | Form::Flipped { inner } => inner.limit_point(),
            Form::SampledPrimitive(_) | Form::Profiles { .. } => LimitPoint::Unverifiable,
        }
    }

    /// Cells used for validation: exact cells for tabulated forms, a geometric
    /// sample for closed forms.
    fn validation_cells(&self, window: f64) -> Vec<(f64, f64, Cell)> {
        let mut nodes: Vec<f64> = match &self.form {
            Form::PiecewiseConstant(t) => t.breakpoints.clone(),
            Form::SampledPrimitive(t) => t.grid.clone(),
            _ => {
                let mut v = vec![0.0];
                v.extend((0..=400).map(|k| window * 10f64.powf(-12.0 + 12.0 * k as f64 / 400.0)));
                v
            }
        };
        match &self.form {
            Form::PiecewiseConstant(t) => {
                return t
                    .cells
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let r = t.breakpoints.get(k + 1).copied().unwrap_or(self.length);
                        (t.breakpoints[k], r, *c)
                    })
                    .collect()
            }
            Form::SampledPrimitive(t) => {
                return (0..t.grid.len() - 1)
                    .map(|k| (t.grid[k], t.grid[k + 1], t.cell(k)))
                    .collect()
            }
            _ => {}
        }
        nodes.retain(|&x| x <= self.length);
        nodes.dedup();
        nodes
            .windows(2)
            .map(|w| (w[0], w[1], self.cell_average(w[0], w[1])))
            .collect()
    }
}

/// Breakpoint placement for [`Hamiltonian::discretize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshPolicy {
    /// `cells` equal cells on `[0, end]`.
    Uniform { cells: usize, end: f64 },
    /// `[0, end·ratio^{-(cells-1)}]` followed by `cells - 1` geometric cells up to `end`.
    Geometric { cells: usize, end: f64, ratio: f64 },
}

impl MeshPolicy {
    pub fn nodes(&self) -> Result<Vec<f64>> {
        match *self {
            MeshPolicy::Uniform { cells, end } => {
                if cells == 0 || !(end > 0.0) {
                    return Err(Error::EmptyMesh);
                }
                Ok((0..=cells).map(|k| end * k as f64 / cells as f64).collect())
            }
            MeshPolicy::Geometric { cells, end, ratio } => {
                if cells == 0 || !(end > 0.0) || !(ratio > 1.0) {
                    return Err(Error::EmptyMesh);
                }
                let mut v = vec![0.0];
                v.extend((0..cells).map(|k| end * ratio.powi(k as i32 + 1 - cells as i32)));
                Ok(v)
            }
        }
    }
}

impl Hamiltonian {
    /// Piecewise-constant Hamiltonian whose primitive integrals agree with
    /// `self` at every mesh node. On an infinite domain the last mesh cell's
    /// average continues to infinity.
    pub fn discretize(&self, policy: &MeshPolicy) -> Result<Hamiltonian> {
        let mut nodes = policy.nodes()?;
        nodes.retain(|&x| x <= self.length);
        if nodes.len() < 2 {
            return Err(Error::EmptyMesh);
        }
        let prims: Vec<PrimitiveIntegrals> = nodes
            .iter()
            .map(|&x| self.primitives_unchecked(x))
            .collect();
        let mut cells: Vec<Cell> = prims
            .windows(2)
            .zip(nodes.windows(2))
            .map(|(p, x)| p[1].diff(&p[0]).scale(1.0 / (x[1] - x[0])))
            .collect();
        for c in &cells {
            assert!(
                c.is_psd(),
                "cell average of a PSD Hamiltonian is PSD: {c:?}"
            );
        }
        let end = *nodes.last().expect("nonempty");
        let length = if end >= self.length { end } else { self.length };
        if end >= self.length {
            nodes.pop();
        } else if self.length.is_infinite() {
            cells.push(*cells.last().expect("nonempty"));
        } else {
            cells.push(self.cell_average(end, self.length));
        }
        let cells = cells.into_iter().map(Cell::clamp_psd).collect();
        Ok(Hamiltonian::new(
            length,
            Form::PiecewiseConstant(CellTable::new(nodes, cells)?),
        ))
    }
}
