//! Krein strings and generalized indefinite strings, and their canonical systems.

use std::path::Path;

use serde_json::{Map, Value};

use super::{Relation, Transformed};
use crate::error::{Error, Result};
use crate::hamiltonian::json::{floats, length_from, profile};
use crate::hamiltonian::{Cell, Form, Hamiltonian, Profile};

/// Mass distribution `w(x) = ω([0, x))` of a Krein string.
#[derive(Debug, Clone, PartialEq)]
pub enum Mass {
    /// Continuous closed form (domain `[0, ∞)`).
    Profile(Profile),
    /// Points `(x, w)` interpolated linearly; a repeated `x` is a point mass.
    /// Beyond the last point the string carries no mass.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StringData {
    pub length: f64,
    pub w: Mass,
}

impl StringData {
    pub fn profile(w: Profile) -> Self {
        StringData {
            length: f64::INFINITY,
            w: Mass::Profile(w),
        }
    }

    pub fn table(points: Vec<(f64, f64)>, length: f64) -> Result<Self> {
        let s = StringData {
            length,
            w: Mass::Table(points),
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "string length must be positive, got {}",
                self.length
            )));
        }
        let Mass::Table(p) = &self.w else {
            return Ok(());
        };
        if p.first() != Some(&(0.0, 0.0)) {
            return Err(Error::InvalidParameter(
                "mass table must start at (0, 0)".into(),
            ));
        }
        for w in p.windows(2) {
            if !(w[1].0 >= w[0].0 && w[1].1 >= w[0].1) || w[1] == w[0] {
                return Err(Error::InvalidParameter(format!(
                    "mass table not increasing at {:?}",
                    w[1]
                )));
            }
        }
        if p.iter()
            .any(|&(x, w)| !x.is_finite() || !w.is_finite() || x >= self.length)
        {
            return Err(Error::InvalidParameter(
                "mass table entries must be finite and inside [0, L)".into(),
            ));
        }
        Ok(())
    }

    /// `w(x) = ω([0, x))`, left-continuous at point masses.
    pub fn mass(&self, x: f64) -> f64 {
        match &self.w {
            Mass::Profile(p) => p.value(x),
            Mass::Table(p) => {
                let k = p.partition_point(|q| q.0 < x);
                match k {
                    0 => 0.0,
                    k if k == p.len() => p[k - 1].1,
                    k => {
                        p[k - 1].1
                            + (x - p[k - 1].0) / (p[k].0 - p[k - 1].0) * (p[k].1 - p[k - 1].1)
                    }
                }
            }
        }
    }

    /// Conditions under which the reduction is outside the supported setting.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.length.is_finite() {
            out.push(format!(
                "finite length {} with finite mass: the Dirichlet condition at L is not modelled; \
                 the canonical system continues with diag(1, 0)",
                self.length
            ));
        }
        out
    }
}

/// Canonical system `H(s) = diag(1 - x'(s), x'(s))` of a Krein string, with
/// `x` the min-inverse of `s(x) = x + w(x)`. Point masses become cells with
/// `x' = 0`; after `s(L-)` the inverse stays at `L`.
pub fn string_to_canonical(data: &StringData) -> Result<Transformed> {
    data.check()?;
    let hamiltonian = match &data.w {
        Mass::Profile(w) => {
            if data.length.is_finite() {
                return Err(Error::InvalidParameter(
                    "closed-form masses need L = ∞; tabulate w instead".into(),
                ));
            }
            match w {
                // s = (1 + k)x, so x' is constant
                Profile::Linear { slope } => {
                    Hamiltonian::constant(slope / (1.0 + slope), 0.0, 1.0 / (1.0 + slope))
                }
                _ => Hamiltonian::new(f64::INFINITY, Form::KreinString { w: w.clone() }),
            }
        }
        Mass::Table(points) => {
            let mut bps = Vec::new();
            let mut cells = Vec::new();
            let mut s = 0.0;
            let mut segments: Vec<(f64, f64)> = points
                .windows(2)
                .map(|w| (w[1].0 - w[0].0, w[1].1 - w[0].1))
                .collect();
            let last = points[points.len() - 1];
            if data.length.is_finite() {
                segments.push((data.length - last.0, 0.0));
            }
            for (dx, dw) in segments {
                if dx + dw > 0.0 {
                    bps.push(s);
                    let xp = (dx / (dx + dw)).clamp(0.0, 1.0);
                    cells.push(Cell::new(1.0 - xp, 0.0, xp));
                    s += dx + dw;
                }
            }
            bps.push(s);
            // past s(L-) the inverse is frozen at L; an infinite massless tail has x' = 1
            cells.push(if data.length.is_finite() {
                Cell::new(1.0, 0.0, 0.0)
            } else {
                Cell::new(0.0, 0.0, 1.0)
            });
            merge_and_build(bps, cells)?
        }
    };
    Ok(Transformed {
        hamiltonian,
        relation: Relation::KreinString,
    })
}

/// Drops zero-width cells and merges equal neighbours.
fn merge_and_build(bps: Vec<f64>, cells: Vec<Cell>) -> Result<Hamiltonian> {
    let mut b2: Vec<f64> = Vec::with_capacity(bps.len());
    let mut c2: Vec<Cell> = Vec::with_capacity(cells.len());
    for (b, c) in bps.into_iter().zip(cells) {
        if c2.last() == Some(&c) {
            continue;
        }
        if b2.last() == Some(&b) {
            *c2.last_mut().expect("paired") = c;
            continue;
        }
        b2.push(b);
        c2.push(c);
    }
    Hamiltonian::piecewise(b2, c2, f64::INFINITY)
}

/// Generalized indefinite string: `w` piecewise constant on `grid` (the last
/// value continues to `L`), `υ` given by point masses and a piecewise-constant
/// density on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndefiniteStringData {
    pub length: f64,
    pub grid: Vec<f64>,
    pub w: Vec<f64>,
    pub atoms: Vec<(f64, f64)>,
    pub density: Vec<f64>,
}

impl IndefiniteStringData {
    pub fn new(
        length: f64,
        grid: Vec<f64>,
        w: Vec<f64>,
        atoms: Vec<(f64, f64)>,
        density: Vec<f64>,
    ) -> Result<Self> {
        let density = if density.is_empty() {
            vec![0.0; grid.len()]
        } else {
            density
        };
        let d = IndefiniteStringData {
            length,
            grid,
            w,
            atoms,
            density,
        };
        if !(d.length > 0.0) || d.grid.is_empty() || d.grid[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "grid must start at 0 on a positive length".into(),
            ));
        }
        if d.grid.windows(2).any(|g| !(g[1] > g[0]))
            || d.grid.last().is_some_and(|&g| g >= d.length)
        {
            return Err(Error::InvalidParameter(
                "grid must increase inside [0, L)".into(),
            ));
        }
        if d.w.len() != d.grid.len() || d.density.len() != d.grid.len() {
            return Err(Error::InvalidParameter(
                "w and υ density need one value per grid cell".into(),
            ));
        }
        if d.w.iter().chain(&d.density).any(|v| !v.is_finite())
            || d.density.iter().any(|&v| v < 0.0)
        {
            return Err(Error::InvalidParameter(
                "w must be finite and the υ density nonnegative".into(),
            ));
        }
        if d.atoms
            .iter()
            .any(|&(x, m)| !(x >= 0.0 && x < d.length && m > 0.0))
        {
            return Err(Error::InvalidParameter(
                "υ atoms need positions in [0, L) and positive masses".into(),
            ));
        }
        Ok(d)
    }

    /// `w ≡ c` and `υ = 0` on `[0, ∞)`.
    pub fn constant(c: f64) -> Self {
        Self::new(f64::INFINITY, vec![0.0], vec![c], Vec::new(), Vec::new())
            .expect("valid constant string")
    }
}

const PSD_TOL: f64 = 1e-12;

/// Canonical system of a generalized indefinite string, with
/// `s(x) = x + ∫₀ˣ w² + υ([0, x))` and its sup-inverse `x(s)`:
/// `H = [[1 - x', x' w(x)], [x' w(x), x']]`. The Weyl function of the string
/// is `M(z) = -m(-z)`.
pub fn indefinite_string_to_canonical(data: &IndefiniteStringData) -> Result<Transformed> {
    let mut atoms = data.atoms.clone();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let mut bps = Vec::new();
    let mut cells = Vec::new();
    let mut s = 0.0;
    let mut next_atom = 0;
    let n = data.grid.len();
    for k in 0..n {
        let (lo, hi) = (
            data.grid[k],
            if k + 1 < n {
                data.grid[k + 1]
            } else {
                data.length
            },
        );
        let rate = 1.0 + data.w[k] * data.w[k] + data.density[k];
        let xp = 1.0 / rate;
        let cell = Cell::new(
            xp * (data.w[k] * data.w[k] + data.density[k]),
            xp * data.w[k],
            xp,
        );
        if cell.det() < -PSD_TOL {
            return Err(Error::NotPsd(format!("cell {k}: {cell:?}")));
        }
        let mut x = lo;
        loop {
            // point masses at the current position come first (υ([0, x)) jumps right after x)
            while next_atom < atoms.len() && atoms[next_atom].0 <= x {
                bps.push(s);
                cells.push(Cell::new(1.0, 0.0, 0.0));
                s += atoms[next_atom].1;
                next_atom += 1;
            }
            let stop = if next_atom < atoms.len() && atoms[next_atom].0 < hi {
                atoms[next_atom].0
            } else {
                hi
            };
            if stop > x {
                bps.push(s);
                cells.push(cell);
                s += rate * (stop - x);
            }
            x = stop;
            if x >= hi {
                break;
            }
        }
    }
    if data.length.is_finite() {
        bps.push(s);
        cells.push(Cell::new(1.0, 0.0, 0.0));
    }
    let hamiltonian = merge_and_build(bps, cells)?;
    Ok(Transformed {
        hamiltonian,
        relation: Relation::IndefiniteString,
    })
}

fn table_from(obj: &Map<String, Value>, key: &str, base: Option<&Path>) -> Result<Vec<Vec<f64>>> {
    let v = obj
        .get(key)
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse(format!("missing '{key}'")))?;
    if let Some(file) = v.get("csv").and_then(Value::as_str) {
        let path = base.map(|b| b.join(file)).unwrap_or_else(|| file.into());
        let mut rdr = csv::Reader::from_path(path)?;
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for row in rdr.records() {
            let row = row?;
            for (i, field) in row.iter().enumerate() {
                if cols.len() <= i {
                    cols.push(Vec::new());
                }
                cols[i].push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(e.to_string()))?,
                );
            }
        }
        return Ok(cols);
    }
    Err(Error::Parse(format!(
        "'{key}' needs inline arrays or a csv reference"
    )))
}

/// A parsed string descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum StringDescriptor {
    Krein(StringData),
    Indefinite(IndefiniteStringData),
}

impl StringDescriptor {
    pub fn to_canonical(&self) -> Result<Transformed> {
        match self {
            StringDescriptor::Krein(s) => string_to_canonical(s),
            StringDescriptor::Indefinite(s) => indefinite_string_to_canonical(s),
        }
    }
}

/// Parses `{"string": "krein" | "indefinite", "L": .., "w": .., "upsilon": ..}`.
///
/// Krein `w` is a profile object, inline `{"x": [..], "w": [..]}` or
/// `{"csv": file}` with columns `x,w`. Indefinite `w` is `{"x": [..],
/// "values": [..]}` or a csv with columns `x,w`; `upsilon` holds optional
/// `"atoms": [[x, mass], ..]` and `"density": [..]`.
pub fn parse_string_descriptor(text: &str, base: Option<&Path>) -> Result<StringDescriptor> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("string descriptor must be an object".into()))?;
    let kind = obj
        .get("string")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("missing 'string'".into()))?;
    let length = length_from(obj.get("L"))?;
    let w = obj
        .get("w")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse("missing 'w'".into()))?;
    match kind {
        "krein" => {
            if w.contains_key("kind") {
                let mut data = StringData::profile(profile(obj, "w")?);
                data.length = length;
                return Ok(StringDescriptor::Krein(data));
            }
            let cols = if w.contains_key("csv") {
                table_from(obj, "w", base)?
            } else {
                vec![floats(w, "x")?, floats(w, "w")?]
            };
            if cols.len() < 2 || cols[0].len() != cols[1].len() {
                return Err(Error::Parse(
                    "mass table needs columns x,w of equal length".into(),
                ));
            }
            let points = cols[0]
                .iter()
                .copied()
                .zip(cols[1].iter().copied())
                .collect();
            Ok(StringDescriptor::Krein(StringData::table(points, length)?))
        }
        "indefinite" => {
            let cols = if w.contains_key("csv") {
                table_from(obj, "w", base)?
            } else {
                vec![floats(w, "x")?, floats(w, "values")?]
            };
            if cols.len() < 2 {
                return Err(Error::Parse("w table needs columns x,w".into()));
            }
            let empty = Map::new();
            let ups = obj
                .get("upsilon")
                .and_then(Value::as_object)
                .unwrap_or(&empty);
            let atoms = match ups.get("atoms") {
                None => Vec::new(),
                Some(a) => serde_json::from_value::<Vec<(f64, f64)>>(a.clone())?,
            };
            let density = if ups.contains_key("density") {
                floats(ups, "density")?
            } else {
                Vec::new()
            };
            let data = IndefiniteStringData::new(
                length,
                cols[0].clone(),
                cols[1].clone(),
                atoms,
                density,
            )?;
            Ok(StringDescriptor::Indefinite(data))
        }
        other => Err(Error::Parse(format!("unknown string kind '{other}'"))),
    }
}
