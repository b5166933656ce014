use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{f_scale, minus_power, rv_index_estimate, RvIndex, Side};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, MeshPolicy, PrimitiveIntegrals};
use crate::transforms::{
    gauge_transform, indefinite_string_to_canonical, indefinite_weyl_function, krein_weyl_function,
    string_to_canonical, IndefiniteStringData, StringData,
};
use crate::weyl::{
    d_nu, m_function, m_function_with_potential, model_m, ModelFamily, TruncationPolicy,
};

pub const DEFAULT_TOLERANCE: f64 = 0.05;

/// Compact probe set in the upper half-plane.
pub const PROBES: [Complex64; 4] = [
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, 2.0),
    Complex64::new(1.0, 1.0),
    Complex64::new(-1.0, 2.0),
];

/// Accepted deviation of an estimated index from the claimed one, and of
/// the two offset estimates from each other.
const INDEX_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    ConstLimit,
    AlphaPositive,
    AlphaNegative,
    Rapid,
    GeneralQ,
    String,
    IndefiniteString,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::ConstLimit,
        TheoremId::AlphaPositive,
        TheoremId::AlphaNegative,
        TheoremId::Rapid,
        TheoremId::GeneralQ,
        TheoremId::String,
        TheoremId::IndefiniteString,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::ConstLimit => "const_limit",
            TheoremId::AlphaPositive => "alpha_positive",
            TheoremId::AlphaNegative => "alpha_negative",
            TheoremId::Rapid => "rapid",
            TheoremId::GeneralQ => "general_Q",
            TheoremId::String => "string",
            TheoremId::IndefiniteString => "indefinite_string",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem id '{s}'")))
    }
}

/// Diagonal entry whose primitive is rapidly varying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entry {
    A,
    C,
}

#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Canonical(Hamiltonian),
    /// `JY' + QY = zHY`; the mesh drives the gauge transform used for the
    /// hypothesis check.
    WithPotential {
        h: Hamiltonian,
        q: Hamiltonian,
        mesh: MeshPolicy,
    },
    Krein(StringData),
    Indefinite(IndefiniteStringData),
}

/// The limit object asserted by a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "snake_case")]
pub enum Claim {
    /// `(1/η(x)) ∫₀ˣ H → [[a0, b0], [b0, c0]]`.
    Limit {
        a0: f64,
        b0: f64,
        c0: f64,
    },
    /// Index `α`: `A ∈ RV_{1+α}` for `α > 0`, `C ∈ RV_{1+|α|}` for `α < 0`,
    /// `w ∈ RV_{1+α}` for strings.
    Index {
        alpha: f64,
    },
    Rapid {
        entry: Entry,
    },
    /// `s(x) = D^{(2+α)/(1+α)} x^{1/(1+α)}(1+o(1))` for an indefinite string.
    IndefinitePower {
        alpha: f64,
        d: f64,
    },
}

impl Claim {
    fn zeta0(a0: f64, b0: f64, c0: f64) -> Complex64 {
        let h0 = (a0 * c0 - b0 * b0).max(0.0).sqrt();
        Complex64::new(-b0, h0) / c0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub system: System,
    pub claim: Claim,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRow {
    pub r: f64,
    pub mu: Complex64,
    /// Raw value at `rμ`: `m`, `m_D` or `M` depending on the system.
    pub raw: Option<Complex64>,
    /// Normalized quantity compared against `target`.
    pub normalized: Option<Complex64>,
    pub target: Complex64,
    /// `|normalized - target| / |target|`.
    pub deviation: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub x_ladder: Vec<f64>,
    pub values: Vec<f64>,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Some probe did not converge.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem_id: TheoremId,
    pub scenario: String,
    pub claim: Claim,
    pub ladder: Vec<f64>,
    pub probes: Vec<Complex64>,
    /// Scale function per rung (`f`, `g` or the string scale); 1 when unused.
    pub scale: Vec<f64>,
    /// Rows ordered by `(r, μ)`.
    pub rows: Vec<VerificationRow>,
    /// Largest deviation over the probes, per rung.
    pub rung_deviation: Vec<f64>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// [`verify_with`] with the sweep truncation policy.
pub fn verify(
    theorem: TheoremId,
    scenario: &Scenario,
    ladder: &[f64],
    tol: f64,
) -> Result<VerificationReport> {
    verify_with(theorem, scenario, ladder, tol, &TruncationPolicy::sweep())
}

type Sampler<'a> = Box<dyn Fn(Complex64) -> Result<Complex64> + Sync + 'a>;
type Normalizer = Box<dyn Fn(Complex64, f64, Complex64, f64) -> Complex64 + Sync>;

struct Plan<'a> {
    sample: Sampler<'a>,
    scale: Vec<f64>,
    /// `(raw, r, μ, scale) ↦ normalized`
    normalize: Normalizer,
    target: Box<dyn Fn(Complex64) -> Complex64 + Sync>,
    hypotheses: Vec<HypothesisCheck>,
    notes: Vec<String>,
}

/// Primitives of the trace-normed reparametrization at `s`.
fn tn_primitives(h: &Hamiltonian, s: f64) -> PrimitiveIntegrals {
    h.primitives_unchecked(h.trace_inverse(s))
}

fn entry_of(p: &PrimitiveIntegrals, e: Entry) -> f64 {
    match e {
        Entry::A => p.a,
        Entry::C => p.c,
    }
}

fn limit_check(
    h: &Hamiltonian,
    (a0, b0, c0): (f64, f64, f64),
    ladder: &[f64],
    tol: f64,
) -> HypothesisCheck {
    let xs: Vec<f64> = ladder.iter().map(|r| 1.0 / r).collect();
    let values: Vec<f64> = xs
        .iter()
        .map(|&s| {
            let p = h.primitives_unchecked(h.trace_inverse(s));
            let eta = p.trace();
            if !(eta > 0.0) {
                return f64::INFINITY;
            }
            (p.a / eta - a0)
                .abs()
                .max((p.b / eta - b0).abs())
                .max((p.c / eta - c0).abs())
        })
        .collect();
    let last = values[values.len() - 1];
    let holds = last <= tol && last <= values[0].max(0.5 * tol);
    HypothesisCheck {
        name: "cesaro_limit".into(),
        detail: format!(
            "max |(1/η)∫H - H₀| = {last:.3e} at η = {:.3e}",
            xs[xs.len() - 1]
        ),
        x_ladder: xs,
        values,
        holds,
    }
}

fn index_check<P: Fn(f64) -> f64>(name: &str, p: P, expected: f64, xs: &[f64]) -> HypothesisCheck {
    match rv_index_estimate(&p, Side::AtZero, xs) {
        Ok(profile) => {
            let (holds, detail) = match profile.index {
                RvIndex::Finite(a) => (
                    (a - expected).abs() <= INDEX_TOLERANCE && profile.stability <= INDEX_TOLERANCE,
                    format!(
                        "index {a:.4} (claimed {expected:.4}), offset stability {:.3e}",
                        profile.stability
                    ),
                ),
                RvIndex::Rapid => (
                    false,
                    format!("rapidly varying, claimed index {expected:.4}"),
                ),
            };
            HypothesisCheck {
                name: name.into(),
                x_ladder: xs.to_vec(),
                values: profile.local_slopes,
                holds,
                detail,
            }
        }
        Err(e) => HypothesisCheck {
            name: name.into(),
            x_ladder: xs.to_vec(),
            values: vec![],
            holds: false,
            detail: e.to_string(),
        },
    }
}

fn rapid_check<P: Fn(f64) -> f64>(name: &str, p: P, xs: &[f64]) -> HypothesisCheck {
    match rv_index_estimate(&p, Side::AtZero, xs) {
        Ok(profile) => {
            let holds = profile.index == RvIndex::Rapid;
            let detail = match profile.index {
                RvIndex::Rapid => format!("local slopes diverge (spread {:.3e})", profile.spread),
                RvIndex::Finite(a) => format!("finite index {a:.4}, spread {:.3e}", profile.spread),
            };
            HypothesisCheck {
                name: name.into(),
                x_ladder: xs.to_vec(),
                values: profile.local_slopes,
                holds,
                detail,
            }
        }
        Err(e) => HypothesisCheck {
            name: name.into(),
            x_ladder: xs.to_vec(),
            values: vec![],
            holds: false,
            detail: e.to_string(),
        },
    }
}

/// `|B| / √(x P)` must decay along the ladder.
fn offdiag_check(h: &Hamiltonian, e: Entry, xs: &[f64]) -> HypothesisCheck {
    let values: Vec<f64> = xs
        .iter()
        .map(|&s| {
            let p = tn_primitives(h, s);
            let d = (s * entry_of(&p, e)).sqrt();
            if p.b == 0.0 {
                0.0
            } else if d > 0.0 {
                p.b.abs() / d
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let (first, last) = (values[0], values[values.len() - 1]);
    let holds = last <= 1e-8 || last <= 0.5 * first;
    HypothesisCheck {
        name: "offdiagonal_decay".into(),
        detail: format!("|B|/√(x·P) from {first:.3e} to {last:.3e}"),
        x_ladder: xs.to_vec(),
        values,
        holds,
    }
}

fn alpha_family(alpha: f64) -> ModelFamily {
    ModelFamily::Alpha { alpha, d: 1.0 }
}

fn model(alpha: f64, z: Complex64) -> Complex64 {
    model_m(&alpha_family(alpha), z).expect("finite α and nonreal probe")
}

fn mismatch(theorem: TheoremId, claim: &Claim) -> Error {
    Error::InvalidParameter(format!(
        "theorem {theorem} does not accept the scenario's system with claim {claim:?}"
    ))
}

fn plan<'a>(
    theorem: TheoremId,
    scenario: &'a Scenario,
    ladder: &[f64],
    tol: f64,
    policy: &'a TruncationPolicy,
) -> Result<Plan<'a>> {
    let claim = scenario.claim;
    let ones = vec![1.0; ladder.len()];
    let sector_note =
        "uniformity is probed on a compact set; the constant-limit statement is for closed sectors"
            .to_string();
    let canonical_sampler = |h: &'a Hamiltonian| -> Sampler<'a> {
        Box::new(move |z| Ok(m_function(h, z, policy)?.value))
    };
    match (theorem, &scenario.system, claim) {
        (TheoremId::ConstLimit, System::Canonical(h), Claim::Limit { a0, b0, c0 }) => {
            let zeta = Claim::zeta0(a0, b0, c0);
            Ok(Plan {
                sample: canonical_sampler(h),
                scale: ones,
                normalize: Box::new(|raw, _, _, _| raw),
                target: Box::new(move |_| zeta),
                hypotheses: vec![limit_check(h, (a0, b0, c0), ladder, tol)],
                notes: vec![sector_note],
            })
        }
        (
            TheoremId::GeneralQ,
            System::WithPotential { h, q, mesh },
            Claim::Limit { a0, b0, c0 },
        ) => {
            let zeta = Claim::zeta0(a0, b0, c0);
            let gauged = gauge_transform(h, q, mesh)?.transformed.hamiltonian;
            Ok(Plan {
                sample: Box::new(move |z| Ok(m_function_with_potential(h, q, z, policy)?.value)),
                scale: ones,
                normalize: Box::new(|raw, _, _, _| raw),
                target: Box::new(move |_| zeta),
                hypotheses: vec![limit_check(&gauged, (a0, b0, c0), ladder, tol)],
                notes: vec![
                    sector_note,
                    "hypothesis checked on the gauge-transformed Hamiltonian".into(),
                ],
            })
        }
        (
            TheoremId::AlphaPositive | TheoremId::AlphaNegative,
            System::Canonical(h),
            Claim::Index { alpha },
        ) => {
            let positive = theorem == TheoremId::AlphaPositive;
            if positive != (alpha > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{theorem} needs a claimed α of matching sign, got {alpha}"
                )));
            }
            let entry = if positive { Entry::A } else { Entry::C };
            let scale_fn = f_scale(|s: f64| entry_of(&tn_primitives(h, s), entry));
            let scale = scale_fn.samples(ladder)?;
            let xs: Vec<f64> = scale.iter().map(|s| s.value / s.r).collect();
            let name = if positive {
                "A_regular_variation"
            } else {
                "C_regular_variation"
            };
            let hypotheses = vec![
                index_check(
                    name,
                    |s| entry_of(&tn_primitives(h, s), entry),
                    1.0 + alpha.abs(),
                    &xs,
                ),
                offdiag_check(h, entry, &xs),
            ];
            let normalize: Normalizer = if positive {
                Box::new(|raw, _, _, f| raw * f)
            } else {
                Box::new(|raw, _, _, g| raw / g)
            };
            Ok(Plan {
                sample: canonical_sampler(h),
                scale: scale.iter().map(|s| s.value).collect(),
                normalize,
                target: Box::new(move |mu| model(alpha, mu)),
                hypotheses,
                notes: vec![],
            })
        }
        (TheoremId::Rapid, System::Canonical(h), Claim::Rapid { entry }) => {
            let scale_fn = f_scale(|s: f64| entry_of(&tn_primitives(h, s), entry));
            let scale = scale_fn.samples(ladder)?;
            let xs: Vec<f64> = scale.iter().map(|s| s.value / s.r).collect();
            let name = if entry == Entry::A {
                "A_rapid_variation"
            } else {
                "C_rapid_variation"
            };
            let (normalize, target): (Normalizer, Complex64) = match entry {
                Entry::A => (
                    Box::new(|raw, _, mu, f| raw * mu * f),
                    Complex64::new(-1.0, 0.0),
                ),
                Entry::C => (
                    Box::new(|raw, _, mu, g| raw / (mu * g)),
                    Complex64::new(1.0, 0.0),
                ),
            };
            Ok(Plan {
                sample: canonical_sampler(h),
                scale: scale.iter().map(|s| s.value).collect(),
                normalize,
                target: Box::new(move |_| target),
                hypotheses: vec![rapid_check(
                    name,
                    |s| entry_of(&tn_primitives(h, s), entry),
                    &xs,
                )],
                notes: vec![],
            })
        }
        (TheoremId::String, System::Krein(data), Claim::Index { alpha }) => {
            if !(alpha > -1.0) {
                return Err(Error::InvalidParameter(format!(
                    "string index needs α > -1, got {alpha}"
                )));
            }
            let h = string_to_canonical(data)?.hamiltonian;
            // f̃: generalized inverse of x ↦ 1/(x w(x)), evaluated at r
            let tilde = f_scale(|x: f64| data.mass(x));
            let scale = ladder
                .iter()
                .map(|&r| tilde.inverse(r))
                .collect::<Result<Vec<f64>>>()?;
            let nu = 1.0 / (2.0 + alpha);
            let d = d_nu(nu);
            let mut notes = data.issues();
            notes.push("string Weyl function evaluated through z·m(z) = m_D(z²)".into());
            Ok(Plan {
                sample: Box::new(move |zeta| krein_weyl_function(&h, zeta, policy)),
                hypotheses: vec![index_check(
                    "w_regular_variation",
                    |x| data.mass(x),
                    1.0 + alpha,
                    &scale,
                )],
                scale,
                normalize: Box::new(|raw, _, _, f| raw * f),
                target: Box::new(move |mu| -d * minus_power(mu, nu)),
                notes,
            })
        }
        (TheoremId::IndefiniteString, System::Indefinite(data), Claim::Limit { a0, b0, c0 }) => {
            let h = indefinite_string_to_canonical(data)?.hamiltonian;
            let zeta = Claim::zeta0(a0, b0, c0);
            let mut notes = vec![sector_note, "M(z) = -m(-z) for the canonical system of the string; its limit matrix has b0 negated".into()];
            if (a0 + c0 - 1.0).abs() > 1e-12 {
                notes.push(format!(
                    "claimed limit has trace {}; the string's system is trace normed",
                    a0 + c0
                ));
            }
            Ok(Plan {
                hypotheses: vec![limit_check(&h, (a0, -b0, c0), ladder, tol)],
                sample: Box::new(move |z| Ok(indefinite_weyl_function(&h, z, policy)?.value)),
                scale: ones,
                normalize: Box::new(|raw, _, _, _| raw),
                target: Box::new(move |_| zeta),
                notes,
            })
        }
        (
            TheoremId::IndefiniteString,
            System::Indefinite(data),
            Claim::IndefinitePower { alpha, d },
        ) => {
            if !(alpha > 0.0 && d > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "indefinite power claim needs α > 0 and D > 0, got ({alpha}, {d})"
                )));
            }
            let h = indefinite_string_to_canonical(data)?.hamiltonian;
            let xs: Vec<f64> = ladder.iter().map(|r| 1.0 / r).collect();
            let hypotheses = vec![
                index_check(
                    "x_regular_variation",
                    |s| tn_primitives(&h, s).c,
                    1.0 + alpha,
                    &xs,
                ),
                offdiag_check(&h, Entry::C, &xs),
            ];
            Ok(Plan {
                hypotheses,
                sample: Box::new(move |z| Ok(indefinite_weyl_function(&h, z, policy)?.value)),
                scale: ones,
                normalize: Box::new(move |raw, r, mu, _| -raw * model(alpha, mu * r) / d),
                target: Box::new(|_| Complex64::new(1.0, 0.0)),
                notes: vec!["M(z) = -m(-z) for the canonical system of the string".into()],
            })
        }
        _ => Err(mismatch(theorem, &claim)),
    }
}

/// Tabulates the normalized quantity of `theorem` for every `(r, μ)` with `r`
/// on `ladder` and `μ` in [`PROBES`].
///
/// Passes when the worst probe deviation is within `tol` at the last two
/// rungs, the deviation has not grown along the ladder (or stays below
/// `tol/2`), and every hypothesis check on the input holds.
pub fn verify_with(
    theorem: TheoremId,
    scenario: &Scenario,
    ladder: &[f64],
    tol: f64,
    policy: &TruncationPolicy,
) -> Result<VerificationReport> {
    if ladder.len() < 2 || ladder.windows(2).any(|w| !(w[1] > w[0])) || !(ladder[0] > 0.0) {
        return Err(Error::InvalidParameter(
            "ladder needs at least 2 increasing positive rungs".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let plan = plan(theorem, scenario, ladder, tol, policy)?;
    let jobs: Vec<(usize, Complex64)> = (0..ladder.len())
        .flat_map(|k| PROBES.iter().map(move |&mu| (k, mu)))
        .collect();
    let rows: Vec<VerificationRow> = jobs
        .par_iter()
        .map(|&(k, mu)| {
            let r = ladder[k];
            let target = (plan.target)(mu);
            match (plan.sample)(mu * r) {
                Ok(raw) => {
                    let value = (plan.normalize)(raw, r, mu, plan.scale[k]);
                    let denom = if target.norm() > 0.0 {
                        target.norm()
                    } else {
                        1.0
                    };
                    let deviation = (value - target).norm() / denom;
                    VerificationRow {
                        r,
                        mu,
                        raw: Some(raw),
                        normalized: Some(value),
                        target,
                        deviation: Some(deviation),
                        error: None,
                    }
                }
                Err(e) => VerificationRow {
                    r,
                    mu,
                    raw: None,
                    normalized: None,
                    target,
                    deviation: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let rung_deviation: Vec<f64> = rows
        .chunks(PROBES.len())
        .map(|c| {
            c.iter()
                .map(|r| r.deviation.unwrap_or(f64::NAN))
                .fold(0.0, |a: f64, d| {
                    if d.is_nan() || a.is_nan() {
                        f64::NAN
                    } else {
                        a.max(d)
                    }
                })
        })
        .collect();

    let mut diagnostics = plan.notes;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let n = rung_deviation.len();
    let (first, last, before) = (
        rung_deviation[0],
        rung_deviation[n - 1],
        rung_deviation[n - 2],
    );
    let within = last <= tol && before <= tol;
    let trend = last <= first.max(0.5 * tol);
    let hypotheses_hold = plan.hypotheses.iter().all(|h| h.holds);
    for h in plan.hypotheses.iter().filter(|h| !h.holds) {
        diagnostics.push(format!("hypothesis {} fails: {}", h.name, h.detail));
    }
    if !within {
        diagnostics.push(format!(
            "deviation at the last two rungs: {before:.3e}, {last:.3e} (tolerance {tol:.3e})"
        ));
    }
    if !trend {
        diagnostics.push(format!(
            "deviation grew along the ladder: {first:.3e} → {last:.3e}"
        ));
    }
    let verdict = if failures > 0 {
        diagnostics.push(format!("{failures} probe evaluations failed"));
        Verdict::Inconclusive
    } else if within && trend && hypotheses_hold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerificationReport {
        theorem_id: theorem,
        scenario: scenario.name.clone(),
        claim: scenario.claim,
        ladder: ladder.to_vec(),
        probes: PROBES.to_vec(),
        scale: plan.scale,
        rows,
        rung_deviation,
        hypotheses: plan.hypotheses,
        tolerance: tol,
        verdict,
        diagnostics,
    })
}
