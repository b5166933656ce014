//! Regular variation toolbox (index estimation, the f/g scale functions,
//! Karamata-generated slowly varying factors, asymptotic inverses) and the
//! ladder verifiers for the high-energy asymptotics of m.

mod verify;

pub use verify::{
    verify, verify_with, Claim, Entry, HypothesisCheck, Scenario, System, TheoremId, Verdict,
    VerificationReport, VerificationRow, DEFAULT_TOLERANCE, PROBES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{geometric_ladder, invert_increasing, linear_fit};

/// Which end the variation is measured at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    AtZero,
    AtInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RvIndex {
    Finite(f64),
    /// Rapid variation: the ratios `F(tx)/F(x)` diverge.
    Rapid,
}

impl RvIndex {
    pub fn finite(&self) -> Option<f64> {
        match self {
            RvIndex::Finite(a) => Some(*a),
            RvIndex::Rapid => None,
        }
    }
}

/// Result of [`rv_index_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RVProfile {
    pub index: RvIndex,
    /// Range of the local log-slopes over the tail half of the ladder.
    pub spread: f64,
    /// Difference between the estimates from two ladder offsets.
    pub stability: f64,
    pub side: Side,
    /// `(x, F(x))`, ordered toward the limit point.
    pub samples: Vec<(f64, f64)>,
    /// `Δ log F / Δ log x` between consecutive samples.
    pub local_slopes: Vec<f64>,
}

/// Default geometric ladder toward `side`: 8 rungs, ratio 10.
pub fn default_ladder(side: Side) -> Vec<f64> {
    match side {
        Side::AtInfinity => geometric_ladder(10.0, 10.0, 8),
        Side::AtZero => geometric_ladder(0.1, 0.1, 8),
    }
}

/// Intercept at `1/|log x| = 0` of the local slopes, which removes the
/// leading `1/log x` bias of slowly varying factors; plain mean when the
/// window straddles `x = 1`.
fn extrapolated_slope(us: &[f64], slopes: &[f64]) -> f64 {
    let usable = us.iter().all(|u| u.is_finite() && *u <= 1.0);
    let varied = us.iter().any(|u| (u - us[0]).abs() > 1e-12);
    if usable && varied {
        linear_fit(us, slopes).1
    } else {
        slopes.iter().sum::<f64>() / slopes.len() as f64
    }
}

/// Index of regular variation of a positive sampler at `side`, from the
/// log-log slopes along a geometric ladder.
///
/// The estimate uses the tail half of the ladder; the same estimate shifted by
/// one rung gives `stability`. Local slopes that keep growing (range above
/// 0.5, no decay of the increments) are reported as rapid variation.
pub fn rv_index_estimate<F: Fn(f64) -> f64>(f: F, side: Side, ladder: &[f64]) -> Result<RVProfile> {
    if ladder.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "ladder needs at least 4 rungs, got {}",
            ladder.len()
        )));
    }
    let mut xs = ladder.to_vec();
    if xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(
            "ladder points must be positive and finite".into(),
        ));
    }
    // toward the limit point
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if side == Side::AtZero {
        xs.reverse();
    }
    let mut samples = Vec::with_capacity(xs.len());
    for &x in &xs {
        let v = f(x);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sampler must be positive, got F({x:e}) = {v:e}"
            )));
        }
        samples.push((x, v));
    }
    let (slopes, us): (Vec<f64>, Vec<f64>) = samples
        .windows(2)
        .map(|w| {
            let s = (w[1].1.ln() - w[0].1.ln()) / (w[1].0.ln() - w[0].0.ln());
            (s, 1.0 / (0.5 * (w[0].0.ln() + w[1].0.ln())).abs())
        })
        .unzip();
    let n = slopes.len();
    let k = (n / 2).max(3).min(n - 1);
    let tail = n - k..n;
    let shifted = n - k - 1..n - 1;
    let estimate = extrapolated_slope(&us[tail.clone()], &slopes[tail.clone()]);
    let previous = extrapolated_slope(&us[shifted.clone()], &slopes[shifted]);
    let window = &slopes[tail];
    let max = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    // slopes rising along the whole ladder that either double or keep
    // non-shrinking increments; slowly varying corrections make the
    // increments decay like 1/log² x, oscillating factors break monotonicity
    let rising = slopes.windows(2).all(|w| w[1] > w[0]);
    let doubled = window[window.len() - 1] > 2.0 * window[0].abs().max(1.0);
    let steps: Vec<f64> = window.windows(2).map(|w| w[1] - w[0]).collect();
    let sustained = steps.len() >= 2 && steps[steps.len() - 1] >= 0.5 * steps[0];
    let diverging = rising && (doubled || sustained);
    let index = if spread > 0.5 && diverging {
        RvIndex::Rapid
    } else {
        RvIndex::Finite(estimate)
    };
    Ok(RVProfile {
        index,
        spread,
        stability: (estimate - previous).abs(),
        side,
        samples,
        local_slopes: slopes,
    })
}

/// One evaluation of a scale function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleSample {
    pub r: f64,
    pub value: f64,
    /// `|r·f(r)·P(f(r)/r) - 1|`
    pub residual: f64,
}

/// `f(r) = r F(r²)` with `F` the inverse of `x ↦ 1/(x P(x))`, for a primitive
/// `P` (`A` gives `f`, `C` gives `g`).
#[derive(Debug, Clone)]
pub struct ScaleFunction<P> {
    primitive: P,
}

impl<P: Fn(f64) -> f64> ScaleFunction<P> {
    /// `F(y)`: the root of `x P(x) = 1/y` by bisection in `log x`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let target = 1.0 / y;
        let g = |x: f64| x * (self.primitive)(x);
        let x = invert_increasing(g, target, target.sqrt(), f64::INFINITY)?;
        let (below, above) = (g(0.5 * x), g(2.0 * x));
        if !(below <= target && target <= above && below <= g(x) && g(x) <= above) {
            return Err(Error::Inversion(format!(
                "x·P(x) is not increasing near x = {x:e}"
            )));
        }
        Ok(x)
    }

    pub fn sample(&self, r: f64) -> Result<ScaleSample> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale functions need r > 0, got {r}"
            )));
        }
        let big_f = self.inverse(r * r)?;
        let value = r * big_f;
        let residual = (r * value * (self.primitive)(big_f) - 1.0).abs();
        Ok(ScaleSample { r, value, residual })
    }

    pub fn at(&self, r: f64) -> Result<f64> {
        Ok(self.sample(r)?.value)
    }

    pub fn samples(&self, ladder: &[f64]) -> Result<Vec<ScaleSample>> {
        ladder.iter().map(|&r| self.sample(r)).collect()
    }
}

/// Scale function of `A`.
pub fn f_scale<P: Fn(f64) -> f64>(a: P) -> ScaleFunction<P> {
    ScaleFunction { primitive: a }
}

/// Scale function of `C`; the same construction with `C` in place of `A`.
pub fn g_scale<P: Fn(f64) -> f64>(c: P) -> ScaleFunction<P> {
    ScaleFunction { primitive: c }
}

/// `ε` in the Karamata representation `exp(η + ∫₁ᵗ ε(s)/s ds)`, given as a
/// function of `u = log t` on `t ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KaramataEpsilon {
    Zero,
    /// `ε = 1/(1 + u)`
    InverseLog,
    /// `ε = arctan(1/(1 + u))`
    ArctanDecay,
}

impl KaramataEpsilon {
    pub fn epsilon(&self, u: f64) -> f64 {
        match self {
            KaramataEpsilon::Zero => 0.0,
            KaramataEpsilon::InverseLog => 1.0 / (1.0 + u),
            KaramataEpsilon::ArctanDecay => (1.0 / (1.0 + u)).atan(),
        }
    }

    /// `∫₀ᵘ ε`, closed form.
    fn integral(&self, u: f64) -> f64 {
        let arccot_primitive = |w: f64| w * (1.0 / w).atan() + 0.5 * (1.0 + w * w).ln();
        match self {
            KaramataEpsilon::Zero => 0.0,
            KaramataEpsilon::InverseLog => u.ln_1p(),
            KaramataEpsilon::ArctanDecay => arccot_primitive(1.0 + u) - arccot_primitive(1.0),
        }
    }
}

/// A slowly varying function built from the Karamata representation; at
/// zero it is evaluated at `1/x`. Constant `e^η` on the other side of `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowlyVarying {
    pub eta: f64,
    pub epsilon: KaramataEpsilon,
    pub side: Side,
}

impl SlowlyVarying {
    pub fn value(&self, x: f64) -> f64 {
        let t = match self.side {
            Side::AtInfinity => x,
            Side::AtZero => 1.0 / x,
        };
        let u = t.ln().max(0.0);
        (self.eta + self.epsilon.integral(u)).exp()
    }
}

pub fn karamata_generate(eta_limit: f64, epsilon: KaramataEpsilon, side: Side) -> SlowlyVarying {
    SlowlyVarying {
        eta: eta_limit,
        epsilon,
        side,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseRow {
    pub x: f64,
    /// `F(x)/F₀(x)`
    pub ratio: f64,
    /// `y = F₀(x)`
    pub y: f64,
    /// `F⁻¹(y)/F₀⁻¹(y)`
    pub inverse_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseCheckReport {
    pub rows: Vec<InverseRow>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares two increasing functions and their bisection inverses along a
/// ladder; passes when both ratios are within `tol` of 1 at the last two rungs.
pub fn asymptotic_inverse_check<F0: Fn(f64) -> f64, F: Fn(f64) -> f64>(
    f0: F0,
    f: F,
    ladder: &[f64],
    tol: f64,
) -> Result<InverseCheckReport> {
    if ladder.len() < 2 {
        return Err(Error::InvalidParameter(
            "ladder needs at least 2 rungs".into(),
        ));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for &x in ladder {
        let y = f0(x);
        let inv0 = invert_increasing(&f0, y, x, f64::INFINITY)?;
        let inv = invert_increasing(&f, y, x, f64::INFINITY)?;
        rows.push(InverseRow {
            x,
            ratio: f(x) / y,
            y,
            inverse_ratio: inv / inv0,
        });
    }
    let passed = rows[rows.len() - 2..]
        .iter()
        .all(|r| (r.ratio - 1.0).abs() <= tol && (r.inverse_ratio - 1.0).abs() <= tol);
    Ok(InverseCheckReport {
        rows,
        tolerance: tol,
        passed,
    })
}

/// `(-μ)^ν` with the principal branch, as used by the Krein string asymptotics.
pub(crate) fn minus_power(mu: num_complex::Complex64, nu: f64) -> num_complex::Complex64 {
    let w = -mu;
    num_complex::Complex64::from_polar(w.norm().powf(nu), w.arg() * nu)
}
