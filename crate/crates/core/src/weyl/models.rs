//! Closed-form m-functions and spectral functions of the model Hamiltonians,
//! the ₀F₁ series behind the power-law solutions, and the Dirac-type helpers.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `d_ν = (1-ν)^ν Γ(1-ν) / (ν^{1-ν} Γ(ν))` for `0 < ν < 1`, through log Γ.
pub fn d_nu(nu: f64) -> f64 {
    assert!(nu > 0.0 && nu < 1.0, "d_ν needs 0 < ν < 1, got {nu}");
    (nu * (1.0 - nu).ln() + ln_gamma(1.0 - nu) - (1.0 - nu) * nu.ln() - ln_gamma(nu)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum ModelFamily {
    /// Constant Hamiltonian `[[a0, b0], [b0, c0]]`; its m-function is the constant `ζ₀`.
    ConstantZeta { a0: f64, b0: f64, c0: f64 },
    /// `H_α` with the power entry multiplied by `d` (`d = 1` is the plain family).
    Alpha { alpha: f64, d: f64 },
    /// `diag(𝟙_{[1,∞)}, 𝟙_{[0,1)})`, `m(z) = -1/z`.
    Step,
    /// Free radial Dirac model.
    DiracKappa { kappa: f64 },
}

impl ModelFamily {
    pub fn alpha(alpha: f64) -> Self {
        ModelFamily::Alpha { alpha, d: 1.0 }
    }

    /// Trace-normed constant family with prescribed `ζ₀`.
    pub fn from_zeta(zeta: Complex64) -> Self {
        let (a0, b0, c0) = constant_from_m(zeta);
        ModelFamily::ConstantZeta { a0, b0, c0 }
    }

    fn check(&self) -> Result<()> {
        match *self {
            ModelFamily::ConstantZeta { a0, b0, c0 } => {
                if !(c0 > 0.0) || a0 * c0 - b0 * b0 < -1e-12 * (a0 + c0).powi(2) {
                    return Err(Error::InvalidParameter(format!(
                        "constant model needs c0 > 0 and a0·c0 ≥ b0², got ({a0}, {b0}, {c0})"
                    )));
                }
            }
            ModelFamily::Alpha { alpha, d } => {
                if !alpha.is_finite() || !(d > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha model needs finite α and d > 0, got ({alpha}, {d})"
                    )));
                }
            }
            ModelFamily::Step => {}
            ModelFamily::DiracKappa { kappa } => {
                let s = kappa + 0.5;
                if !s.is_finite() || s == s.round() {
                    return Err(Error::InvalidParameter(format!(
                        "κ + 1/2 must not be an integer, got κ = {kappa}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Principal power `w^p`, cut along the negative real axis.
fn cpow(w: Complex64, p: f64) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        return w;
    }
    (w.ln() * p).exp()
}

/// `(z, reflected)` with `z` moved to the upper half-plane.
pub(super) fn upper_half(z: Complex64) -> Result<(Complex64, bool)> {
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::RealSpectralParameter(z));
    }
    Ok(if z.im > 0.0 {
        (z, false)
    } else {
        (z.conj(), true)
    })
}

/// Exact m-function of a model family; lower half-plane by reflection.
pub fn model_m(family: &ModelFamily, z: Complex64) -> Result<Complex64> {
    family.check()?;
    let (z, reflect) = upper_half(z)?;
    let i = Complex64::i();
    let m = match *family {
        ModelFamily::ConstantZeta { a0, b0, c0 } => {
            let h0 = (a0 * c0 - b0 * b0).max(0.0).sqrt();
            Complex64::new(-b0 / c0, h0 / c0)
        }
        ModelFamily::Alpha { alpha, d } => {
            if alpha > 0.0 {
                let nu = 1.0 / (2.0 + alpha);
                -d.powf(nu) * d_nu(nu) * (-i * PI * nu).exp() * cpow(z, -alpha * nu)
            } else if alpha == 0.0 {
                i * d.sqrt()
            } else {
                let a = alpha.abs();
                let nu = (1.0 + a) / (2.0 + a);
                d.powf(-1.0 / (2.0 + a))
                    * d_nu(nu)
                    * (i * PI / (2.0 + a)).exp()
                    * cpow(z, a / (2.0 + a))
            }
        }
        ModelFamily::Step => -1.0 / z,
        ModelFamily::DiracKappa { kappa } => {
            let k = if kappa > -0.5 { kappa } else { kappa.abs() };
            -cpow(-z * z, k + 0.5) / z / (PI * kappa).cos()
        }
    };
    Ok(if reflect { m.conj() } else { m })
}

/// Exact spectral function, normalized left-continuous with `ρ(0) = 0`.
/// The model measures are symmetric, so `ρ(-t) = -ρ(t)`.
pub fn model_rho(family: &ModelFamily, t: f64) -> Result<f64> {
    family.check()?;
    if t < 0.0 {
        return match family {
            ModelFamily::ConstantZeta { .. }
            | ModelFamily::Alpha { .. }
            | ModelFamily::DiracKappa { .. } => Ok(-model_rho(family, -t)?),
            ModelFamily::Step => Ok(0.0),
        };
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(match *family {
        ModelFamily::ConstantZeta { a0, b0, c0 } => {
            (a0 * c0 - b0 * b0).max(0.0).sqrt() * t / (PI * c0)
        }
        ModelFamily::Alpha { alpha, d } => {
            if alpha > 0.0 {
                let nu = 1.0 / (2.0 + alpha);
                d.powf(nu) * (2.0 + alpha) / 2.0
                    * (PI * nu).sin()
                    * d_nu(nu)
                    * t.powf(2.0 / (2.0 + alpha))
                    / PI
            } else if alpha == 0.0 {
                d.sqrt() * t / PI
            } else {
                let a = alpha.abs();
                let nu = (1.0 + a) / (2.0 + a);
                d.powf(-1.0 / (2.0 + a)) * (2.0 + a) / (2.0 + 2.0 * a)
                    * (PI / (2.0 + a)).sin()
                    * d_nu(nu)
                    * t.powf((2.0 + 2.0 * a) / (2.0 + a))
                    / PI
            }
        }
        ModelFamily::Step => 1.0,
        ModelFamily::DiracKappa { kappa } => {
            let k = if kappa > -0.5 { kappa } else { kappa.abs() };
            t.powf(1.0 + 2.0 * k) / (PI * (1.0 + 2.0 * k))
        }
    })
}

/// Trace-normed constant Hamiltonian whose m-function is `ζ₀` (`Im ζ₀ ≥ 0`).
pub fn constant_from_m(zeta: Complex64) -> (f64, f64, f64) {
    let n = zeta.norm_sqr() + 1.0;
    (zeta.norm_sqr() / n, -zeta.re / n, 1.0 / n)
}

const SERIES_CAP: usize = 10_000;

/// `₀F₁(c; w) = Σ Γ(c)/Γ(k+c) · wᵏ/k!`.
pub fn hypergeometric_0f1(c: f64, w: Complex64) -> Result<Complex64> {
    if c <= 0.0 && c == c.round() {
        return Err(Error::InvalidParameter(format!(
            "0F1 undefined for c = {c}"
        )));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..SERIES_CAP {
        term *= w / ((k as f64 + c) * (k as f64 + 1.0));
        sum += term;
        // terms only decrease once k exceeds |w|^{1/2}
        if term.norm() < 1e-17 * sum.norm() && (k as f64 + 1.0).powi(2) > w.norm() {
            return Ok(sum);
        }
        if term == Complex64::new(0.0, 0.0) {
            return Ok(sum);
        }
    }
    Err(Error::SeriesCap {
        terms: SERIES_CAP,
        modulus: w.norm(),
    })
}

/// Entire solutions `θ̃, φ̃` of `y'' = -ζ(1+α)x^α y` with `θ̃(0) = 1, θ̃'(0) = 0`
/// and `φ̃(0) = 0, φ̃'(0) = 1`, together with their `x`-derivatives.
pub fn model_solutions_alpha_with_derivatives(
    alpha: f64,
    zeta: Complex64,
    x: f64,
) -> Result<(Complex64, Complex64, Complex64, Complex64)> {
    if !(alpha >= 0.0) || !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "model solutions need α ≥ 0 and x ≥ 0, got ({alpha}, {x})"
        )));
    }
    let nu = 1.0 / (2.0 + alpha);
    let w = (nu * nu - nu) * zeta * x.powf(1.0 / nu);
    let dw = (nu - 1.0) * zeta * x.powf(1.0 + alpha);
    let theta = hypergeometric_0f1(1.0 - nu, w)?;
    let f1 = hypergeometric_0f1(1.0 + nu, w)?;
    let phi = x * f1;
    let dtheta = hypergeometric_0f1(2.0 - nu, w)? / (1.0 - nu) * dw;
    let dphi = f1 + x * hypergeometric_0f1(2.0 + nu, w)? / (1.0 + nu) * dw;
    Ok((theta, phi, dtheta, dphi))
}

/// `θ̃(ζ, x), φ̃(ζ, x)` with `ν = 1/(2+α)`.
pub fn model_solutions_alpha(
    alpha: f64,
    zeta: Complex64,
    x: f64,
) -> Result<(Complex64, Complex64)> {
    let (t, p, _, _) = model_solutions_alpha_with_derivatives(alpha, zeta, x)?;
    Ok((t, p))
}

/// Fundamental matrix of `H_α` (`α ≥ 0`):
/// `[[θ̃(z²), zφ̃(z²)], [θ̃'(z²)/z, φ̃'(z²)]]`.
pub fn model_fundamental_alpha(alpha: f64, z: Complex64, x: f64) -> Result<[[Complex64; 2]; 2]> {
    let (t, p, dt, dp) = model_solutions_alpha_with_derivatives(alpha, z * z, x)?;
    Ok([[t, z * p], [dt / z, dp]])
}

/// `z^{2⌊κ+1/2⌋}·M₀(z)`.
pub fn kappa_reduce<F: Fn(Complex64) -> Result<Complex64>>(
    m0: F,
    kappa: f64,
    z: Complex64,
) -> Result<Complex64> {
    let s = kappa + 0.5;
    if !s.is_finite() || s == s.round() {
        return Err(Error::InvalidParameter(format!(
            "κ + 1/2 must not be an integer, got κ = {kappa}"
        )));
    }
    let n = s.floor() as i32;
    Ok(z.powi(2 * n) * m0(z)?)
}

/// `m_q(ζ) = z·m(z)` with `z = i√(-ζ)` the root of `ζ` in the upper half-plane.
pub fn dirac_to_schrodinger_m<F: Fn(Complex64) -> Result<Complex64>>(
    m: F,
    zeta: Complex64,
) -> Result<Complex64> {
    if zeta.im == 0.0 && zeta.re >= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ζ = {zeta} lies on the cut [0, ∞)"
        )));
    }
    let z = Complex64::i() * (-zeta).sqrt();
    Ok(z * m(z)?)
}
