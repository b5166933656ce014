//! Small numerical helpers shared across modules: root bracketing for
//! monotone functions, Gauss-Legendre panels and least-squares slopes.

use crate::error::{Error, Result};

/// Nodes and weights of the 8-point Gauss-Legendre rule on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Integrates `f` over `[a, b]` with an 8-point Gauss-Legendre panel.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    GL8.iter().map(|&(t, w)| w * f(mid + half * t)).sum::<f64>() * half
}

/// Quadrature points of [`gauss_legendre`] mapped to `[a, b]`, paired with weights.
pub fn gauss_legendre_points(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    GL8.iter().map(move |&(t, w)| (mid + half * t, w * half))
}

/// Solves `g(x) = target` for a nondecreasing `g` on `(0, upper)` by bisection
/// in `log x`, starting from `guess` and expanding the bracket geometrically.
///
/// Returns the smallest bracket endpoint that satisfies `g(x) >= target` up to
/// relative bracket width `1e-15`.
pub fn invert_increasing<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    guess: f64,
    upper: f64,
) -> Result<f64> {
    if !(target.is_finite()) {
        return Err(Error::Inversion(format!("non-finite target {target}")));
    }
    let mut lo = guess.max(f64::MIN_POSITIVE).min(upper);
    let mut hi = lo;
    let mut expansions = 0;
    while g(lo) >= target {
        lo *= 0.5;
        expansions += 1;
        if lo < 1e-300 || expansions > 2000 {
            return Err(Error::Inversion(format!(
                "no lower bracket for target {target:e}"
            )));
        }
    }
    while g(hi) < target {
        hi = (hi * 2.0).min(upper);
        expansions += 1;
        if expansions > 4000 || (hi >= upper && g(hi) < target) {
            return Err(Error::Inversion(format!(
                "no upper bracket for target {target:e}"
            )));
        }
    }
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        let mid = if mid > lo && mid < hi {
            mid
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Geometric ladder `start, start*ratio, ...` with `rungs` entries.
pub fn geometric_ladder(start: f64, ratio: f64, rungs: usize) -> Vec<f64> {
    (0..rungs).map(|k| start * ratio.powi(k as i32)).collect()
}

/// Formats like C's `%.12e` (signed two-digit exponent).
pub fn fmt_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    // -0 prints as 0
    let s = format!("{:.12e}", x + 0.0);
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}
