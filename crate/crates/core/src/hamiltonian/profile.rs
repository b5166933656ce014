use serde::{Deserialize, Serialize};

/// A closed-form primitive `P(x) = ∫₀ˣ p(t) dt` with `P(0) = 0`.
///
/// Profiles describe Hamiltonian entries (through their primitives) and mass
/// distributions of strings. Only values are ever evaluated; densities are
/// recovered from exact differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `slope · x`
    Linear {
        slope: f64,
    },
    /// `coef · x^exponent`, `exponent > 0`
    Power {
        coef: f64,
        exponent: f64,
    },
    /// `coef · x^exponent · (2 + amplitude · sin ln x)`; not regularly varying.
    LogOscillating {
        coef: f64,
        exponent: f64,
        amplitude: f64,
    },
    /// `e^{-1/x}`, rapidly varying at 0.
    ExpRapid,
    /// `amplitude · x² sin(1/x)` up to `cutoff`, constant afterwards.
    CesaroWiggle {
        amplitude: f64,
        cutoff: f64,
    },
    /// `head(x)` for `x <= switch`, continued linearly with `slope` afterwards.
    Then {
        head: Box<Profile>,
        switch: f64,
        slope: f64,
    },
    /// `x - inner(x)`
    Complement {
        inner: Box<Profile>,
    },
    /// `factor · inner(x)`
    Scaled {
        factor: f64,
        inner: Box<Profile>,
    },
    Sum {
        terms: Vec<Profile>,
    },
}

impl Profile {
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            Profile::Linear { slope } => slope * x,
            Profile::Power { coef, exponent } => coef * x.powf(*exponent),
            Profile::LogOscillating {
                coef,
                exponent,
                amplitude,
            } => coef * x.powf(*exponent) * (2.0 + amplitude * x.ln().sin()),
            Profile::ExpRapid => (-1.0 / x).exp(),
            Profile::CesaroWiggle { amplitude, cutoff } => {
                let t = x.min(*cutoff);
                amplitude * t * t * (1.0 / t).sin()
            }
            Profile::Then {
                head,
                switch,
                slope,
            } => {
                if x <= *switch {
                    head.value(x)
                } else {
                    head.value(*switch) + slope * (x - switch)
                }
            }
            Profile::Complement { inner } => x - inner.value(x),
            Profile::Scaled { factor, inner } => factor * inner.value(x),
            Profile::Sum { terms } => terms.iter().map(|p| p.value(x)).sum(),
        }
    }

    /// Density `p(x)`, used for diagnostics and for continuing a profile with
    /// its own slope.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            Profile::Linear { slope } => *slope,
            Profile::Power { coef, exponent } => coef * exponent * x.powf(exponent - 1.0),
            Profile::LogOscillating {
                coef,
                exponent,
                amplitude,
            } => {
                let l = x.ln();
                coef * x.powf(exponent - 1.0)
                    * (exponent * (2.0 + amplitude * l.sin()) + amplitude * l.cos())
            }
            Profile::ExpRapid => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-1.0 / x).exp() / (x * x)
                }
            }
            Profile::CesaroWiggle { amplitude, cutoff } => {
                if x >= *cutoff || x <= 0.0 {
                    0.0
                } else {
                    amplitude * (2.0 * x * (1.0 / x).sin() - (1.0 / x).cos())
                }
            }
            Profile::Then {
                head,
                switch,
                slope,
            } => {
                if x <= *switch {
                    head.density(x)
                } else {
                    *slope
                }
            }
            Profile::Complement { inner } => 1.0 - inner.density(x),
            Profile::Scaled { factor, inner } => factor * inner.density(x),
            Profile::Sum { terms } => terms.iter().map(|p| p.density(x)).sum(),
        }
    }

    /// Points where the density has a kink or jump.
    pub fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Profile::CesaroWiggle { cutoff, .. } => out.push(*cutoff),
            Profile::Then { head, switch, .. } => {
                head.breakpoints(out);
                out.push(*switch);
            }
            Profile::Complement { inner } | Profile::Scaled { inner, .. } => inner.breakpoints(out),
            Profile::Sum { terms } => terms.iter().for_each(|p| p.breakpoints(out)),
            _ => {}
        }
    }

    /// `head` continued past `switch` with its own density there.
    pub fn continued(head: Profile, switch: f64) -> Profile {
        let slope = head.density(switch);
        Profile::Then {
            head: Box::new(head),
            switch,
            slope,
        }
    }

    pub fn zero() -> Profile {
        Profile::Linear { slope: 0.0 }
    }
}
