//! Named scenarios for `cansys verify --scenario NAME`.

use crate::asymptotics::{Claim, Entry, Scenario, System, TheoremId};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, Profile};
use crate::numerics::geometric_ladder;
use crate::transforms::{IndefiniteStringData, StringData};

/// `(name, default theorem, expected to pass)`
pub const BUILTIN: [(&str, TheoremId, bool); 12] = [
    ("constant", TheoremId::ConstLimit, true),
    ("cesaro", TheoremId::ConstLimit, true),
    ("alpha1", TheoremId::AlphaPositive, true),
    ("alpha_minus1", TheoremId::AlphaNegative, true),
    ("radial_quarter", TheoremId::AlphaNegative, true),
    ("step", TheoremId::Rapid, true),
    ("rapid_A", TheoremId::Rapid, true),
    ("kac_alpha1", TheoremId::String, true),
    ("kac_alpha_half", TheoremId::String, true),
    ("indefinite_half", TheoremId::IndefiniteString, true),
    ("indefinite_two", TheoremId::IndefiniteString, true),
    ("oscillating_A", TheoremId::AlphaPositive, false),
];

fn indefinite(c: f64) -> (System, Claim) {
    let a0 = c * c / (1.0 + c * c);
    let b0 = -c / (1.0 + c * c);
    (
        System::Indefinite(IndefiniteStringData::constant(c)),
        Claim::Limit {
            a0,
            b0,
            c0: 1.0 - a0,
        },
    )
}

/// `H₀ = [[1/2, 1/10], [1/10, 1/2]]` plus `(d/dx)(x² sin(1/x))/10` on `[0, 1]`
/// moved between the diagonal entries; the Cesàro means still tend to `H₀`.
pub fn cesaro_hamiltonian() -> Hamiltonian {
    let a = Profile::Sum {
        terms: vec![
            Profile::Linear { slope: 0.5 },
            Profile::CesaroWiggle {
                amplitude: 0.1,
                cutoff: 1.0,
            },
        ],
    };
    let c = Profile::Complement {
        inner: Box::new(a.clone()),
    };
    Hamiltonian::profiles(a, Profile::Linear { slope: 0.1 }, c)
}

/// `A(x) = x²(2 + sin log x)` near 0, continued linearly past 0.05.
pub fn oscillating_hamiltonian() -> Hamiltonian {
    let a = Profile::continued(
        Profile::LogOscillating {
            coef: 1.0,
            exponent: 2.0,
            amplitude: 1.0,
        },
        0.05,
    );
    Hamiltonian::trace_normed_diagonal(a)
}

pub fn rapid_hamiltonian() -> Hamiltonian {
    Hamiltonian::trace_normed_diagonal(Profile::continued(Profile::ExpRapid, 0.5))
}

/// Looks up a built-in scenario and its default theorem.
pub fn builtin(name: &str) -> Result<(Scenario, TheoremId)> {
    let (_, theorem, _) = BUILTIN.iter().find(|(n, _, _)| *n == name).ok_or_else(|| {
        let known: Vec<&str> = BUILTIN.iter().map(|b| b.0).collect();
        Error::InvalidParameter(format!(
            "unknown scenario '{name}' (known: {})",
            known.join(", ")
        ))
    })?;
    let krein = |exponent: f64| {
        System::Krein(StringData::profile(Profile::Power {
            coef: 1.0,
            exponent,
        }))
    };
    let (system, claim) = match name {
        "constant" => (
            System::Canonical(Hamiltonian::constant(0.5, 0.0, 0.5)),
            Claim::Limit {
                a0: 0.5,
                b0: 0.0,
                c0: 0.5,
            },
        ),
        "cesaro" => (
            System::Canonical(cesaro_hamiltonian()),
            Claim::Limit {
                a0: 0.5,
                b0: 0.1,
                c0: 0.5,
            },
        ),
        "alpha1" => (
            System::Canonical(Hamiltonian::power_law(1.0)),
            Claim::Index { alpha: 1.0 },
        ),
        "alpha_minus1" => (
            System::Canonical(Hamiltonian::power_law(1.0).flipped()),
            Claim::Index { alpha: -1.0 },
        ),
        "radial_quarter" => (
            System::Canonical(Hamiltonian::diagonal_power(0.25)?),
            Claim::Index { alpha: -2.0 },
        ),
        "step" => (
            System::Canonical(Hamiltonian::step_example()),
            Claim::Rapid { entry: Entry::A },
        ),
        "rapid_A" => (
            System::Canonical(rapid_hamiltonian()),
            Claim::Rapid { entry: Entry::A },
        ),
        "kac_alpha1" => (krein(2.0), Claim::Index { alpha: 1.0 }),
        "kac_alpha_half" => (krein(0.5), Claim::Index { alpha: -0.5 }),
        "indefinite_half" => indefinite(0.5),
        "indefinite_two" => indefinite(2.0),
        "oscillating_A" => (
            System::Canonical(oscillating_hamiltonian()),
            Claim::Index { alpha: 1.0 },
        ),
        _ => unreachable!("listed in BUILTIN"),
    };
    Ok((
        Scenario {
            name: name.into(),
            system,
            claim,
        },
        *theorem,
    ))
}

/// Ladder override for scenarios whose normalized ratio converges too slowly
/// for the default 10..10⁸ ladder. Under a rapidly varying `A` the error is
/// of order `1/log r`.
pub fn preferred_ladder(name: &str) -> Option<Vec<f64>> {
    (name == "rapid_A").then(|| geometric_ladder(1e4, 100.0, 7))
}
