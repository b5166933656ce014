use super::*;
use crate::hamiltonian::{Cell, Profile};
use proptest::prelude::*;

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    ((a - b) / b).norm()
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

#[test]
fn identity_hamiltonian() {
    let s = m_function(
        &Hamiltonian::constant(1.0, 0.0, 1.0),
        cz(0.0, 2.0),
        &policy(),
    )
    .unwrap();
    assert!((s.value - Complex64::i()).norm() < 1e-12);
    assert!(s.radius < 1e-8);
}

#[test]
fn step_example() {
    let s = m_function(&Hamiltonian::step_example(), cz(0.0, 2.0), &policy()).unwrap();
    assert!(rel(s.value, cz(0.0, 0.5)) < 1e-8, "{s:?}");
}

#[test]
fn alpha_one_at_i() {
    let s = m_function(&Hamiltonian::power_law(1.0), Complex64::i(), &policy()).unwrap();
    assert!(rel(s.value, Complex64::i() * d_nu(1.0 / 3.0)) < 1e-3);
}

#[test]
fn real_spectral_parameter_is_rejected() {
    let r = m_function(&Hamiltonian::step_example(), cz(1.0, 0.0), &policy());
    assert!(matches!(r, Err(Error::RealSpectralParameter(_))));
}

#[test]
fn oracle_agreement() {
    let cases = [
        (
            Hamiltonian::constant(0.3, -0.2, 0.7),
            ModelFamily::ConstantZeta {
                a0: 0.3,
                b0: -0.2,
                c0: 0.7,
            },
        ),
        (Hamiltonian::step_example(), ModelFamily::Step),
        (Hamiltonian::power_law(0.0), ModelFamily::alpha(0.0)),
        (Hamiltonian::power_law(1.0), ModelFamily::alpha(1.0)),
        (Hamiltonian::power_law(2.0), ModelFamily::alpha(2.0)),
        (Hamiltonian::power_law(-0.5), ModelFamily::alpha(-0.5)),
        (
            Hamiltonian::diagonal_power(0.25).unwrap(),
            ModelFamily::DiracKappa { kappa: 0.25 },
        ),
        (
            Hamiltonian::diagonal_power(-0.25).unwrap(),
            ModelFamily::DiracKappa { kappa: -0.25 },
        ),
    ];
    for (h, f) in &cases {
        for z in [cz(0.0, 1.0), cz(1.0, 1.0), cz(0.0, 10.0), cz(-2.0, -0.5)] {
            let s = m_function(h, z, &policy()).unwrap();
            let want = model_m(f, z).unwrap();
            assert!(
                rel(s.value, want) < 1e-8,
                "{f:?} at {z}: {} vs {want}",
                s.value
            );
            assert!(
                (s.value - want).norm() <= 10.0 * s.radius.max(1e-12 * want.norm()),
                "{f:?} at {z}: {s:?}"
            );
        }
    }
}

#[test]
fn alpha_with_multiplier() {
    // H = diag(3·2x, 1): m = 3^{1/3}·m₁
    let h = Hamiltonian::profiles(
        Profile::Power {
            coef: 3.0,
            exponent: 2.0,
        },
        Profile::zero(),
        Profile::Linear { slope: 1.0 },
    );
    let z = cz(0.5, 2.0);
    let s = m_function(&h, z, &policy()).unwrap();
    assert!(
        rel(
            s.value,
            model_m(&ModelFamily::Alpha { alpha: 1.0, d: 3.0 }, z).unwrap()
        ) < 1e-8
    );
}

#[test]
fn finite_length_does_not_converge() {
    let h = Hamiltonian::piecewise(vec![0.0], vec![Cell::new(1.0, 0.0, 1.0)], 2.0).unwrap();
    match m_function(&h, Complex64::i(), &policy()) {
        Err(Error::NonConvergence { radius, truncation }) => {
            assert!(radius > 1e-9 && truncation <= 2.0);
        }
        other => panic!("expected NonConvergence, got {other:?}"),
    }
}

#[test]
fn potential_proportional_to_h_shifts_z() {
    // JY' + qHY = zHY is the unperturbed system at z - q
    let q = 0.7;
    let h = Hamiltonian::power_law(1.0);
    let qh = Hamiltonian::profiles(
        Profile::Power {
            coef: q,
            exponent: 2.0,
        },
        Profile::zero(),
        Profile::Linear { slope: q },
    );
    let z = cz(1.0, 1.5);
    let s = m_function_with_potential(&h, &qh, z, &policy()).unwrap();
    assert!(rel(s.value, model_m(&ModelFamily::alpha(1.0), z - q).unwrap()) < 1e-8);
    let zero = Hamiltonian::constant(0.0, 0.0, 0.0);
    let s0 = m_function_with_potential(&h, &zero, z, &policy()).unwrap();
    assert_eq!(s0.value, m_function(&h, z, &policy()).unwrap().value);
}

#[test]
fn sweep_preserves_order() {
    let zs: Vec<Complex64> = (1..6).map(|k| cz(k as f64 - 3.0, 1.0)).collect();
    let out = m_sweep(&Hamiltonian::step_example(), &zs, &policy());
    for (z, s) in zs.iter().zip(out) {
        assert_eq!(s.unwrap().z, *z);
    }
}

fn arb_piecewise() -> impl Strategy<Value = Hamiltonian> {
    prop::collection::vec(
        (0.05f64..2.0, 0.0f64..2.0, 0.01f64..2.0, -1.0f64..1.0),
        1..8,
    )
    .prop_map(|cells| {
        let mut x = 0.0;
        let mut bps = Vec::new();
        let mut out = Vec::new();
        for (w, a, c, t) in cells {
            bps.push(x);
            x += w;
            out.push(Cell::new(a + 0.01, t * ((a + 0.01) * c).sqrt(), c));
        }
        Hamiltonian::piecewise(bps, out, f64::INFINITY).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn herglotz_and_reflection(h in arb_piecewise(), re in -4.0f64..4.0, im in 0.05f64..4.0) {
        let z = cz(re, im);
        let up = m_function(&h, z, &policy()).unwrap();
        prop_assert!(up.value.im >= -up.radius);
        let down = m_function(&h, z.conj(), &policy()).unwrap();
        prop_assert_eq!(down.value, up.value.conj());
    }

    #[test]
    fn scaling_covariance(h in arb_piecewise(), r1 in 0.2f64..5.0, r2 in 0.2f64..5.0, r3 in 0.2f64..5.0, re in -2.0f64..2.0, im in 0.2f64..2.0) {
        let z = cz(re, im);
        // tight truncation, so that only the Möbius algebra is compared
        let tight = TruncationPolicy { rtol: 1e-14, atol: 1e-300, ..policy() };
        let hr = h.scaled(r1, r2, r3).unwrap();
        let lhs = m_function(&hr, z, &tight).unwrap().value;
        let rhs = m_function(&h, z * (r2 / r1), &tight).unwrap().value * r3;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0), "{} vs {}", lhs, rhs);
    }
}
