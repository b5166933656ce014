use super::*;
use crate::hamiltonian::Profile;
use crate::weyl::{m_function_with_potential, model_m, ModelFamily};
use proptest::prelude::*;

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn cells_of(h: &Hamiltonian) -> (Vec<f64>, Vec<Cell>) {
    let Form::PiecewiseConstant(t) = &h.form else {
        panic!("expected cells, got {h:?}")
    };
    (t.breakpoints().to_vec(), t.cells().to_vec())
}

#[test]
fn monotone_inverse_conventions() {
    let inc =
        generalized_inverse(vec![(0.0, 0.0), (1.0, 3.0), (2.0, 4.0)], Convention::Min).unwrap();
    let sup =
        generalized_inverse(vec![(0.0, 0.0), (1.0, 3.0), (2.0, 4.0)], Convention::Sup).unwrap();
    for x in [0.0, 0.3, 1.0, 1.7] {
        assert!((inc.inverse(inc.forward(x)) - x).abs() < 1e-15);
        assert!((sup.inverse(sup.forward(x)) - x).abs() < 1e-15);
    }
    // jump from 2 to 5 at x = 1
    let jump = vec![(0.0, 0.0), (1.0, 2.0), (1.0, 5.0), (2.0, 6.0)];
    for c in [Convention::Min, Convention::Sup] {
        let m = generalized_inverse(jump.clone(), c).unwrap();
        assert_eq!(m.inverse(3.0), 1.0, "{c:?}");
        assert_eq!(m.forward(1.0), 2.0);
    }
    // plateau at level 4 on [1, 2]
    let plateau = vec![(0.0, 0.0), (1.0, 4.0), (2.0, 4.0), (3.0, 5.0)];
    assert_eq!(
        generalized_inverse(plateau.clone(), Convention::Min)
            .unwrap()
            .inverse(4.0),
        1.0
    );
    assert_eq!(
        generalized_inverse(plateau, Convention::Sup)
            .unwrap()
            .inverse(4.0),
        2.0
    );
    assert!(generalized_inverse(Vec::new(), Convention::Min).is_err());
    assert!(generalized_inverse(vec![(0.0, 1.0), (1.0, 0.5)], Convention::Min).is_err());
}

#[test]
fn trace_normed_input_is_unchanged() {
    let h = Hamiltonian::constant(0.25, 0.1, 0.75);
    let (t, map) = trace_normalize(&h).unwrap();
    assert_eq!(t.hamiltonian, h);
    assert_eq!(map.inverse(0.7), 0.7);
}

#[test]
fn alpha_zero_normalizes_to_half() {
    let (t, map) = trace_normalize(&Hamiltonian::power_law(0.0)).unwrap();
    assert_eq!(t.hamiltonian, Hamiltonian::constant(0.5, 0.0, 0.5));
    assert_eq!(map.forward(3.0), 6.0);
}

#[test]
fn alpha_one_trace_map() {
    let (_, map) = trace_normalize(&Hamiltonian::power_law(1.0)).unwrap();
    assert!((map.inverse(2.0) - 1.0).abs() < 1e-14);
    assert!((map.forward(1.0) - 2.0).abs() < 1e-15);
}

#[test]
fn finite_trace_is_rejected() {
    let h = Hamiltonian::piecewise(vec![0.0], vec![Cell::new(1.0, 0.0, 1.0)], 3.0).unwrap();
    assert!(trace_normalize(&h).is_err());
    let h = Hamiltonian::piecewise(
        vec![0.0, 1.0],
        vec![Cell::new(1.0, 0.0, 1.0), Cell::new(0.0, 0.0, 0.0)],
        f64::INFINITY,
    )
    .unwrap();
    assert!(trace_normalize(&h).is_err());
}

fn check_m_invariance(h: &Hamiltonian) {
    let (t, _) = trace_normalize(h).unwrap();
    for z in [cz(0.0, 1.0), cz(0.0, 2.0), cz(1.0, 1.0)] {
        let (a, b) = (
            m_function(h, z, &policy()).unwrap(),
            m_function(&t.hamiltonian, z, &policy()).unwrap(),
        );
        let bound = 2.0 * (a.radius + b.radius) + 1e-12;
        assert!(
            (a.value - b.value).norm() < bound,
            "{z}: {} vs {} (bound {bound:e})",
            a.value,
            b.value
        );
    }
}

#[test]
fn trace_normalize_preserves_m() {
    check_m_invariance(&Hamiltonian::power_law(1.0));
    check_m_invariance(&Hamiltonian::power_law(-0.5));
    let h = Hamiltonian::piecewise(
        vec![0.0, 0.5, 2.0],
        vec![
            Cell::new(2.0, 0.5, 1.0),
            Cell::new(0.0, 0.0, 0.0),
            Cell::new(0.3, -0.1, 3.0),
        ],
        f64::INFINITY,
    )
    .unwrap();
    check_m_invariance(&h);
    let (t, _) = trace_normalize(&h).unwrap();
    for c in cells_of(&t.hamiltonian).1 {
        assert!((c.trace() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn scale_examples() {
    let h = Hamiltonian::constant(1.0, 0.0, 1.0);
    assert_eq!(scale(&h, 1.0, 1.0, 1.0).unwrap().hamiltonian, h);
    let t = scale(&h, 1.0, 1.0, 2.0).unwrap();
    assert_eq!(t.hamiltonian, Hamiltonian::constant(2.0, 0.0, 0.5));
    assert_eq!(
        t.relation,
        Relation::Scaled {
            r1: 1.0,
            r2: 1.0,
            r3: 2.0
        }
    );
    let m = m_function(&t.hamiltonian, cz(0.3, 1.0), &policy())
        .unwrap()
        .value;
    assert!((m - cz(0.0, 2.0)).norm() < 1e-10);
}

#[test]
fn unit_density_string_gives_marchenko_asymptote() {
    let t = string_to_canonical(&StringData::profile(Profile::Linear { slope: 1.0 })).unwrap();
    assert_eq!(t.hamiltonian, Hamiltonian::constant(0.5, 0.0, 0.5));
    let p = t.hamiltonian.primitive_integrals(3.0).unwrap();
    assert!((p.a - 1.5).abs() < 1e-14 && (p.c - 1.5).abs() < 1e-14);
    for zeta in [-1.0, -100.0] {
        let md = krein_weyl_function(&t.hamiltonian, cz(zeta, 0.0), &policy()).unwrap();
        assert!(
            (md - cz(-(-zeta as f64).sqrt(), 0.0)).norm() < 1e-6,
            "{zeta}: {md}"
        );
    }
}

#[test]
fn tabulated_unit_density_is_half_identity() {
    let data = StringData::table(vec![(0.0, 0.0), (4.0, 4.0)], f64::INFINITY).unwrap();
    let (bps, cells) = cells_of(&string_to_canonical(&data).unwrap().hamiltonian);
    assert_eq!(bps, vec![0.0, 8.0]);
    assert_eq!(
        cells,
        vec![Cell::new(0.5, 0.0, 0.5), Cell::new(0.0, 0.0, 1.0)]
    );
}

#[test]
fn point_mass_becomes_plateau_cell() {
    let data = StringData::table(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], f64::INFINITY).unwrap();
    let (bps, cells) = cells_of(&string_to_canonical(&data).unwrap().hamiltonian);
    assert_eq!(bps, vec![0.0, 1.0, 2.0]);
    assert_eq!(
        cells,
        vec![
            Cell::new(0.0, 0.0, 1.0),
            Cell::new(1.0, 0.0, 0.0),
            Cell::new(0.0, 0.0, 1.0)
        ]
    );
}

#[test]
fn massless_string_of_unit_length_is_the_step_example() {
    let data = StringData::table(vec![(0.0, 0.0)], 1.0).unwrap();
    assert!(!data.issues().is_empty());
    let h = string_to_canonical(&data).unwrap().hamiltonian;
    for x in [0.5, 1.0, 2.5] {
        assert_eq!(
            h.primitive_integrals(x).unwrap(),
            Hamiltonian::step_example().primitive_integrals(x).unwrap()
        );
    }
    let z = cz(0.4, 1.3);
    let m = m_function(&h, z, &policy()).unwrap().value;
    assert!((m - model_m(&ModelFamily::Step, z).unwrap()).norm() < 1e-9);
}

#[test]
fn massless_indefinite_string() {
    let data =
        IndefiniteStringData::new(f64::INFINITY, vec![0.0], vec![0.0], Vec::new(), Vec::new())
            .unwrap();
    let t = indefinite_string_to_canonical(&data).unwrap();
    assert_eq!(
        t.hamiltonian,
        Hamiltonian::piecewise(vec![0.0], vec![Cell::new(0.0, 0.0, 1.0)], f64::INFINITY).unwrap()
    );
    let big = indefinite_weyl_function(&t.hamiltonian, cz(0.5, 2.0), &policy()).unwrap();
    assert!(big.value.norm() < 1e-9, "{big:?}");
}

#[test]
fn constant_indefinite_string() {
    for c in [0.5, 2.0] {
        let t = indefinite_string_to_canonical(&IndefiniteStringData::constant(c)).unwrap();
        let (_, cells) = cells_of(&t.hamiltonian);
        let n = 1.0 + c * c;
        assert_eq!(cells.len(), 1);
        assert!((cells[0].a - c * c / n).abs() < 1e-15 && (cells[0].b - c / n).abs() < 1e-15);
        assert!(cells[0].det().abs() < 1e-15);
        let mm = indefinite_weyl_function(&t.hamiltonian, cz(0.0, 3.0), &policy()).unwrap();
        assert!((mm.value - c).norm() < 1e-9, "{c}: {mm:?}");
    }
}

#[test]
fn atom_at_origin_gives_initial_plateau() {
    let data = IndefiniteStringData::new(
        f64::INFINITY,
        vec![0.0],
        vec![0.0],
        vec![(0.0, 1.0)],
        Vec::new(),
    )
    .unwrap();
    let (bps, cells) = cells_of(&indefinite_string_to_canonical(&data).unwrap().hamiltonian);
    assert_eq!(bps, vec![0.0, 1.0]);
    assert_eq!(
        cells,
        vec![Cell::new(1.0, 0.0, 0.0), Cell::new(0.0, 0.0, 1.0)]
    );
}

#[test]
fn string_descriptors_parse() {
    let k = parse_string_descriptor(
        r#"{"string": "krein", "w": {"kind": "power", "coef": 1.0, "exponent": 2.0}}"#,
        None,
    )
    .unwrap();
    assert_eq!(
        k,
        StringDescriptor::Krein(StringData::profile(Profile::Power {
            coef: 1.0,
            exponent: 2.0
        }))
    );
    let t = parse_string_descriptor(
        r#"{"string": "krein", "L": 2, "w": {"x": [0, 1, 1], "w": [0, 0, 1]}}"#,
        None,
    )
    .unwrap();
    assert_eq!(
        t,
        StringDescriptor::Krein(
            StringData::table(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], 2.0).unwrap()
        )
    );
    let i = parse_string_descriptor(
        r#"{"string": "indefinite", "w": {"x": [0, 1], "values": [1, -1]}, "upsilon": {"atoms": [[0.5, 2]]}}"#,
        None,
    )
    .unwrap();
    let StringDescriptor::Indefinite(d) = &i else {
        panic!()
    };
    assert_eq!(d.atoms, vec![(0.5, 2.0)]);
    assert!(i.to_canonical().is_ok());
    assert!(parse_string_descriptor(r#"{"string": "violin", "w": {}}"#, None).is_err());
}

#[test]
fn gauge_without_potential_is_identity() {
    let h = Hamiltonian::power_law(1.0);
    let zero = Hamiltonian::constant(0.0, 0.0, 0.0);
    let g = gauge_transform(
        &h,
        &zero,
        &MeshPolicy::Uniform {
            cells: 16,
            end: 2.0,
        },
    )
    .unwrap();
    for x in [0.25, 1.0, 2.0] {
        let (p, q) = (
            h.primitive_integrals(x).unwrap(),
            g.transformed.hamiltonian.primitive_integrals(x).unwrap(),
        );
        assert!(
            (p.a - q.a).abs() < 1e-14 && (p.b - q.b).abs() < 1e-14 && (p.c - q.c).abs() < 1e-14
        );
    }
}

#[test]
fn gauge_keeps_det_and_symmetry() {
    let h = Hamiltonian::constant(1.0, 0.0, 1.0);
    let q = Hamiltonian::constant(0.7, -0.4, 1.3);
    let g = gauge_transform(
        &h,
        &q,
        &MeshPolicy::Uniform {
            cells: 40,
            end: 4.0,
        },
    )
    .unwrap();
    for (x, orig, tilde) in gauge_midpoint_densities(&h, &g) {
        assert!((tilde.det() - orig.det()).abs() < 1e-10, "{x}: {tilde:?}");
        assert!(tilde.is_psd());
    }
}

#[test]
fn gauge_cesaro_means_agree_at_zero() {
    let h = Hamiltonian::constant(0.5, 0.0, 0.5);
    let q = Hamiltonian::constant(1.0, 0.0, -1.0);
    let g = gauge_transform(
        &h,
        &q,
        &MeshPolicy::Geometric {
            cells: 60,
            end: 1.0,
            ratio: 1.25,
        },
    )
    .unwrap();
    let gap = |x: f64| {
        let (p, t) = (
            h.primitive_integrals(x).unwrap(),
            g.transformed.hamiltonian.primitive_integrals(x).unwrap(),
        );
        ((p.a - t.a).abs() + (p.b - t.b).abs() + (p.c - t.c).abs()) / x
    };
    let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&x| gap(x)).collect();
    assert!(
        gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 1e-2,
        "{gaps:?}"
    );
}

#[test]
fn gauge_preserves_m_function() {
    // potential supported on [0, 2), so the continued tail is exact
    let h = Hamiltonian::constant(1.0, 0.0, 1.0);
    let q = Hamiltonian::piecewise(
        vec![0.0, 2.0],
        vec![Cell::new(0.6, 0.3, -0.2), Cell::new(0.0, 0.0, 0.0)],
        f64::INFINITY,
    )
    .unwrap();
    let g = gauge_transform(
        &h,
        &q,
        &MeshPolicy::Uniform {
            cells: 800,
            end: 2.0,
        },
    )
    .unwrap();
    assert!(g.exact_tail);
    for z in [cz(0.0, 1.0), cz(1.0, 0.5)] {
        let want = m_function_with_potential(&h, &q, z, &policy())
            .unwrap()
            .value;
        let got = m_function(&g.transformed.hamiltonian, z, &policy())
            .unwrap()
            .value;
        assert!(((got - want) / want).norm() < 1e-5, "{z}: {got} vs {want}");
    }
}

fn arb_mass_table() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 1..10).prop_map(|steps| {
        let mut pts = vec![(0.0, 0.0)];
        for (dx, dw) in steps {
            let (x, w) = *pts.last().unwrap();
            if dx + dw > 1e-3 {
                pts.push((x + dx, w + dw));
            }
        }
        pts
    })
}

proptest! {
    #[test]
    fn krein_output_is_trace_normed_diagonal(pts in arb_mass_table(), finite in any::<bool>()) {
        let end = pts.last().unwrap().0;
        let length = if finite { end + 1.0 } else { f64::INFINITY };
        let t = string_to_canonical(&StringData::table(pts, length).unwrap()).unwrap();
        for c in cells_of(&t.hamiltonian).1 {
            prop_assert_eq!(c.b, 0.0);
            prop_assert!((c.trace() - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&c.a) && (0.0..=1.0).contains(&c.c));
        }
    }

    #[test]
    fn indefinite_output_is_psd(
        cells in prop::collection::vec((0.01f64..2.0, -3.0f64..3.0, 0.0f64..2.0), 1..8),
        atoms in prop::collection::vec((0.0f64..1.0, 0.01f64..2.0), 0..3),
    ) {
        let mut grid = vec![0.0];
        for (w, _, _) in &cells[..cells.len() - 1] {
            let last = *grid.last().unwrap();
            grid.push(last + w);
        }
        let total = grid.last().unwrap() + cells.last().unwrap().0;
        let atoms = atoms.into_iter().map(|(f, m)| (f * total, m)).collect();
        let data = IndefiniteStringData::new(
            f64::INFINITY,
            grid,
            cells.iter().map(|c| c.1).collect(),
            atoms,
            cells.iter().map(|c| c.2).collect(),
        ).unwrap();
        let t = indefinite_string_to_canonical(&data).unwrap();
        for c in cells_of(&t.hamiltonian).1 {
            prop_assert!(c.det() >= -1e-12, "{:?}", c);
            prop_assert!((c.trace() - 1.0).abs() < 1e-12);
        }
    }
}
