mod common;

use common::*;
use noiseharvest_core::pauli::*;
use proptest::prelude::*;

fn letter() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(letter(), n), 0u8..4).prop_map(|(l, k)| PauliString::new(l, k))
}

fn pair() -> impl Strategy<Value = (PauliString, PauliString)> {
    (1usize..=5).prop_flat_map(|n| (string(n), string(n)))
}

fn dense(p: &PauliString) -> M {
    p.to_dense().unwrap()
}

fn clifford(n: usize) -> impl Strategy<Value = Clifford> {
    (0u8..6, 0..n, 1..n).prop_map(move |(k, a, d)| {
        let b = (a + d) % n;
        match k {
            0 => Clifford::X(a),
            1 => Clifford::H(a),
            2 => Clifford::S(a),
            3 => Clifford::Sdg(a),
            4 => Clifford::Cz(a, b),
            _ => Clifford::Cnot { control: a, target: b },
        }
    })
}

fn clifford_dense(n: usize, g: Clifford) -> M {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let one = |rows: [[(f64, f64); 2]; 2]| M::from_fn(2, 2, |i, j| c(rows[i][j].0, rows[i][j].1));
    let proj = |bit: usize| one(if bit == 0 { [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (0.0, 0.0)]] } else { [[(0.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]] });
    let controlled = |ctl: usize, tgt: usize, u: M| {
        let mut on: Vec<M> = (0..n).map(|_| eye(2)).collect();
        on[ctl] = proj(1);
        on[tgt] = u;
        let mut off: Vec<M> = (0..n).map(|_| eye(2)).collect();
        off[ctl] = proj(0);
        kron_all(&on) + kron_all(&off)
    };
    match g {
        Clifford::X(q) => on_qubit(n, q, &one([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])),
        Clifford::H(q) => on_qubit(n, q, &one([[(s, 0.0), (s, 0.0)], [(s, 0.0), (-s, 0.0)]])),
        Clifford::S(q) => on_qubit(n, q, &one([[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (0.0, 1.0)]])),
        Clifford::Sdg(q) => on_qubit(n, q, &one([[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (0.0, -1.0)]])),
        Clifford::Cz(a, b) => controlled(a, b, z()),
        Clifford::Cnot { control, target } => controlled(control, target, one([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])),
    }
}

/// Random register: one or two impurities, then bath and ancilla modes in any order.
fn ordering() -> impl Strategy<Value = FermionOrdering> {
    (1usize..=2, prop::collection::vec(any::<bool>(), 1..=4)).prop_map(|(n_imp, rest)| {
        let mut roles = vec![ModeRole::Impurity; n_imp];
        roles.extend(rest.into_iter().map(|a| if a { ModeRole::Ancilla } else { ModeRole::Bath }));
        FermionOrdering::new(roles).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_matches_dense_product((a, b) in pair()) {
        let p = a.mul(&b).unwrap();
        prop_assert!(max_abs(&(dense(&p) - dense(&a) * dense(&b))) <= 1e-14);
        let (ab, ba) = (dense(&a) * dense(&b), dense(&b) * dense(&a));
        let commute = max_abs(&(&ab - &ba)) <= 1e-14;
        let anti = max_abs(&(&ab + &ba)) <= 1e-14;
        prop_assert_eq!(a.commutes_with(&b), commute);
        prop_assert!(commute != anti);
    }

    #[test]
    fn parse_round_trips_display(p in (1usize..=6).prop_flat_map(string)) {
        prop_assert_eq!(PauliString::parse(&p.to_string()).unwrap(), p.clone());
        prop_assert_eq!(p.dagger().dagger(), p.clone());
        prop_assert!(max_abs(&(dense(&p.dagger()) - dense(&p).adjoint())) <= 1e-15);
    }

    #[test]
    fn clifford_conjugation_matches_dense(
        (p, gates) in (2usize..=5).prop_flat_map(|n| (string(n), prop::collection::vec(clifford(n), 1..6)))
    ) {
        let n = p.n_qubits();
        let mut got = p.clone();
        let mut want = dense(&p);
        for &g in &gates {
            got = got.conjugate(g);
            let u = clifford_dense(n, g);
            want = &u * want * u.adjoint();
            prop_assert!(max_abs(&(dense(&got) - &want)) <= 1e-12, "after {g:?}");
        }
        for &g in gates.iter().rev() {
            got = got.conjugate(g.inverse());
        }
        prop_assert_eq!(got, p);
    }

    #[test]
    fn jordan_wigner_operators_obey_canonical_anticommutation(ord in ordering()) {
        let n = ord.n_modes();
        let cs: Vec<M> = (0..n).map(|m| jw_annihilation(m, &ord).unwrap().to_dense().unwrap()).collect();
        for i in 0..n {
            for j in 0..n {
                let cd = cs[j].adjoint();
                let anti = &cs[i] * &cd + &cd * &cs[i];
                let want = if i == j { eye(1 << n) } else { M::zeros(1 << n, 1 << n) };
                prop_assert!(max_abs(&(anti - want)) <= 1e-14);
                prop_assert!(max_abs(&(&cs[i] * &cs[j] + &cs[j] * &cs[i])) <= 1e-14);
            }
            let cr = jw_creation(i, &ord).unwrap().to_dense().unwrap();
            prop_assert!(max_abs(&(cr - cs[i].adjoint())) <= 1e-15);
        }
    }

    #[test]
    fn majoranas_are_involutions_anticommuting_with_other_modes(ord in ordering()) {
        let n = ord.n_modes();
        for a in 0..n {
            let g = jw_majorana(a, &ord);
            if ord.role(a) != ModeRole::Ancilla {
                prop_assert!(g.is_err());
                continue;
            }
            let g = dense(&g.unwrap());
            let ca = jw_annihilation(a, &ord).unwrap().to_dense().unwrap();
            prop_assert!(max_abs(&(&g - &ca - ca.adjoint())) <= 1e-15);
            prop_assert!(max_abs(&(&g * &g - eye(1 << n))) <= 1e-14);
            for m in (0..n).filter(|&m| m != a) {
                let cm = jw_annihilation(m, &ord).unwrap().to_dense().unwrap();
                prop_assert!(max_abs(&(&g * &cm + &cm * &g)) <= 1e-14);
            }
        }
    }

    #[test]
    fn bar_operators_append_the_parity(ord in ordering()) {
        let n = ord.n_modes();
        let par = dense(&ord.parity());
        for build in [jw_annihilation, jw_creation] {
            let d = build(0, &ord).unwrap();
            let dd = d.to_dense().unwrap();
            prop_assert!(max_abs(&(bar_operator(&d, &ord).unwrap().to_dense().unwrap() - &dd * &par)) <= 1e-14);
            prop_assert!(max_abs(&(bar_operator_left(&d, &ord).unwrap().to_dense().unwrap() - &par * &dd)) <= 1e-14);
        }
        prop_assert!(max_abs(&(&par * &par - eye(1 << n))) <= 1e-14);
    }
}

#[test]
fn orderings_must_start_with_impurities() {
    assert!(FermionOrdering::new(vec![]).is_err());
    assert!(FermionOrdering::new(vec![ModeRole::Bath, ModeRole::Impurity]).is_err());
    assert!(FermionOrdering::new(vec![ModeRole::Impurity, ModeRole::Ancilla, ModeRole::Bath]).is_ok());
    assert!(jw_annihilation(3, &FermionOrdering::star(2)).is_err());
    assert!(PauliString::parse("XQ").is_err());
    assert!(PauliString::parse("-i").is_err());
}
