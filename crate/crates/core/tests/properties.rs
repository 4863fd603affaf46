use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use qsslab_core::dense::{
    build_unitary, max_abs_diff, pauli_matrix, CMatrix, DensityMatrix,
};
use qsslab_core::gadget::transversal_expand;
use qsslab_core::ladder::symbolic_matches;
use qsslab_core::pauli::multiply;
use qsslab_core::protocol::{deal, operator_distance, reconstruct, SchemeParams};
use qsslab_core::random::{random_secret, rng_from_seed};
use qsslab_core::{Circuit, Gate, PauliLetter, PauliOperator, PauliString, PauliWord, ShareLayout};

const TOL: f64 = 1e-10;

fn letter() -> impl Strategy<Value = PauliLetter> {
    prop::sample::select(PauliLetter::ALL.to_vec())
}

fn word(n: usize) -> impl Strategy<Value = PauliWord> {
    prop::collection::vec(letter(), n).prop_map(|l| PauliWord::from_letters(&l))
}

fn operator(n: usize) -> impl Strategy<Value = PauliOperator> {
    prop::collection::vec((word(n), -1.0..1.0f64, -1.0..1.0f64), 1..12).prop_map(move |terms| {
        PauliOperator::from_terms(
            n,
            terms.into_iter().map(|(w, re, im)| (w, None, Complex64::new(re, im))),
        )
        .unwrap()
    })
}

fn sized_operator() -> impl Strategy<Value = PauliOperator> {
    (1usize..=4).prop_flat_map(operator)
}

/// Any unitary gate on `n` qubits, Toffoli included when `n ≥ 3`.
fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let kinds = if n >= 3 { 10 } else if n >= 2 { 9 } else { 7 };
    (0..kinds, prop::sample::subsequence((0..n).collect::<Vec<_>>(), n.min(3)).prop_shuffle())
        .prop_map(move |(k, qs)| match k {
            0 => Gate::H(qs[0]),
            1 => Gate::S(qs[0]),
            2 => Gate::Sdg(qs[0]),
            3 => Gate::X(qs[0]),
            4 => Gate::Y(qs[0]),
            5 => Gate::Z(qs[0]),
            6 => Gate::I(qs[0]),
            7 => Gate::cnot(qs[0], qs[1]),
            8 => Gate::Cz(qs[0], qs[1]),
            _ => Gate::toffoli(qs[0], qs[1], qs[2]),
        })
}

fn operator_and_gate() -> impl Strategy<Value = (PauliOperator, Gate)> {
    (1usize..=4).prop_flat_map(|n| (operator(n), gate(n)))
}

fn dense(op: &PauliOperator) -> CMatrix {
    op.to_dense(12).unwrap()
}

fn projector(n: usize, q: usize, bit: u8) -> CMatrix {
    let dim = 1usize << n;
    DMatrix::from_fn(dim, dim, |r, c| {
        let on = (r >> (n - 1 - q)) & 1 == bit as usize;
        if r == c && on {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn conjugation_matches_dense((op, g) in operator_and_gate()) {
        let u = build_unitary(&Circuit::from_gates(op.num_qubits(), [g.clone()]).unwrap(), 12).unwrap();
        let want = &u * dense(&op) * u.adjoint();
        let got = dense(&op.conjugate(&g).unwrap());
        prop_assert!(max_abs_diff(&got, &want) < TOL);
    }

    #[test]
    fn conjugation_inverts((op, g) in operator_and_gate()) {
        let back = op.conjugate(&g).unwrap().conjugate(&g.inverse().unwrap()).unwrap();
        prop_assert!(back.max_tagged_diff(&op).unwrap() < TOL);
    }

    #[test]
    fn conjugation_preserves_trace((op, g) in operator_and_gate()) {
        let after = op.conjugate(&g).unwrap();
        prop_assert!((after.trace() - op.trace()).norm() < TOL);
    }

    #[test]
    fn partial_trace_matches_dense(op in sized_operator(), mask in 0u8..16) {
        let n = op.num_qubits();
        let traced: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        let got = op.partial_trace(&traced).unwrap();
        let want = DensityMatrix::from_matrix_unchecked(dense(&op))
            .unwrap()
            .partial_trace(&traced)
            .unwrap();
        if got.num_qubits() == 0 {
            prop_assert!((got.trace() - want.matrix()[(0, 0)]).norm() < TOL);
        } else {
            prop_assert!(max_abs_diff(&dense(&got), want.matrix()) < TOL);
        }
    }

    #[test]
    fn projection_matches_dense(op in sized_operator(), q in 0usize..4, bit in 0u8..2) {
        let n = op.num_qubits();
        let q = q % n;
        let (p, post) = op.project_z(q, bit).unwrap();
        let pi = projector(n, q, bit);
        let want = &pi * dense(&op) * &pi;
        prop_assert!(max_abs_diff(&dense(&post), &want) < TOL);
        prop_assert!((Complex64::new(p, 0.0) - want.trace()).re.abs() < TOL);
    }

    #[test]
    fn dense_round_trip(op in sized_operator()) {
        let back = PauliOperator::from_dense(&dense(&op)).unwrap();
        prop_assert!(back.max_diff(&op).unwrap() < TOL);
    }

    #[test]
    fn pauli_product_matches_dense(
        (a, b, pa, pb) in (1usize..=5).prop_flat_map(|n| (word(n), word(n), 0u8..4, 0u8..4))
    ) {
        let a = PauliString::new(a, pa);
        let b = PauliString::new(b, pb);
        let prod = multiply(&a, &b).unwrap();
        let want = pauli_matrix(&a, 12).unwrap() * pauli_matrix(&b, 12).unwrap();
        prop_assert!(max_abs_diff(&pauli_matrix(&prod, 12).unwrap(), &want) < TOL);
    }

    #[test]
    fn unitaries_are_unitary(gates in (1usize..=4).prop_flat_map(|n| prop::collection::vec(gate(n), 0..12).prop_map(move |g| (n, g)))) {
        let (n, gates) = gates;
        let u = build_unitary(&Circuit::from_gates(n, gates).unwrap(), 12).unwrap();
        let id = CMatrix::identity(1 << n, 1 << n);
        prop_assert!(max_abs_diff(&(u.adjoint() * &u), &id) < TOL);
    }

    #[test]
    fn measurement_branches_are_complete(seed in any::<u64>(), n in 1usize..=4, q in 0usize..4) {
        let state = qsslab_core::random::random_state(&mut rng_from_seed(seed), n).unwrap();
        let branches = state.measure_z(q % n).unwrap();
        let total: f64 = branches.iter().map(|b| b.1).sum();
        prop_assert!((total - 1.0).abs() < TOL);
        for (_, _, post) in branches {
            prop_assert!((post.norm_squared() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn state_and_density_agree((g, seed) in (gate(3), any::<u64>())) {
        let psi = qsslab_core::random::random_state(&mut rng_from_seed(seed), 3).unwrap();
        let via_state = DensityMatrix::from_pure(&psi.apply_gate(&g).unwrap());
        let via_density = DensityMatrix::from_pure(&psi).apply_gate(&g).unwrap();
        prop_assert!(max_abs_diff(via_state.matrix(), via_density.matrix()) < TOL);
    }

    #[test]
    fn line_format_round_trips(gates in (1usize..=4).prop_flat_map(|n| prop::collection::vec(gate(n), 0..10).prop_map(move |g| (n, g)))) {
        let (n, gates) = gates;
        let c = Circuit::from_gates(n, gates).unwrap();
        prop_assert_eq!(Circuit::from_lines(&c.to_lines(), Some(n)).unwrap(), c);
    }

    #[test]
    fn ladder_closed_form_holds(m in 2usize..=101, sigma in letter()) {
        prop_assert!(symbolic_matches(m, sigma).unwrap());
    }

    #[test]
    fn transversal_gates_stay_in_one_column(n in 1usize..=6, g in gate(3)) {
        let layout = ShareLayout::new(3, 0, n);
        match transversal_expand(&g, &layout) {
            Ok(c) => prop_assert!(c.gates().iter().all(|pg| layout.is_column_local(pg))),
            Err(_) => {
                let refusable = matches!(g, Gate::Toffoli { .. }) || layout.columns().is_multiple_of(2);
                prop_assert!(refusable);
            }
        }
    }

    #[test]
    fn shares_round_trip(seed in any::<u64>(), n in 1usize..=4, s in 1usize..=2) {
        let params = SchemeParams::relaxed(n, s, 0).unwrap();
        let rho = random_secret(&mut rng_from_seed(seed), s).unwrap();
        let back = reconstruct(&deal(&params, &rho).unwrap()).unwrap();
        prop_assert!(operator_distance(&back, &rho).unwrap() < TOL);
    }
}

