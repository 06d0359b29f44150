//! Property-based invariants over randomized structures.

use num_complex::Complex64;
use proptest::prelude::*;

use mcr::exchange::{ExchangeKernel, PhaseFn};
use mcr::fock::FockSpace;
use mcr::model::DiscreteModel;
use mcr::pairings::PairPartition;
use mcr::tensor::Tensor;

type C64 = Complex64;

fn pairing_strategy(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    // a shuffled list of 2n positions read off two at a time
    Just((0..2 * n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|order| order.chunks(2).map(|c| (c[0], c[1])).collect())
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shadows_are_noncrossing(pairs in (1usize..=5).prop_flat_map(pairing_strategy)) {
        let xi = PairPartition::new(&pairs).unwrap();
        prop_assert_eq!(xi.shadow().crossings(), 0);
    }

    #[test]
    fn canonical_form_has_descending_lefts(pairs in (1usize..=5).prop_flat_map(pairing_strategy)) {
        let xi = PairPartition::new(&pairs).unwrap();
        let lefts = xi.left_positions();
        for w in lefts.windows(2) {
            prop_assert!(w[0] > w[1]);
        }
        prop_assert_eq!(*lefts.last().unwrap(), 0);
        // trace pairs partition all positions
        let mut seen = vec![false; xi.len()];
        for (a, b) in xi.trace_pairs() {
            prop_assert!(!seen[a] && !seen[b]);
            seen[a] = true;
            seen[b] = true;
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn phase_functions_are_unitary_and_conjugate_swap(
        alpha in -3.0f64..3.0,
        y1 in -5.0f64..5.0,
        y2 in -5.0f64..5.0,
    ) {
        for q in [
            PhaseFn::ExpSignDiff { alpha },
            PhaseFn::ExpDiff { alpha },
            PhaseFn::ExpSignDiff { alpha }.negated(),
            PhaseFn::Product { factors: vec![
                PhaseFn::ExpSignDiff { alpha },
                PhaseFn::ExpDiff { alpha: -0.5 * alpha },
            ]},
        ] {
            let v = q.eval(y1, y2);
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            prop_assert!((v.conj() - q.eval(y2, y1)).norm() < 1e-12);
        }
    }

    #[test]
    fn slot_reversal_conjugation_is_involutive(data in complex_vec(16)) {
        let t = Tensor::from_vec(2, 4, data);
        let back = t.reverse_slots_conj().reverse_slots_conj();
        prop_assert!(t.sup_distance(&back) < 1e-15);
    }

    #[test]
    fn braid_operators_are_involutions(data in complex_vec(64), alpha in -2.0f64..2.0) {
        let model = DiscreteModel::new(vec![0.0, 1.0], 2, 1, 3).unwrap();
        let kernel = ExchangeKernel::two_component(
            PhaseFn::ExpSignDiff { alpha },
            PhaseFn::ExpDiff { alpha: 0.4 * alpha },
            &model,
        ).unwrap();
        let space = FockSpace::new(&kernel, &model).unwrap();
        let t = Tensor::from_vec(4, 3, data);
        for slot in 0..2 {
            let back = space.exchange(&space.exchange(&t, slot), slot);
            prop_assert!(back.sup_distance(&t) < 1e-12);
        }
    }

    #[test]
    fn symmetrized_tensors_are_fixed_points(data in complex_vec(64), alpha in -2.0f64..2.0) {
        let model = DiscreteModel::new(vec![0.0, 1.0], 2, 1, 3).unwrap();
        let kernel = ExchangeKernel::two_component(
            PhaseFn::ExpSignDiff { alpha },
            PhaseFn::One,
            &model,
        ).unwrap();
        let space = FockSpace::new(&kernel, &model).unwrap();
        let t = Tensor::from_vec(4, 3, data);
        let sym = space.symmetrize(&t);
        // P t is U-invariant: U_i P t = P t
        for slot in 0..2 {
            prop_assert!(space.exchange(&sym, slot).sup_distance(&sym) < 1e-12);
        }
    }
}
