//! The doubling construction end to end: represented operators satisfy the
//! commutation relations, the state is gauge-invariant quasi-free, and the
//! strongly quasi-free identity holds exactly for kernels with the strong
//! exchange symmetry and fails for a generic scalar anyon kernel.

use num_complex::Complex64;

use mcr::exchange::{ExchangeKernel, PhaseFn};
use mcr::linalg::CMatrix;
use mcr::model::DiscreteModel;
use mcr::quasifree::{validate_k, QuasiFreeContext};
use mcr::rng::SeededRng;

type C64 = Complex64;

fn k_id(s: usize, c: f64) -> CMatrix {
    CMatrix::identity(s).scale(C64::new(c, 0.0))
}

fn strong_two_component(model: &DiscreteModel) -> ExchangeKernel {
    // q2(y1, y2) = q1(y2, y1) makes the state strongly quasi-free
    ExchangeKernel::two_component(
        PhaseFn::ExpSignDiff { alpha: 0.8 },
        PhaseFn::ExpSignDiff { alpha: -0.8 },
        model,
    )
    .unwrap()
}

#[test]
fn represented_operators_satisfy_mcr() {
    let model = DiscreteModel::new(vec![0.0, 1.0], 2, 1, 4).unwrap();
    let kernel = strong_two_component(&model);
    let ctx = QuasiFreeContext::new(&kernel, &model, k_id(1, 0.4), 4).unwrap();
    let report = ctx.verify_field_mcr(2).unwrap();
    assert!(report.pass(), "{report}");

    // a genuinely transverse K as well
    let model = DiscreteModel::new(vec![0.0], 2, 2, 4).unwrap();
    let kernel = strong_two_component(&model);
    let mut k = CMatrix::identity(2).scale(C64::new(0.3, 0.0));
    k[(0, 1)] = C64::new(0.1, 0.05);
    k[(1, 0)] = C64::new(0.1, -0.05);
    let ctx = QuasiFreeContext::new(&kernel, &model, k, 4).unwrap();
    let report = ctx.verify_field_mcr(2).unwrap();
    assert!(report.pass(), "{report}");
}

#[test]
fn fock_state_is_special_case_with_k_near_zero() {
    // tiny K approximates the Fock state: rho2 ~ 0 and lambda2 ~ (g2, g1)
    let model = DiscreteModel::new(vec![0.0, 1.0], 2, 1, 2).unwrap();
    let kernel = strong_two_component(&model);
    let eps = 1e-6;
    let ctx = QuasiFreeContext::new(&kernel, &model, k_id(1, eps), 2).unwrap();
    let g = vec![C64::new(1.0, 0.0)];
    let rho = ctx.rho2(&g, &g);
    assert!(rho.norm() < 2.0 * eps);
    let lam = ctx.lambda2(&g, &g);
    assert!((lam - C64::new(1.0, 0.0)).norm() < 3.0 * eps);
}

#[test]
fn gauge_invariant_identity_holds_for_matched_counts() {
    let mut rng = SeededRng::new(2024);
    let model = DiscreteModel::new(vec![0.0, 1.0], 2, 2, 4).unwrap();
    let kernel = strong_two_component(&model);
    let ctx = QuasiFreeContext::new(&kernel, &model, k_id(2, 0.45), 4).unwrap();
    for (m, n) in [(1, 1), (2, 2)] {
        let report = ctx.verify_gauge_invariant(m, n, 4, &mut rng).unwrap();
        assert!(report.pass(), "m={m} n={n}: {report}");
    }
    for (m, n) in [(2, 1), (1, 2), (3, 1), (0, 2)] {
        let report = ctx.verify_gauge_invariant(m, n, 3, &mut rng).unwrap();
        assert!(report.pass(), "m={m} n={n}: {report}");
    }
}

#[test]
fn gauge_identity_holds_for_weak_kernels_too() {
    // gauge-invariant quasi-freeness does not need the strong condition
    let mut rng = SeededRng::new(77);
    let model = DiscreteModel::new(vec![0.0, 1.0], 1, 2, 4).unwrap();
    let kernel = ExchangeKernel::abelian(PhaseFn::ExpSignDiff { alpha: 0.9 }, &model).unwrap();
    let ctx = QuasiFreeContext::new(&kernel, &model, k_id(2, 0.5), 4).unwrap();
    for (m, n) in [(1, 1), (2, 2)] {
        let report = ctx.verify_gauge_invariant(m, n, 4, &mut rng).unwrap();
        assert!(report.pass(), "m={m} n={n}: {report}");
    }
}

#[test]
fn grading_kills_unbalanced_words() {
    let mut rng = SeededRng::new(31);
    let model = DiscreteModel::new(vec![0.0, 1.0], 2, 1, 3).unwrap();
    let kernel = strong_two_component(&model);
    let ctx = QuasiFreeContext::new(&kernel, &model, k_id(1, 0.5), 3).unwrap();
    let report = ctx.verify_gauge_grading(5, &mut rng).unwrap();
    assert!(report.pass(), "{report}");
}

#[test]
fn strong_weak_dichotomy_at_order_four() {
    let mut rng = SeededRng::new(404);

    // strong kernel: identity passes at n = 4 (and trivially at odd n)
    let model = DiscreteModel::new(vec![0.0, 1.0], 2, 1, 4).unwrap();
    let kernel = strong_two_component(&model);
    assert!(
        kernel
            .derive_tilde()
            .eval(0.0, 1.0)
            .unwrap()
            .sup_distance(&kernel.eval(1.0, 0.0).unwrap())
            .0
            < 1e-15
    );
    let ctx = QuasiFreeContext::new(&kernel, &model, k_id(1, 0.35), 4).unwrap();
    let report = ctx.verify_strongly_quasifree(4, 4, &mut rng).unwrap();
    assert!(report.pass(), "strong kernel failed:\n{report}");
    let odd = ctx.verify_strongly_quasifree(3, 3, &mut rng).unwrap();
    assert!(odd.check("field_moment_identity_n3").unwrap().pass, "{odd}");

    // generic scalar anyon kernel: the identity must fail at n = 4
    let model1 = DiscreteModel::new(vec![0.0, 1.0], 1, 1, 4).unwrap();
    let weak = ExchangeKernel::abelian(PhaseFn::ExpSignDiff { alpha: 0.9 }, &model1).unwrap();
    let ctx = QuasiFreeContext::new(&weak, &model1, k_id(1, 0.5), 4).unwrap();
    assert!(ctx.strong_condition_residual() > 1e-3);
    let report = ctx.verify_strongly_quasifree(4, 4, &mut rng).unwrap();
    let id_check = report.check("field_moment_identity_n4").unwrap();
    assert!(
        id_check.max_residual > 1e-6,
        "weak kernel unexpectedly satisfied the identity:\n{report}"
    );
    assert_eq!(report.strong_condition_holds, Some(false));

    // canonical anticommutation kernel: scalar, strong, kappa = -1
    let car = ExchangeKernel::abelian(PhaseFn::MinusOne, &model1).unwrap();
    let ctx = QuasiFreeContext::new(&car, &model1, k_id(1, 0.5), 4).unwrap();
    assert_eq!(ctx.kappa, -1.0);
    let report = ctx.verify_strongly_quasifree(4, 4, &mut rng).unwrap();
    assert!(report.pass(), "CAR failed:\n{report}");
}

#[test]
fn k_bounds_depend_on_kappa_sign() {
    // kappa = -1 caps K at 1; kappa = +1 allows any positive K
    assert!(validate_k(k_id(2, 0.99), -1.0).is_ok());
    assert!(validate_k(k_id(2, 1.01), -1.0).is_err());
    assert!(validate_k(k_id(2, 7.5), 1.0).is_ok());
}

#[test]
fn opposite_type_four_component_context() {
    // theta = (12)(34) with distinct phase classes; all constraints hold
    // with kappa = -1, and the quasi-free identities go through at r = 4.
    let model = DiscreteModel::new(vec![0.0, 1.0], 4, 1, 4).unwrap();
    let qa = PhaseFn::ExpSignDiff { alpha: 0.3 }.negated();
    let qb = PhaseFn::ExpSignDiff { alpha: 0.8 }.negated();
    let qc = PhaseFn::ExpSignDiff { alpha: 0.5 }.negated();
    let qf = PhaseFn::ExpSignDiff { alpha: 1.1 }.negated();
    let qd = PhaseFn::ExpSignDiff { alpha: 0.2 };
    let qe = PhaseFn::ExpDiff { alpha: 0.65 };
    let theta = vec![1usize, 0, 3, 2];
    let mut phases = vec![PhaseFn::One; 16];
    let classes: [(usize, usize, &PhaseFn); 16] = [
        (0, 0, &qa),
        (1, 1, &qa),
        (2, 2, &qb),
        (3, 3, &qb),
        (0, 1, &qc),
        (1, 0, &qc),
        (2, 3, &qf),
        (3, 2, &qf),
        (0, 2, &qd),
        (2, 0, &qd),
        (1, 3, &qd),
        (3, 1, &qd),
        (0, 3, &qe),
        (3, 0, &qe),
        (1, 2, &qe),
        (2, 1, &qe),
    ];
    for (i, j, q) in classes {
        phases[i * 4 + j] = q.clone();
    }
    let kernel = ExchangeKernel::opposite_type(theta, phases, &model).unwrap();
    let axioms = kernel.check_axioms(&model).unwrap();
    assert!(axioms.pass(), "{axioms}");
    let assumptions = kernel.check_assumptions(&model).unwrap();
    assert!(assumptions.pass(), "{assumptions}");
    assert_eq!(assumptions.kappa, Some(-1.0));

    let mut rng = SeededRng::new(8);
    let ctx = QuasiFreeContext::new(&kernel, &model, k_id(1, 0.6), 4).unwrap();
    let report = ctx.verify_gauge_invariant(1, 1, 4, &mut rng).unwrap();
    assert!(report.pass(), "{report}");
    let report = ctx.verify_gauge_invariant(2, 2, 2, &mut rng).unwrap();
    assert!(report.pass(), "{report}");
}

#[test]
fn mixing_weights_square_to_their_targets() {
    // K1^2 = K, K2^2 = 1 + kappa K, and the bilinear observation
    // sum_z (K2' g1)(K2 g2) - kappa sum_z (K1' g1)(K1 g2) = sum_z g1 g2
    // that produces the delta term of the mixed relation.
    let model = DiscreteModel::new(vec![0.0, 1.0], 1, 3, 2).unwrap();
    let kernel = ExchangeKernel::abelian(PhaseFn::MinusOne, &model).unwrap();
    let mut k = CMatrix::identity(3).scale(C64::new(0.4, 0.0));
    k[(0, 1)] = C64::new(0.1, 0.07);
    k[(1, 0)] = C64::new(0.1, -0.07);
    k[(1, 2)] = C64::new(-0.05, 0.02);
    k[(2, 1)] = C64::new(-0.05, -0.02);
    let ctx = QuasiFreeContext::new(&kernel, &model, k.clone(), 2).unwrap();
    assert_eq!(ctx.kappa, -1.0);

    let k1 = ctx.k1().clone();
    let k2 = ctx.k2().clone();
    assert!(k1.mul(&k1).sub(&k).sup_norm() < 1e-10);
    let target = CMatrix::identity(3).sub(&k); // 1 + kappa K with kappa = -1
    assert!(k2.mul(&k2).sub(&target).sup_norm() < 1e-10);

    let conj = |m: &CMatrix| mcr::exchange::matrix_conjugate(m);
    let (k1c, k2c) = (conj(&k1), conj(&k2));
    let mut rng = SeededRng::new(17);
    for _ in 0..5 {
        let g1 = rng.complex_vector(3);
        let g2 = rng.complex_vector(3);
        let dot = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
        let lhs = dot(&k2c.mul_vec(&g1), &k2.mul_vec(&g2))
            - dot(&k1c.mul_vec(&g1), &k1.mul_vec(&g2)) * C64::new(ctx.kappa, 0.0);
        let rhs = dot(&g1, &g2);
        assert!((lhs - rhs).norm() < 1e-10);
    }
}

#[test]
fn lambda2_unit_vector_frozen_value() {
    // K = c * I with kappa = -1 on a unit transverse vector:
    // (g, g) + (K g, g) + kappa (g, K g) = 1 + c - c = 1
    let model = DiscreteModel::new(vec![0.0, 1.0], 1, 2, 2).unwrap();
    let kernel = ExchangeKernel::abelian(PhaseFn::MinusOne, &model).unwrap();
    let c = 0.37;
    let ctx = QuasiFreeContext::new(&kernel, &model, k_id(2, c), 2).unwrap();
    let g = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let lam = ctx.lambda2(&g, &g);
    assert!((lam - C64::new(1.0, 0.0)).norm() < 1e-14);
    // rho2 on the same data is just c
    assert!((ctx.rho2(&g, &g) - C64::new(c, 0.0)).norm() < 1e-14);
    // orthogonal transverse vectors decouple
    let h = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    assert!(ctx.rho2(&g, &h).norm() < 1e-14);
}

#[test]
fn three_component_dichotomy_tracks_the_exchange_condition() {
    // with a third abelian component, the strong exchange condition needs
    // the paired symmetry of the opposite types AND real third-component
    // phases; a complex mixed phase must break the order-four identity
    let mut rng = SeededRng::new(33);
    let model = DiscreteModel::new(vec![0.0, 1.0], 3, 1, 4).unwrap();
    let q = |alpha: f64| PhaseFn::ExpSignDiff { alpha };

    let strong = ExchangeKernel::three_component(
        q(0.5).negated(),
        q(-0.5).negated(),
        PhaseFn::MinusOne,
        PhaseFn::MinusOne,
        &model,
    )
    .unwrap();
    let ctx = QuasiFreeContext::new(&strong, &model, k_id(1, 0.4), 4).unwrap();
    assert!(ctx.strong_condition_residual() < 1e-12);
    let report = ctx.verify_strongly_quasifree(4, 3, &mut rng).unwrap();
    assert!(
        report.pass(),
        "strong three-component kernel failed:\n{report}"
    );

    // same opposite-type phases, but a genuinely complex mixed phase q4
    let weak = ExchangeKernel::three_component(
        q(0.5).negated(),
        q(-0.5).negated(),
        PhaseFn::MinusOne,
        q(0.7),
        &model,
    )
    .unwrap();
    // the construction itself still goes through: assumptions hold
    let ctx = QuasiFreeContext::new(&weak, &model, k_id(1, 0.4), 4).unwrap();
    assert!(ctx.strong_condition_residual() > 1e-3);
    let report = ctx.verify_strongly_quasifree(4, 3, &mut rng).unwrap();
    let id = report.check("field_moment_identity_n4").unwrap();
    assert!(
        id.max_residual > 1e-6,
        "complex mixed phase unexpectedly satisfied the identity:\n{report}"
    );
}
