use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use ordquant::ehrenfest::{
    action, classical_flow, departure, trajectory_laplacian, trajectory_laplacian_autodiff, OscillatorModel,
};
use ordquant::exprparse::{parse_operator_expr, parse_phase_expr, render_operator, render_phase};
use ordquant::liouville::{mc_average, FlowMap, GaussianEnsemble};
use ordquant::opcore::{
    canonicalize, canonicalize_closed_form, canonicalize_rewrite, coherent_expectation_exact,
    displacement_form, quantize_symmetric, quantize_symmetric_poly, symmetrize_bruteforce, to_bosonic,
    to_canonical, Coeff, CommutatorRules, Generator, Kind, OperatorPoly, OperatorWord, OrderTarget,
};
use ordquant::phasespace::{PhaseMonomial, PhasePoint, PhasePoly, PhaseVar};
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn arb_rational() -> impl Strategy<Value = BigRational> {
    (-9i64..=9, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn arb_coeff() -> impl Strategy<Value = Coeff> {
    (arb_rational(), arb_rational(), 0usize..4).prop_map(|(a, b, which)| {
        let base = Coeff::from_gauss(ordquant::opcore::GaussRational::new(a, b));
        match which {
            0 => base,
            1 => &base * &Coeff::hbar(),
            2 => &base * &Coeff::sqrt_half_hbar(),
            _ => base.scale(&rat(1, 3)),
        }
    })
}

/// Families per mode: `bosonic[m]` selects `(A, Adag)` instead of `(Q, P)`.
fn arb_op_poly(max_degree: usize, bosonic: [bool; 2]) -> impl Strategy<Value = OperatorPoly> {
    let letter = (0u32..2, any::<bool>()).prop_map(move |(mode, second)| {
        let kind = match (bosonic[mode as usize], second) {
            (false, false) => Kind::Q,
            (false, true) => Kind::P,
            (true, false) => Kind::A,
            (true, true) => Kind::Adag,
        };
        Generator::new(mode, kind)
    });
    prop::collection::vec((prop::collection::vec(letter, 0..=max_degree), arb_coeff()), 1..4).prop_map(|terms| {
        OperatorPoly::from_terms(terms.into_iter().map(|(l, c)| (OperatorWord::from_letters(l), c))).unwrap()
    })
}

fn arb_families() -> impl Strategy<Value = [bool; 2]> {
    (any::<bool>(), any::<bool>()).prop_map(|(a, b)| [a, b])
}

fn arb_target() -> impl Strategy<Value = OrderTarget> {
    prop_oneof![
        Just(OrderTarget::QP),
        Just(OrderTarget::PQ),
        Just(OrderTarget::Normal),
        Just(OrderTarget::Antinormal)
    ]
}

fn arb_phase_poly(modes: u32, max_exp: u32) -> impl Strategy<Value = PhasePoly> {
    let mono = prop::collection::vec((0..modes, 0..=max_exp, 0..=max_exp), 1..=2)
        .prop_map(PhaseMonomial::from_exponents);
    prop::collection::vec((mono, arb_rational()), 1..4).prop_map(|terms| {
        PhasePoly::from_terms(terms.into_iter().map(|(m, c)| (m, Coeff::from_rational(c))))
    })
}

fn arb_center(modes: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec(arb_rational(), 2 * modes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplication_is_associative_and_distributive(
        (a, b, c) in arb_families().prop_flat_map(|f| (arb_op_poly(3, f), arb_op_poly(3, f), arb_op_poly(3, f))),
    ) {
        let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let left = a.multiply(&(&b + &c)).unwrap();
        let right = &a.multiply(&b).unwrap() + &a.multiply(&c).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(a.multiply(&OperatorPoly::one()).unwrap(), a.clone());
    }

    #[test]
    fn rewrite_and_closed_form_agree(x in arb_families().prop_flat_map(|f| arb_op_poly(6, f)), target in arb_target()) {
        let a = canonicalize_rewrite(&x, target, &CommutatorRules::default()).unwrap();
        let b = canonicalize_closed_form(&x, target).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(canonicalize(&a, target).unwrap(), a);
    }

    #[test]
    fn reordering_preserves_expectations(x in arb_op_poly(5, [false, true]), target in arb_target(), c in arb_center(2)) {
        let y = canonicalize(&x, target).unwrap();
        prop_assert_eq!(coherent_expectation_exact(&x, &c).unwrap(), coherent_expectation_exact(&y, &c).unwrap());
    }

    #[test]
    fn basis_change_round_trips(x in arb_op_poly(5, [false, false])) {
        let back = to_canonical(&to_bosonic(&x));
        prop_assert_eq!(canonicalize(&back, OrderTarget::QP).unwrap(), canonicalize(&x, OrderTarget::QP).unwrap());
    }

    #[test]
    fn adjoint_is_an_antiautomorphism((a, b) in arb_families().prop_flat_map(|f| (arb_op_poly(3, f), arb_op_poly(3, f)))) {
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        prop_assert_eq!(a.multiply(&b).unwrap().adjoint(), b.adjoint().multiply(&a.adjoint()).unwrap());
    }

    #[test]
    fn symmetric_quantization_is_self_adjoint(n in 0u32..7, m in 0u32..7, n2 in 0u32..4, m2 in 0u32..4) {
        let x = quantize_symmetric(&PhaseMonomial::from_exponents([(0, n, m), (1, n2, m2)]));
        let adj = canonicalize(&x.adjoint(), OrderTarget::QP).unwrap();
        prop_assert_eq!(adj, x);
    }

    #[test]
    fn weyl_average_matches_closed_form(n in 0u32..=8, m in 0u32..=8) {
        prop_assume!(n + m <= 8);
        let fast = quantize_symmetric(&PhaseMonomial::from_exponents([(0, n, m)]));
        prop_assert_eq!(fast, symmetrize_bruteforce(n, m).unwrap());
    }

    #[test]
    fn displacement_form_matches_symmetric(n in 0u32..7, m in 0u32..7) {
        let ihbar = &Coeff::i() * &Coeff::hbar();
        let sym = quantize_symmetric(&PhaseMonomial::from_exponents([(0, n, m)]));
        prop_assert_eq!(displacement_form(n, m, Kind::Q, Kind::P, &ihbar), sym.clone());
        // same operator reached from the P-left side, [P, Q] = -iℏ
        let from_pq = displacement_form(m, n, Kind::P, Kind::Q, &-&ihbar);
        prop_assert_eq!(canonicalize(&from_pq, OrderTarget::QP).unwrap(), sym);
    }

    #[test]
    fn symmetric_expectation_is_smoothing(f in arb_phase_poly(2, 4), c in arb_center(2)) {
        let quantum = coherent_expectation_exact(&quantize_symmetric_poly(&f), &c).unwrap();
        let classical = f.smooth(&Coeff::hbar()).evaluate_exact(&c).unwrap();
        prop_assert_eq!(quantum, classical);
    }

    #[test]
    fn smoothing_is_a_linear_semigroup(
        f in arb_phase_poly(2, 4),
        g in arb_phase_poly(2, 4),
        s1 in arb_rational(),
        s2 in arb_rational(),
    ) {
        let (a, b) = (Coeff::from_rational(s1.abs()), Coeff::from_rational(s2.abs()));
        prop_assert_eq!(f.smooth(&a).smooth(&b), f.smooth(&(&a + &b)));
        prop_assert_eq!((&f + &g).smooth(&a), &f.smooth(&a) + &g.smooth(&a));
        prop_assert_eq!(ordquant::phasespace::inverse_smooth(&f.smooth(&a), &a), f.clone());
        prop_assert_eq!(f.smooth(&Coeff::zero()), f);
    }

    #[test]
    fn phase_render_parse_round_trip(f in arb_phase_poly(3, 4)) {
        let text = render_phase(&f);
        let back = parse_phase_expr(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(render_phase(&back), text);
    }

    #[test]
    fn operator_render_parse_round_trip(x in arb_families().prop_flat_map(|f| arb_op_poly(4, f))) {
        let text = render_operator(&x);
        let back = parse_operator_expr(&text).unwrap();
        prop_assert_eq!(&back, &x);
    }
}

fn arb_model() -> impl Strategy<Value = OscillatorModel> {
    (1usize..=4, 1u32..=5, 0.0f64..0.5, 0.01f64..1.0).prop_flat_map(|(n, k, g, hbar)| {
        (
            prop::collection::vec(0.3f64..2.0, n),
            prop::collection::vec(-1.5f64..1.5, 2 * n),
        )
            .prop_map(move |(omega, center)| {
                OscillatorModel::new(k, g, hbar, omega, PhasePoint::new(center).unwrap()).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplacian_paths_agree(model in arb_model(), t in 0.0f64..30.0) {
        let a = trajectory_laplacian(&model, t);
        let b = trajectory_laplacian_autodiff(&model, t);
        let scale = a.iter().chain(&b).fold(1e-300f64, |s, v| s.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn flow_conserves_action(model in arb_model(), t in -50.0f64..50.0, x in prop::collection::vec(-3.0f64..3.0, 8)) {
        let x = &x[..2 * model.n_modes()];
        let y = classical_flow(&model, &PhasePoint::new(x.to_vec()).unwrap(), t);
        let (l0, l1) = (action(x), action(y.coords()));
        prop_assert!((l0 - l1).abs() <= 1e-12 * l0.max(1e-300));
    }

    #[test]
    fn departure_is_mode_permutation_invariant(model in arb_model(), t in 0.0f64..20.0, shift in 0usize..4) {
        let n = model.n_modes();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let omega: Vec<f64> = perm.iter().map(|&i| model.omega()[i]).collect();
        let center: Vec<f64> = perm.iter().flat_map(|&i| [model.center().q(i), model.center().p(i)]).collect();
        let permuted = OscillatorModel::new(model.k(), model.g(), model.hbar(), omega, PhasePoint::new(center).unwrap()).unwrap();
        let (a, b) = (departure(&model, t).unwrap(), departure(&permuted, t).unwrap());
        // Λ is summed in a different order, and its last-bit change is
        // amplified by the angle g t k Λ^(k-1)
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300));
        let la = trajectory_laplacian(&model, t);
        let lb = trajectory_laplacian(&permuted, t);
        let scale = la.iter().fold(1e-300f64, |s, v| s.max(v.abs()));
        for (j, &i) in perm.iter().enumerate() {
            prop_assert!((la[2 * i] - lb[2 * j]).abs() <= 1e-9 * scale);
            prop_assert!((la[2 * i + 1] - lb[2 * j + 1]).abs() <= 1e-9 * scale);
        }
    }
}

#[test]
fn monte_carlo_is_partition_independent() {
    let ens = GaussianEnsemble::new(PhasePoint::new(vec![1.0, -0.5]).unwrap(), 0.3).unwrap();
    let f = |x: &[f64]| x[0] * x[0] * x[1];
    let flow = FlowMap::Harmonic { omega: vec![1.3] };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_average(&f, &ens, &flow, 0.7, 50_000, 11).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(3));
    assert_eq!(a, run(1));
    assert_ne!(a, mc_average(&f, &ens, &flow, 0.7, 50_000, 12).unwrap());
}

#[test]
fn phase_variables_index_interleaved() {
    assert_eq!(PhaseVar::q(2).index(), 4);
    assert_eq!(PhaseVar::p(2).index(), 5);
}
