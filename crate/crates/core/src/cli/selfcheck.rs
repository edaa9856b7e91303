//! Exact identity suites behind `ordquant selfcheck`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ehrenfest::{trajectory_laplacian, trajectory_laplacian_autodiff, OscillatorModel};
use crate::exprparse::{render_coeff, render_operator};
use crate::opcore::{
    canonicalize_closed_form, canonicalize_rewrite, coherent_expectation_exact_with,
    quantize_symmetric, symmetrize_bruteforce_with, Coeff, CommutatorRules, Generator, Kind,
    OperatorPoly, OperatorWord, OrderTarget, BRUTEFORCE_MAX_DEGREE,
};
use crate::phasespace::{PhaseMonomial, PhasePoint};

pub const SUITES: &[&str] = &["symmetrize", "ordering", "coherent-symmetric", "coherent-raw", "commutator", "laplacian"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub suite: String,
    pub case: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
    pub first_failure: Option<Failure>,
}

struct Tally<'a> {
    name: &'a str,
    passed: usize,
    failures: Vec<Failure>,
}

impl Tally<'_> {
    fn check(&mut self, case: String, expected: String, actual: String) {
        if expected == actual {
            self.passed += 1;
        } else {
            self.failures.push(Failure { suite: self.name.to_string(), case, expected, actual });
        }
    }
}

fn word_qp(n: u32, m: u32) -> OperatorPoly {
    OperatorPoly::word(OperatorWord::from_factors([
        (Generator::new(0, Kind::Q), n),
        (Generator::new(0, Kind::P), m),
    ]))
}

fn centers() -> Vec<Vec<BigRational>> {
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    vec![
        vec![r(0, 1), r(0, 1)],
        vec![r(1, 1), r(1, 1)],
        vec![r(-3, 2), r(2, 5)],
        vec![r(7, 3), r(-1, 4)],
    ]
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: u32) -> OperatorPoly {
    let families: [(Kind, Kind); 2] = if rng.random_bool(0.5) {
        [(Kind::Q, Kind::P), (Kind::A, Kind::Adag)]
    } else {
        [(Kind::A, Kind::Adag), (Kind::Q, Kind::P)]
    };
    let mut x = OperatorPoly::zero();
    for _ in 0..rng.random_range(1..=3) {
        let degree = rng.random_range(0..=max_degree);
        let letters = (0..degree).map(|_| {
            let mode = rng.random_range(0..2u32);
            let (a, b) = families[mode as usize];
            Generator::new(mode, if rng.random_bool(0.5) { a } else { b })
        });
        let w = OperatorWord::from_letters(letters.collect::<Vec<_>>());
        let c = Coeff::from_int(rng.random_range(-3..=3));
        x = &x + &OperatorPoly::term(w, c);
    }
    x
}

fn run_suite(name: &str, rules: &CommutatorRules) -> Tally<'static> {
    let name: &'static str = SUITES.iter().find(|s| **s == name).expect("known suite");
    let mut t = Tally { name, passed: 0, failures: Vec::new() };
    match name {
        "symmetrize" => {
            for total in 0..=6u32 {
                for n in 0..=total {
                    let m = total - n;
                    let fast = quantize_symmetric(&PhaseMonomial::from_exponents([(0, n, m)]));
                    let brute = symmetrize_bruteforce_with(n, m, BRUTEFORCE_MAX_DEGREE, rules)
                        .expect("within bound");
                    t.check(format!("q^{n}*p^{m}"), render_operator(&fast), render_operator(&brute));
                }
            }
        }
        "ordering" => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
            let targets = [OrderTarget::QP, OrderTarget::PQ, OrderTarget::Normal, OrderTarget::Antinormal];
            for i in 0..40 {
                let x = random_poly(&mut rng, 6);
                let target = targets[i % targets.len()];
                let closed = canonicalize_closed_form(&x, target).expect("consistent families");
                let rewritten = canonicalize_rewrite(&x, target, rules).expect("consistent families");
                t.check(
                    format!("{} -> {target:?}", render_operator(&x)),
                    render_operator(&closed),
                    render_operator(&rewritten),
                );
            }
        }
        "coherent-symmetric" | "coherent-raw" | "commutator" => {
            let hbar = Coeff::hbar();
            // 1/(iℏ) = -i/ℏ
            let inv_ih = &-Coeff::i() * &Coeff::inv_hbar();
            for n in 0..=4u32 {
                for m in 0..=4u32 {
                    let mono = PhaseMonomial::from_exponents([(0, n, m)]);
                    let f = crate::phasespace::PhasePoly::monomial(mono.clone());
                    let (op, classical) = match name {
                        "coherent-symmetric" => (quantize_symmetric(&mono), f.smooth(&hbar)),
                        "coherent-raw" => (word_qp(n, m), f.weyl_mixed_factor(&hbar).smooth(&hbar)),
                        _ => {
                            let qn = word_qp(n, 0);
                            let pm = word_qp(0, m);
                            let comm = &qn.multiply(&pm).expect("one family")
                                - &pm.multiply(&qn).expect("one family");
                            (comm.scale(&inv_ih), f.sinc_commutator(&hbar).smooth(&hbar))
                        }
                    };
                    for c in centers() {
                        let quantum = coherent_expectation_exact_with(&op, &c, rules).expect("one mode");
                        let smoothed = classical.evaluate_exact(&c).expect("one mode");
                        t.check(
                            format!("n={n} m={m} center=({}, {})", c[0], c[1]),
                            render_coeff(&smoothed),
                            render_coeff(&quantum),
                        );
                    }
                }
            }
        }
        "laplacian" => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x1a9);
            for _ in 0..40 {
                let n = rng.random_range(1..=4usize);
                let k = rng.random_range(1..=5u32);
                let g = rng.random_range(0.0..0.5);
                let omega: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
                let center: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.5..1.5)).collect();
                let model = OscillatorModel::new(k, g, 1.0, omega, PhasePoint::new(center).expect("finite"))
                    .expect("valid model");
                let time = rng.random_range(0.0..20.0);
                let a = trajectory_laplacian(&model, time);
                let b = trajectory_laplacian_autodiff(&model, time);
                let scale = a.iter().chain(&b).fold(0.0f64, |s, v| s.max(v.abs()));
                let ok = a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-10 * scale.max(1e-300));
                let case = format!("N={n} k={k} g={g} t={time}");
                if ok {
                    t.passed += 1;
                } else {
                    t.failures.push(Failure {
                        suite: name.to_string(),
                        case,
                        expected: format!("{a:?}"),
                        actual: format!("{b:?}"),
                    });
                }
            }
        }
        _ => unreachable!(),
    }
    t
}

/// Runs all suites, or only `filter`. Unknown filter names are rejected.
pub fn run(filter: Option<&str>, rules: &CommutatorRules) -> Result<Summary, String> {
    let names: Vec<&str> = match filter {
        Some(f) if SUITES.contains(&f) => vec![f],
        Some(f) => return Err(format!("unknown suite '{f}'; expected one of {}", SUITES.join(", "))),
        None => SUITES.to_vec(),
    };
    let mut suites = Vec::new();
    let mut first_failure = None;
    for name in names {
        let tally = run_suite(name, rules);
        if first_failure.is_none() {
            first_failure = tally.failures.first().cloned();
        }
        suites.push(SuiteResult { name: name.to_string(), passed: tally.passed, failed: tally.failures.len() });
    }
    Ok(Summary { all_passed: first_failure.is_none(), suites, first_failure })
}

/// `[Q, P] = 2iℏ` for fault injection.
pub fn corrupted_rules() -> CommutatorRules {
    CommutatorRules {
        q_p: (&Coeff::i() * &Coeff::hbar()).scale(&BigRational::from_integer(2.into())),
        ..CommutatorRules::default()
    }
}
