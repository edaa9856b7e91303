//! Checks against independent computations: truncated Fock-space matrices,
//! Gaussian moment formulas, finite differences and closed-form values.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use ordquant::ehrenfest::{
    classical_flow, departure, ehrenfest_analytic, ehrenfest_numeric, trajectory_laplacian,
    BreakTime, OscillatorModel,
};
use ordquant::exprparse::{parse_operator_expr, parse_phase_expr};
use ordquant::opcore::{coherent_expectation, Kind, OperatorPoly};
use ordquant::phasespace::{PhaseMonomial, PhasePoint, PhasePoly};

const FOCK_DIM: usize = 90;

/// `X |ψ>` for one letter in a truncated Fock basis of a single mode.
fn apply_letter(kind: Kind, eta: f64, psi: &[Complex64]) -> Vec<Complex64> {
    let n = psi.len();
    let lower = |v: &[Complex64]| -> Vec<Complex64> {
        (0..n).map(|k| if k + 1 < n { v[k + 1] * ((k + 1) as f64).sqrt() } else { Complex64::zero() }).collect()
    };
    let raise = |v: &[Complex64]| -> Vec<Complex64> {
        (0..n).map(|k| if k > 0 { v[k - 1] * (k as f64).sqrt() } else { Complex64::zero() }).collect()
    };
    let (a, ad) = (lower(psi), raise(psi));
    match kind {
        Kind::A => a,
        Kind::Adag => ad,
        Kind::Q => a.iter().zip(&ad).map(|(x, y)| (x + y) * eta).collect(),
        Kind::P => a.iter().zip(&ad).map(|(x, y)| (x - y) * Complex64::new(0.0, -eta)).collect(),
    }
}

fn coherent_vector(alpha: Complex64) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(FOCK_DIM);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..FOCK_DIM {
        v.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    v
}

/// Single-mode `<α|x|α>` by explicit matrix action.
fn fock_expectation(x: &OperatorPoly, q: f64, p: f64, hbar: f64) -> Complex64 {
    let eta = (hbar / 2.0).sqrt();
    let alpha = Complex64::new(q, p) / (2.0 * hbar).sqrt();
    let psi = coherent_vector(alpha);
    let mut total = Complex64::zero();
    for (w, c) in x.terms() {
        let letters: Vec<_> = w.letters().collect();
        let mut phi = psi.clone();
        for g in letters.iter().rev() {
            phi = apply_letter(g.kind, eta, &phi);
        }
        let overlap: Complex64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
        total += c.evaluate(hbar) * overlap;
    }
    total
}

#[test]
fn coherent_expectations_match_fock_matrices() {
    let exprs = ["Q*P", "P*Q", "Q^3*P^2", "P^2*Q*P*Q", "a*ad*a", "ad^2*a^3 + 2*a*ad", "Q^4 - 3*P^4", "P*Q^2*P"];
    let centers = [(1.0, 1.0), (0.5, -1.25), (-1.5, 0.25)];
    for e in exprs {
        let x = parse_operator_expr(e).unwrap();
        for &(q, p) in &centers {
            for hbar in [1.0, 0.3] {
                let ours = coherent_expectation(&x, &PhasePoint::new(vec![q, p]).unwrap(), hbar).unwrap();
                let oracle = fock_expectation(&x, q, p, hbar);
                let scale = 1.0 + oracle.norm();
                assert!((ours - oracle).norm() <= 1e-9 * scale, "{e} at ({q},{p}) ℏ={hbar}: {ours} vs {oracle}");
            }
        }
    }
}

#[test]
fn canonical_commutator_in_fock_space() {
    let x = parse_operator_expr("Q*P - P*Q").unwrap();
    let v = fock_expectation(&x, 0.3, -0.2, 0.7);
    assert!((v - Complex64::new(0.0, 0.7)).norm() < 1e-10);
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn double_factorial_odd(k: u32) -> BigInt {
    // (2k-1)!!
    (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(2 * j - 1))
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, j| acc * BigInt::from(n - j)) / (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// `E[(c + s Z)^n]` with `s² = v`, from the binomial expansion and the
/// normal moments `E[Z^{2j}] = (2j-1)!!`.
fn gaussian_moment(c: &BigRational, v: &BigRational, n: u32) -> BigRational {
    let mut sum = BigRational::zero();
    for j in 0..=n / 2 {
        let term = BigRational::from_integer(binomial(n, 2 * j) * double_factorial_odd(j))
            * num_traits::pow(v.clone(), j as usize)
            * num_traits::pow(c.clone(), (n - 2 * j) as usize);
        sum += term;
    }
    sum
}

#[test]
fn smoothing_equals_gaussian_moments() {
    let sigma = rat(3, 5);
    let variance = &sigma / rat(2, 1);
    let centers = [(rat(1, 1), rat(0, 1)), (rat(-2, 3), rat(5, 4)), (rat(7, 2), rat(-1, 3))];
    for n in 0..=7u32 {
        for m in 0..=7u32 {
            let f = PhasePoly::monomial(PhaseMonomial::from_exponents([(0, n, m)]));
            let s = f.smooth(&ordquant::opcore::Coeff::from_rational(sigma.clone()));
            for (q, p) in &centers {
                let got = s.evaluate_exact(&[q.clone(), p.clone()]).unwrap();
                let want = gaussian_moment(q, &variance, n) * gaussian_moment(p, &variance, m);
                assert_eq!(got.as_gauss().unwrap().re, want, "q^{n} p^{m}");
                assert!(got.as_gauss().unwrap().im.is_zero());
            }
        }
    }
}

#[test]
fn symmetric_expectation_matches_fock_matrices() {
    // <α| sym(q^n p^m) |α> through the operator route and the Fock matrices
    for (n, m) in [(2, 1), (1, 3), (3, 3), (4, 0), (2, 2)] {
        let f = PhasePoly::monomial(PhaseMonomial::from_exponents([(0, n, m)]));
        let x = ordquant::opcore::quantize_symmetric_poly(&f);
        let (q, p, hbar) = (0.8, -0.6, 0.45);
        let oracle = fock_expectation(&x, q, p, hbar);
        let smoothed = f.smooth(&ordquant::opcore::Coeff::hbar()).evaluate(&PhasePoint::new(vec![q, p]).unwrap(), hbar).unwrap();
        assert!((oracle - smoothed).norm() < 1e-9, "q^{n} p^{m}: {oracle} vs {smoothed}");
    }
}

/// Central-difference Laplacian of the flowed coordinates at the center.
fn laplacian_fd(model: &OscillatorModel, t: f64) -> Vec<f64> {
    let x0 = model.center().coords().to_vec();
    let h = 1e-3;
    let f = |x: &[f64]| classical_flow(model, &PhasePoint::new(x.to_vec()).unwrap(), t).coords().to_vec();
    let f0 = f(&x0);
    let mut lap = vec![0.0; x0.len()];
    for j in 0..x0.len() {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        for i in 0..lap.len() {
            lap[i] += (fp[i] - 2.0 * f0[i] + fm[i]) / (h * h);
        }
    }
    lap
}

#[test]
fn laplacian_matches_finite_differences() {
    let model = OscillatorModel::new(3, 0.05, 0.1, vec![1.0, 0.7, 1.3], PhasePoint::new(vec![1.0, 0.2, -0.5, 0.8, 0.3, -1.1]).unwrap()).unwrap();
    for t in [0.5, 2.0, 7.5] {
        let a = trajectory_laplacian(&model, t);
        let b = laplacian_fd(&model, t);
        let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-4 * scale.max(1.0), "t={t}: {a:?} vs {b:?}");
        }
    }
}

#[test]
fn departure_matches_finite_difference_definition() {
    let model = OscillatorModel::figure_defaults(0.1);
    for t in [1.0, 5.0, 12.0] {
        let lap = laplacian_fd(&model, t);
        let norm = lap.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r0 = model.center().norm();
        let want = model.hbar() / 4.0 * norm / r0;
        let got = departure(&model, t).unwrap();
        assert!((got - want).abs() <= 1e-5 * want, "t={t}: {got} vs {want}");
    }
}

#[test]
fn figure_parameters_analytic_values() {
    // ω_typ √(S/ℏ) (1 - ℏk²/(8Λ)) with Λ = 2, S = 4, ω_typ = 2.5
    let expected = [(1.0, 3.75), (0.01, 49.875), (0.1, 2.5 * 40f64.sqrt() * (1.0 - 0.4 / 16.0))];
    for (hbar, want) in expected {
        let r = ehrenfest_analytic(&OscillatorModel::figure_defaults(hbar)).unwrap();
        let got = r.t_analytic.unwrap().value();
        assert!((got - want).abs() <= 1e-12 * want, "ℏ={hbar}: {got} vs {want}");
    }
}

#[test]
fn numeric_crossing_is_a_root_of_departure() {
    let model = OscillatorModel::figure_defaults(0.01);
    let BreakTime::Finite(t) = ehrenfest_numeric(&model).unwrap() else { panic!("finite expected") };
    assert!((departure(&model, t).unwrap() - 1.0).abs() < 1e-8);
    // no earlier crossing on a fine grid
    let steps = 20_000;
    for i in 0..steps {
        let s = t * i as f64 / steps as f64;
        assert!(departure(&model, s).unwrap() < 1.0, "earlier crossing near {s}");
    }
    assert!((t / 49.875 - 1.0).abs() <= 0.05);
}

#[test]
fn parsed_phase_expressions_evaluate_like_f64() {
    let f = parse_phase_expr("q1^2*p2 - 3/4*q2*p1 + 0.5").unwrap();
    let x = [1.5, -0.25, 2.0, 0.75];
    let v = f.evaluate(&PhasePoint::new(x.to_vec()).unwrap(), 1.0).unwrap();
    let want = x[0] * x[0] * x[3] - 0.75 * x[2] * x[1] + 0.5;
    assert!((v.re - want).abs() < 1e-14 && v.im == 0.0);
}
