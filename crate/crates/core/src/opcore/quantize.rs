//! Symmetric (Weyl) quantization of phase-space monomials.

use num_rational::BigRational;

use super::coeff::{factorial, Coeff};
use super::ordering::{canonicalize_rewrite, exp_mixed_derivative, half_neg, CommutatorRules, OrderTarget};
use super::poly::OperatorPoly;
use super::word::{Generator, Kind, OperatorWord};
use super::OpError;
use crate::phasespace::{PhaseMonomial, PhasePoly};

/// Default factorial-growth guard for [`symmetrize_bruteforce`].
pub const BRUTEFORCE_MAX_DEGREE: u32 = 10;

/// The ordering super-operator `exp(-(c/2) d_L d_R)` on one mode, where
/// `c = [L, R]`. Input words must already read `L^a R^b` on that mode.
pub fn ordering_superoperator(
    x: &OperatorPoly,
    mode: u32,
    left: Kind,
    right: Kind,
    commutator: &Coeff,
) -> Result<OperatorPoly, OpError> {
    exp_mixed_derivative(x, mode, left, right, &half_neg(commutator))
}

/// QP-ordered form of the totally symmetric operator of a phase monomial:
/// `sum_k (-iℏ/2)^k / k! (n)_k (m)_k Q^{n-k} P^{m-k}` on each mode.
pub fn quantize_symmetric(m: &PhaseMonomial) -> OperatorPoly {
    let c = &Coeff::i() * &Coeff::hbar();
    let word = OperatorWord::from_factors(m.mode_exponents().into_iter().flat_map(|(mode, (n, k))| {
        [
            (Generator::new(mode, Kind::Q), n),
            (Generator::new(mode, Kind::P), k),
        ]
    }));
    let mut x = OperatorPoly::word(word);
    for (mode, _) in m.mode_exponents() {
        x = ordering_superoperator(&x, mode, Kind::Q, Kind::P, &c)
            .expect("monomial words are QP-ordered by construction");
    }
    x
}

/// Linear extension of [`quantize_symmetric`].
pub fn quantize_symmetric_poly(f: &PhasePoly) -> OperatorPoly {
    let mut out = OperatorPoly::zero();
    for (m, c) in f.terms() {
        out = &out + &quantize_symmetric(m).scale(c);
    }
    out
}

/// Average of all distinct arrangements of `n` `Q`s and `m` `P`s (mode 0),
/// brought to QP order by rewriting.
pub fn symmetrize_bruteforce(n: u32, m: u32) -> Result<OperatorPoly, OpError> {
    symmetrize_bruteforce_with(n, m, BRUTEFORCE_MAX_DEGREE, &CommutatorRules::default())
}

pub fn symmetrize_bruteforce_with(
    n: u32,
    m: u32,
    bound: u32,
    rules: &CommutatorRules,
) -> Result<OperatorPoly, OpError> {
    if n + m > bound {
        return Err(OpError::SizeExceeded { degree: n + m, bound });
    }
    let q = Generator::new(0, Kind::Q);
    let p = Generator::new(0, Kind::P);
    let mut sum = OperatorPoly::zero();
    let mut count: u64 = 0;
    let mut letters = Vec::with_capacity((n + m) as usize);
    arrangements(n, m, &mut letters, &mut |seq| {
        let w = OperatorWord::from_letters(seq.iter().map(|&is_p| if is_p { p } else { q }));
        sum = &sum + &OperatorPoly::word(w);
        count += 1;
    });
    let avg = sum.scale(&Coeff::from_rational(BigRational::new(1.into(), count.into())));
    canonicalize_rewrite(&avg, OrderTarget::QP, rules)
}

fn arrangements(n: u32, m: u32, prefix: &mut Vec<bool>, f: &mut dyn FnMut(&[bool])) {
    if n == 0 && m == 0 {
        f(prefix);
        return;
    }
    if n > 0 {
        prefix.push(false);
        arrangements(n - 1, m, prefix, f);
        prefix.pop();
    }
    if m > 0 {
        prefix.push(true);
        arrangements(n, m - 1, prefix, f);
        prefix.pop();
    }
}

/// `(L - (c/2) d_R)^n R^m` computed by applying the shifted operand `n`
/// times to the commutative symbol, `c = [L, R]`. Single mode 0.
pub fn displacement_form(n: u32, m: u32, left: Kind, right: Kind, c: &Coeff) -> OperatorPoly {
    use std::collections::BTreeMap;
    let shift = half_neg(c);
    // symbol: (a, b) -> coefficient of L^a R^b
    let mut sym: BTreeMap<(u32, u32), Coeff> = BTreeMap::new();
    sym.insert((0, m), Coeff::one());
    for _ in 0..n {
        let mut next: BTreeMap<(u32, u32), Coeff> = BTreeMap::new();
        for ((a, b), coef) in &sym {
            *next.entry((a + 1, *b)).or_default() += coef;
            if *b > 0 {
                let d = coef.scale(&BigRational::from_integer((*b).into()));
                *next.entry((*a, b - 1)).or_default() += &(&d * &shift);
            }
        }
        next.retain(|_, v| !v.is_zero());
        sym = next;
    }
    let mut out = OperatorPoly::zero();
    for ((a, b), coef) in sym {
        let w = OperatorWord::from_factors([(Generator::new(0, left), a), (Generator::new(0, right), b)]);
        out.add_term(w, coef);
    }
    out
}

/// Number of distinct arrangements, `(n+m)! / (n! m!)`.
pub fn arrangement_count(n: u32, m: u32) -> num_bigint::BigInt {
    factorial(n + m) / (factorial(n) * factorial(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::coeff::rat;
    use crate::exprparse::render_operator;

    fn mono(n: u32, m: u32) -> PhaseMonomial {
        PhaseMonomial::from_exponents([(0, n, m)])
    }

    #[test]
    fn q2p_matches_textbook_form() {
        assert_eq!(render_operator(&quantize_symmetric(&mono(2, 1))), "Q^2*P - i*hbar*Q");
        assert_eq!(symmetrize_bruteforce(2, 1).unwrap(), quantize_symmetric(&mono(2, 1)));
    }

    #[test]
    fn pure_q_power_needs_no_correction() {
        assert_eq!(render_operator(&quantize_symmetric(&mono(5, 0))), "Q^5");
    }

    #[test]
    fn qp_and_q2p2() {
        assert_eq!(render_operator(&symmetrize_bruteforce(1, 1).unwrap()), "Q*P - 1/2*i*hbar");
        let expected = "Q^2*P^2 - 2*i*hbar*Q*P - 1/2*hbar^2";
        assert_eq!(render_operator(&quantize_symmetric(&mono(2, 2))), expected);
        assert_eq!(render_operator(&symmetrize_bruteforce(2, 2).unwrap()), expected);
    }

    #[test]
    fn bruteforce_guard() {
        assert_eq!(
            symmetrize_bruteforce(6, 5),
            Err(OpError::SizeExceeded { degree: 11, bound: 10 })
        );
        assert!(symmetrize_bruteforce_with(1, 1, 1, &CommutatorRules::default()).is_err());
    }

    #[test]
    fn superoperator_is_unitary() {
        let c = &Coeff::i() * &Coeff::hbar();
        for n in 0..=4 {
            for m in 0..=4 {
                let x = OperatorPoly::word(OperatorWord::from_factors([
                    (Generator::new(0, Kind::Q), n),
                    (Generator::new(0, Kind::P), m),
                ]));
                let s = ordering_superoperator(&x, 0, Kind::Q, Kind::P, &c).unwrap();
                let back = ordering_superoperator(&s, 0, Kind::Q, Kind::P, &-&c).unwrap();
                assert_eq!(back, x);
            }
        }
    }

    #[test]
    fn displacement_matches_series() {
        let c = &Coeff::i() * &Coeff::hbar();
        for n in 0..=4 {
            for m in 0..=4 {
                let d = displacement_form(n, m, Kind::Q, Kind::P, &c);
                assert_eq!(d, quantize_symmetric(&mono(n, m)));
            }
        }
    }

    #[test]
    fn multi_mode_is_tensor_product() {
        let m = PhaseMonomial::from_exponents([(0, 1, 1), (1, 1, 1)]);
        let s = quantize_symmetric(&m);
        // (Q0P0 - iℏ/2)(Q1P1 - iℏ/2) has four terms
        assert_eq!(s.len(), 4);
        let c = s.coeff(&OperatorWord::identity()).unwrap();
        // (-iℏ/2)² = -ℏ²/4
        assert_eq!(c, &Coeff::hbar().pow(2).scale(&rat(-1, 4)));
    }

    #[test]
    fn counts() {
        assert_eq!(arrangement_count(4, 4), 70.into());
    }
}
