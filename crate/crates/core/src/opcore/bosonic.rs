//! Change of generators between `(Q, P)` and `(A, Adag)`, and normal ordering.
//!
//! `Q = η (A + Adag)`, `P = i η (Adag - A)` with `η = sqrt(ℏ/2)`;
//! inversely `A = (Q + iP) / 2η`, `Adag = (Q - iP) / 2η`.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::coeff::{binomial, factorial, falling, rat, Coeff, GaussRational};
use super::ordering::{canonicalize, canonicalize_closed_form, OrderTarget};
use super::poly::OperatorPoly;
use super::word::{Generator, Kind, OperatorWord};
use super::OpError;
use crate::phasespace::PhaseMonomial;

fn substitute<F>(x: &OperatorPoly, f: F) -> OperatorPoly
where
    F: Fn(Generator) -> Option<OperatorPoly>,
{
    x.map_words(|w| {
        let mut acc = OperatorPoly::one();
        for g in w.letters() {
            let repl = f(g).unwrap_or_else(|| OperatorPoly::word(OperatorWord::from_letters([g])));
            acc = acc.mul_unchecked(&repl);
        }
        acc
    })
}

fn gen(mode: u32, kind: Kind) -> OperatorPoly {
    OperatorPoly::generator(mode, kind)
}

/// Expands every `Q`/`P` letter in bosonic generators. Bosonic modes pass through.
pub fn to_bosonic(x: &OperatorPoly) -> OperatorPoly {
    let eta = Coeff::sqrt_half_hbar();
    let i_eta = &Coeff::i() * &eta;
    substitute(x, |g| match g.kind {
        Kind::Q => Some((&gen(g.mode, Kind::A) + &gen(g.mode, Kind::Adag)).scale(&eta)),
        Kind::P => Some((&gen(g.mode, Kind::Adag) - &gen(g.mode, Kind::A)).scale(&i_eta)),
        _ => None,
    })
}

/// Inverse substitution of [`to_bosonic`].
pub fn to_canonical(x: &OperatorPoly) -> OperatorPoly {
    // 1/(2η) = η^{-1}/2
    let inv = Coeff::graded(GaussRational::from_rational(rat(1, 2)), -1);
    let i = Coeff::i();
    substitute(x, |g| {
        let q = gen(g.mode, Kind::Q);
        let ip = gen(g.mode, Kind::P).scale(&i);
        match g.kind {
            Kind::A => Some((&q + &ip).scale(&inv)),
            Kind::Adag => Some((&q - &ip).scale(&inv)),
            _ => None,
        }
    })
}

/// All `Adag` left of all `A` per mode (rewriting route). Canonical modes are
/// converted first.
pub fn to_normal_order(x: &OperatorPoly) -> Result<OperatorPoly, OpError> {
    canonicalize(x, OrderTarget::Normal)
}

/// Normal order via the closed-form shift route.
pub fn to_normal_order_closed(x: &OperatorPoly) -> Result<OperatorPoly, OpError> {
    canonicalize_closed_form(x, OrderTarget::Normal)
}

/// Normal-ordered form of the symmetric quantization of a phase monomial,
/// computed without any operator reordering: the classical monomial is
/// written in amplitudes `q = η(α + α*)`, `p = iη(α* - α)`, expanded by a
/// double binomial sum, smoothed by `exp(½ d_α d_α*)`, and each
/// `α*^a α^b` is read as `Adag^a A^b`.
pub fn symmetric_normal_form(m: &PhaseMonomial) -> OperatorPoly {
    let mut acc = OperatorPoly::one();
    for (mode, (n, k_p)) in m.mode_exponents() {
        // key: (power of α*, power of α)
        let mut sym: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
        for k in 0..=n {
            for l in 0..=k_p {
                let sign = if l % 2 == 0 { 1 } else { -1 };
                let c = BigRational::from_integer(binomial(n, k) * binomial(k_p, l) * sign);
                let key = ((n - k) + (k_p - l), k + l);
                let slot = sym.entry(key).or_insert_with(|| rat(0, 1));
                *slot += c;
            }
        }
        // prefactor η^{n+m} i^m
        let pref = Coeff::graded(GaussRational::i().pow(k_p), (n + k_p) as i32);
        let mut mode_poly = OperatorPoly::zero();
        for ((a, b), c) in sym {
            for j in 0..=a.min(b) {
                let w = BigRational::new(falling(a, j) * falling(b, j), factorial(j))
                    * num_traits::pow(rat(1, 2), j as usize);
                let word = OperatorWord::from_factors([
                    (Generator::new(mode, Kind::Adag), a - j),
                    (Generator::new(mode, Kind::A), b - j),
                ]);
                mode_poly.add_term(word, pref.scale(&(&c * &w)));
            }
        }
        acc = acc.mul_unchecked(&mode_poly);
    }
    acc
}
