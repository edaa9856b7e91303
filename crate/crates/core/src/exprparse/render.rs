use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::opcore::{Coeff, Kind, OperatorPoly, OperatorWord};
use crate::phasespace::{Coord, PhaseMonomial, PhasePoly};

/// One printed summand: `sign * magnitude * [i] * constants * word`.
struct Piece {
    negative: bool,
    factors: Vec<String>,
}

fn pow_text(name: &str, e: u32) -> String {
    if e == 1 {
        name.to_string()
    } else {
        format!("{name}^{e}")
    }
}

fn two_pow(e: u32) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(2), e as usize))
}

/// Rewrites `value * η^grade` (η² = ℏ/2) in terms of the printable
/// constants `hbar`, `sqrt_half_hbar`, `inv_hbar`.
fn grade_factors(grade: i32) -> (BigRational, Vec<String>) {
    let mut names = Vec::new();
    let scale;
    if grade >= 0 {
        let h = (grade / 2) as u32;
        scale = BigRational::one() / two_pow(h);
        if h > 0 {
            names.push(pow_text("hbar", h));
        }
        if grade % 2 == 1 {
            names.push("sqrt_half_hbar".to_string());
        }
    } else {
        let g = (-grade) as u32;
        let j = g.div_ceil(2);
        scale = two_pow(j);
        if g % 2 == 1 {
            names.push("sqrt_half_hbar".to_string());
        }
        names.push(pow_text("inv_hbar", j));
    }
    (scale, names)
}

fn coeff_pieces(c: &Coeff, word: &str) -> Vec<Piece> {
    let mut out = Vec::new();
    for term in c.terms() {
        let (scale, consts) = grade_factors(term.hbar_halfexp);
        for (part, imaginary) in [(&term.value.re, false), (&term.value.im, true)] {
            if part.is_zero() {
                continue;
            }
            let v = part * &scale;
            let mut factors = Vec::new();
            let mag = v.abs();
            if !mag.is_one() {
                factors.push(mag.to_string());
            }
            if imaginary {
                factors.push("i".to_string());
            }
            factors.extend(consts.iter().cloned());
            if !word.is_empty() {
                factors.push(word.to_string());
            }
            if factors.is_empty() {
                factors.push("1".to_string());
            }
            out.push(Piece { negative: v.is_negative(), factors });
        }
    }
    out
}

fn join(pieces: Vec<Piece>) -> String {
    if pieces.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (n, p) in pieces.into_iter().enumerate() {
        let body = p.factors.join("*");
        match (n, p.negative) {
            (0, false) => s.push_str(&body),
            (0, true) => {
                s.push('-');
                s.push_str(&body);
            }
            (_, false) => {
                s.push_str(" + ");
                s.push_str(&body);
            }
            (_, true) => {
                s.push_str(" - ");
                s.push_str(&body);
            }
        }
    }
    s
}

/// Exact coefficient alone, in the expression grammar.
pub fn render_coeff(c: &Coeff) -> String {
    join(coeff_pieces(c, ""))
}

fn phase_word(m: &PhaseMonomial, indexed: bool) -> String {
    m.vars()
        .map(|(v, e)| {
            let base = match v.coord {
                Coord::Q => "q",
                Coord::P => "p",
            };
            let name = if indexed { format!("{base}{}", v.mode + 1) } else { base.to_string() };
            pow_text(&name, e)
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Deterministic text in the parser's grammar; `parse_phase_expr` inverts it.
/// Single-mode polynomials print `q, p`, otherwise `q1, p1, q2, ...`.
pub fn render_phase(f: &PhasePoly) -> String {
    let indexed = f.n_modes() > 1;
    let mut pieces = Vec::new();
    for (m, c) in f.terms() {
        pieces.extend(coeff_pieces(c, &phase_word(m, indexed)));
    }
    join(pieces)
}

fn operator_word(w: &OperatorWord, indexed: bool) -> String {
    w.factors()
        .iter()
        .map(|(g, e)| {
            let base = match g.kind {
                Kind::Q => "Q",
                Kind::P => "P",
                Kind::A => "a",
                Kind::Adag => "ad",
            };
            let name = if indexed { format!("{base}{}", g.mode + 1) } else { base.to_string() };
            pow_text(&name, *e)
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Deterministic text in the parser's grammar; `parse_operator_expr` inverts it.
pub fn render_operator(x: &OperatorPoly) -> String {
    let indexed = x.terms().any(|(w, _)| w.modes().any(|m| m > 0));
    let mut pieces = Vec::new();
    for (w, c) in x.terms() {
        pieces.extend(coeff_pieces(c, &operator_word(w, indexed)));
    }
    join(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprparse::parse_phase_expr;
    use crate::opcore::GaussRational;

    #[test]
    fn grade_constants() {
        assert_eq!(render_coeff(&Coeff::hbar()), "hbar");
        assert_eq!(render_coeff(&Coeff::sqrt_half_hbar()), "sqrt_half_hbar");
        assert_eq!(render_coeff(&Coeff::inv_hbar()), "inv_hbar");
        assert_eq!(render_coeff(&Coeff::graded(GaussRational::one(), -1)), "2*sqrt_half_hbar*inv_hbar");
        assert_eq!(render_coeff(&Coeff::graded(GaussRational::one(), 3)), "1/2*hbar*sqrt_half_hbar");
        assert_eq!(render_coeff(&Coeff::zero()), "0");
        assert_eq!(render_coeff(&-Coeff::one()), "-1");
    }

    #[test]
    fn constants_round_trip() {
        for g in -5..=5 {
            let c = Coeff::graded(GaussRational::new(BigRational::new(3.into(), 7.into()), BigRational::from_integer((-2).into())), g);
            let text = render_coeff(&c);
            let back = parse_phase_expr(&text).unwrap();
            assert_eq!(back, PhasePoly::constant(c), "{text}");
        }
    }
}
