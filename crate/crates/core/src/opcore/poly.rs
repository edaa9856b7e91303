use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use super::coeff::Coeff;
use super::word::{Family, Generator, Kind, OperatorWord};
use super::OpError;

/// Noncommutative polynomial: words with exact graded coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct OperatorPoly {
    terms: BTreeMap<OperatorWord, Coeff>,
}

impl OperatorPoly {
    pub fn zero() -> Self {
        OperatorPoly::default()
    }

    pub fn one() -> Self {
        OperatorPoly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        OperatorPoly::term(OperatorWord::identity(), c)
    }

    pub fn generator(mode: u32, kind: Kind) -> Self {
        OperatorPoly::term(
            OperatorWord::from_letters([Generator::new(mode, kind)]),
            Coeff::one(),
        )
    }

    pub fn term(word: OperatorWord, c: Coeff) -> Self {
        let mut p = OperatorPoly::zero();
        p.add_term(word, c);
        p
    }

    pub fn word(word: OperatorWord) -> Self {
        OperatorPoly::term(word, Coeff::one())
    }

    /// Builds a polynomial from raw terms, rejecting per-mode kind mixing.
    pub fn from_terms<I: IntoIterator<Item = (OperatorWord, Coeff)>>(
        terms: I,
    ) -> Result<Self, OpError> {
        let mut p = OperatorPoly::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p.families()?;
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, word: OperatorWord, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(slot) => {
                *slot += &c;
                if slot.is_zero() {
                    self.terms.remove(&word);
                }
            }
            None => {
                self.terms.insert(word, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lexicographic word order.
    pub fn terms(&self) -> impl Iterator<Item = (&OperatorWord, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: &OperatorWord) -> Option<&Coeff> {
        self.terms.get(word)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(OperatorWord::degree).max().unwrap_or(0)
    }

    /// Generator family used by each mode, or a kind-mismatch error.
    pub fn families(&self) -> Result<BTreeMap<u32, Family>, OpError> {
        let mut out = BTreeMap::new();
        for w in self.terms.keys() {
            for &(g, _) in w.factors() {
                merge_family(&mut out, g.mode, g.kind.family())?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Coeff) -> OperatorPoly {
        let mut out = OperatorPoly::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v * c);
        }
        out
    }

    /// Word concatenation with coefficient products; no reordering.
    pub fn multiply(&self, other: &OperatorPoly) -> Result<OperatorPoly, OpError> {
        let mut fams = self.families()?;
        for (mode, fam) in other.families()? {
            merge_family(&mut fams, mode, fam)?;
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &OperatorPoly) -> OperatorPoly {
        let mut out = OperatorPoly::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                out.add_term(wa.concat(wb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Result<OperatorPoly, OpError> {
        self.families()?;
        let mut acc = OperatorPoly::one();
        for _ in 0..exp {
            acc = acc.mul_unchecked(self);
        }
        Ok(acc)
    }

    /// Formal adjoint: reverses every word, conjugates coefficients and
    /// swaps `A <-> Adag` (`Q`, `P` are self-adjoint).
    pub fn adjoint(&self) -> OperatorPoly {
        let mut out = OperatorPoly::zero();
        for (w, c) in &self.terms {
            let rev = OperatorWord::from_factors(w.reversed().factors().iter().map(|&(g, e)| {
                let kind = match g.kind {
                    Kind::A => Kind::Adag,
                    Kind::Adag => Kind::A,
                    k => k,
                };
                (Generator::new(g.mode, kind), e)
            }));
            out.add_term(rev, c.conj());
        }
        out
    }

    /// Linear map applied word by word.
    pub(crate) fn map_words<F>(&self, mut f: F) -> OperatorPoly
    where
        F: FnMut(&OperatorWord) -> OperatorPoly,
    {
        let mut out = OperatorPoly::zero();
        for (w, c) in &self.terms {
            for (w2, c2) in f(w).terms {
                out.add_term(w2, &c2 * c);
            }
        }
        out
    }
}

pub(crate) fn merge_family(
    fams: &mut BTreeMap<u32, Family>,
    mode: u32,
    fam: Family,
) -> Result<(), OpError> {
    match fams.get(&mode) {
        Some(&f) if f != fam => Err(OpError::KindMismatch { mode }),
        Some(_) => Ok(()),
        None => {
            fams.insert(mode, fam);
            Ok(())
        }
    }
}

impl<'a> Add<&'a OperatorPoly> for &'a OperatorPoly {
    type Output = OperatorPoly;
    fn add(self, o: &OperatorPoly) -> OperatorPoly {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a OperatorPoly> for &'a OperatorPoly {
    type Output = OperatorPoly;
    fn sub(self, o: &OperatorPoly) -> OperatorPoly {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), -c);
        }
        out
    }
}

impl Neg for &OperatorPoly {
    type Output = OperatorPoly;
    fn neg(self) -> OperatorPoly {
        self.scale(&Coeff::from_int(-1))
    }
}
