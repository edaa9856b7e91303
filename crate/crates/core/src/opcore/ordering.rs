//! Reordering of operator words into a target ordering.
//!
//! Two independent routes produce the same canonical form:
//! * [`canonicalize_rewrite`] applies the single rule `R L = L R - [L, R]`
//!   (with `L` the generator designated to stand on the left) until no
//!   out-of-order pair is left. It is the ground truth.
//! * [`canonicalize_closed_form`] folds each word block by block with the
//!   exponential-shift identity
//!   `R^b L^n = exp(-[L,R] d_L d_R) L^n R^b
//!            = sum_k (-[L,R])^k / k! (n)_k (b)_k L^{n-k} R^{b-k}`.
//!
//! In both, distinct modes commute, so canonical words list modes in
//! ascending order and each mode as `L^a R^b`.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;

use super::bosonic::{to_bosonic, to_canonical};
use super::coeff::{factorial, falling, Coeff};
use super::poly::OperatorPoly;
use super::word::{Family, Generator, Kind, OperatorWord};
use super::OpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderTarget {
    /// `Q` left of `P`.
    QP,
    /// `P` left of `Q`.
    PQ,
    /// `Adag` left of `A`.
    Normal,
    /// `A` left of `Adag`.
    Antinormal,
}

impl OrderTarget {
    pub fn family(self) -> Family {
        match self {
            OrderTarget::QP | OrderTarget::PQ => Family::Canonical,
            OrderTarget::Normal | OrderTarget::Antinormal => Family::Bosonic,
        }
    }

    /// `(left, right)` generator kinds.
    pub fn sides(self) -> (Kind, Kind) {
        match self {
            OrderTarget::QP => (Kind::Q, Kind::P),
            OrderTarget::PQ => (Kind::P, Kind::Q),
            OrderTarget::Normal => (Kind::Adag, Kind::A),
            OrderTarget::Antinormal => (Kind::A, Kind::Adag),
        }
    }
}

/// The c-number commutators used by the rewriting route.
///
/// `Default` gives `[Q, P] = iℏ` and `[A, Adag] = 1`. Other values exist
/// only for fault injection.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorRules {
    pub q_p: Coeff,
    pub a_adag: Coeff,
}

impl Default for CommutatorRules {
    fn default() -> Self {
        CommutatorRules {
            q_p: &Coeff::i() * &Coeff::hbar(),
            a_adag: Coeff::one(),
        }
    }
}

impl CommutatorRules {
    /// `[x, y]` for two kinds of the same mode.
    pub fn commutator(&self, x: Kind, y: Kind) -> Coeff {
        match (x, y) {
            (Kind::Q, Kind::P) => self.q_p.clone(),
            (Kind::P, Kind::Q) => -&self.q_p,
            (Kind::A, Kind::Adag) => self.a_adag.clone(),
            (Kind::Adag, Kind::A) => -&self.a_adag,
            _ => Coeff::zero(),
        }
    }
}

/// Brings every mode into `target`'s generator family.
pub(crate) fn to_family(x: &OperatorPoly, fam: Family) -> Result<OperatorPoly, OpError> {
    let fams = x.families()?;
    if fams.values().all(|&f| f == fam) {
        return Ok(x.clone());
    }
    Ok(match fam {
        Family::Bosonic => to_bosonic(x),
        Family::Canonical => to_canonical(x),
    })
}

/// Canonical form with the standard commutators (rewriting route).
pub fn canonicalize(x: &OperatorPoly, target: OrderTarget) -> Result<OperatorPoly, OpError> {
    canonicalize_rewrite(x, target, &CommutatorRules::default())
}

/// Rewriting route with explicit commutator values.
pub fn canonicalize_rewrite(
    x: &OperatorPoly,
    target: OrderTarget,
    rules: &CommutatorRules,
) -> Result<OperatorPoly, OpError> {
    let x = to_family(x, target.family())?;
    let (left, right) = target.sides();
    let mut rw = Rewriter {
        left,
        right,
        comm: rules.commutator(left, right),
        memo: HashMap::new(),
    };
    Ok(x.map_words(|w| {
        let letters: Vec<Generator> = w.letters().collect();
        rw.normal_form(&letters)
    }))
}

struct Rewriter {
    left: Kind,
    right: Kind,
    comm: Coeff,
    memo: HashMap<Vec<Generator>, OperatorPoly>,
}

impl Rewriter {
    fn out_of_order(&self, a: Generator, b: Generator) -> bool {
        if a.mode != b.mode {
            return a.mode > b.mode;
        }
        a.kind == self.right && b.kind == self.left
    }

    fn normal_form(&mut self, letters: &[Generator]) -> OperatorPoly {
        if let Some(p) = self.memo.get(letters) {
            return p.clone();
        }
        let pos = letters
            .windows(2)
            .position(|pair| self.out_of_order(pair[0], pair[1]));
        let result = match pos {
            None => OperatorPoly::word(OperatorWord::from_letters(letters.iter().copied())),
            Some(i) => {
                let mut swapped = letters.to_vec();
                swapped.swap(i, i + 1);
                let mut out = self.normal_form(&swapped);
                if letters[i].mode == letters[i + 1].mode && !self.comm.is_zero() {
                    let mut removed = letters.to_vec();
                    removed.drain(i..i + 2);
                    let tail = self.normal_form(&removed).scale(&self.comm);
                    out = &out - &tail;
                }
                out
            }
        };
        self.memo.insert(letters.to_vec(), result.clone());
        result
    }
}

/// Closed-form route; always uses the standard commutators.
pub fn canonicalize_closed_form(
    x: &OperatorPoly,
    target: OrderTarget,
) -> Result<OperatorPoly, OpError> {
    let x = to_family(x, target.family())?;
    let (left, right) = target.sides();
    let c = CommutatorRules::default().commutator(left, right);
    Ok(x.map_words(|w| closed_form_word(w, left, right, &c)))
}

fn closed_form_word(w: &OperatorWord, left: Kind, right: Kind, c: &Coeff) -> OperatorPoly {
    let mut by_mode: BTreeMap<u32, Vec<(Kind, u32)>> = BTreeMap::new();
    for &(g, e) in w.factors() {
        by_mode.entry(g.mode).or_default().push((g.kind, e));
    }
    let minus_c = -c;
    let mut acc = OperatorPoly::one();
    for (mode, blocks) in by_mode {
        // state: (a, b) -> coefficient of L^a R^b
        let mut state: BTreeMap<(u32, u32), Coeff> = BTreeMap::new();
        state.insert((0, 0), Coeff::one());
        for (kind, n) in blocks {
            let mut next: BTreeMap<(u32, u32), Coeff> = BTreeMap::new();
            for ((a, b), coef) in state {
                if kind == right {
                    add_entry(&mut next, (a, b + n), coef);
                    continue;
                }
                debug_assert_eq!(kind, left);
                for k in 0..=n.min(b) {
                    let num = falling(n, k) * falling(b, k);
                    let weight = BigRational::new(num, factorial(k));
                    let term = &minus_c.pow(k).scale(&weight) * &coef;
                    add_entry(&mut next, (a + n - k, b - k), term);
                }
            }
            state = next;
        }
        let mut mode_poly = OperatorPoly::zero();
        for ((a, b), coef) in state {
            let word = OperatorWord::from_factors([
                (Generator::new(mode, left), a),
                (Generator::new(mode, right), b),
            ]);
            mode_poly.add_term(word, coef);
        }
        acc = acc.mul_unchecked(&mode_poly);
    }
    acc
}

fn add_entry(map: &mut BTreeMap<(u32, u32), Coeff>, key: (u32, u32), c: Coeff) {
    let slot = map.entry(key).or_default();
    *slot += &c;
    if slot.is_zero() {
        map.remove(&key);
    }
}

/// `exp(lambda d_L d_R)` acting on the symbol of words whose `mode` letters
/// already read `L^a R^b`. Other modes are carried along; the output lists
/// modes in ascending order.
pub fn exp_mixed_derivative(
    x: &OperatorPoly,
    mode: u32,
    left: Kind,
    right: Kind,
    lambda: &Coeff,
) -> Result<OperatorPoly, OpError> {
    let mut out = OperatorPoly::zero();
    for (w, coef) in x.terms() {
        let mut by_mode: BTreeMap<u32, Vec<(Kind, u32)>> = BTreeMap::new();
        for &(g, e) in w.factors() {
            by_mode.entry(g.mode).or_default().push((g.kind, e));
        }
        let blocks = by_mode.remove(&mode).unwrap_or_default();
        let (a, b) = split_ordered(&blocks, left, right).ok_or(OpError::NotOrdered { mode })?;
        for k in 0..=a.min(b) {
            let weight = BigRational::new(falling(a, k) * falling(b, k), factorial(k));
            let c = &lambda.pow(k).scale(&weight) * coef;
            if c.is_zero() {
                continue;
            }
            let mut parts = by_mode.clone();
            parts.insert(mode, vec![(left, a - k), (right, b - k)]);
            let word = OperatorWord::from_factors(parts.into_iter().flat_map(|(m, bl)| {
                bl.into_iter().map(move |(kind, e)| (Generator::new(m, kind), e))
            }));
            out.add_term(word, c);
        }
    }
    Ok(out)
}

fn split_ordered(blocks: &[(Kind, u32)], left: Kind, right: Kind) -> Option<(u32, u32)> {
    match blocks {
        [] => Some((0, 0)),
        [(k, n)] if *k == left => Some((*n, 0)),
        [(k, n)] if *k == right => Some((0, *n)),
        [(k1, n), (k2, m)] if *k1 == left && *k2 == right => Some((*n, *m)),
        _ => None,
    }
}

/// `-c/2` as used by the symmetric-ordering super-operator.
pub(crate) fn half_neg(c: &Coeff) -> Coeff {
    (-c).scale(&BigRational::new(1.into(), 2.into()))
}
