//! Coherent-state matrix elements of operator polynomials.
//!
//! Modes commute and coherent states factor over modes, so every word is
//! split into per-mode subwords. Each subword is brought to normal order
//! letter by letter on a table of `Adag^r A^s` coefficients; canonical
//! letters enter through `Q = η(A + Adag)`, `P = iη(Adag - A)`.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use num_rational::BigRational;

use super::coeff::{rat, rational_from_f64, Coeff, GaussRational};
use super::ordering::CommutatorRules;
use super::poly::OperatorPoly;
use super::word::Kind;
use super::OpError;
use crate::phasespace::PhasePoint;

fn check_modes(x: &OperatorPoly, n_modes: usize) -> Result<(), OpError> {
    if let Some((&mode, _)) = x.families()?.iter().next_back() {
        if mode as usize >= n_modes {
            return Err(OpError::DimensionMismatch {
                needed: mode as usize + 1,
                got: n_modes,
            });
        }
    }
    Ok(())
}

/// Normal-ordered symbol of a single-mode word: `(r, s) -> coefficient of
/// Adag^r A^s`, with `[A, Adag] = comm`.
type NormalTable = BTreeMap<(u32, u32), Coeff>;

struct NormalOrderer {
    comm: Coeff,
    eta: Coeff,
    i_eta: Coeff,
    memo: HashMap<Vec<(Kind, u32)>, NormalTable>,
}

impl NormalOrderer {
    fn new(rules: &CommutatorRules) -> Self {
        let eta = Coeff::sqrt_half_hbar();
        NormalOrderer {
            comm: rules.a_adag.clone(),
            i_eta: &Coeff::i() * &eta,
            eta,
            memo: HashMap::new(),
        }
    }

    fn times_a(table: &NormalTable) -> NormalTable {
        table.iter().map(|(&(r, s), c)| ((r, s + 1), c.clone())).collect()
    }

    /// `Adag^r A^s Adag = Adag^{r+1} A^s + s [A, Adag] Adag^r A^{s-1}`.
    fn times_adag(&self, table: &NormalTable) -> NormalTable {
        let mut out = NormalTable::new();
        for (&(r, s), c) in table {
            add(&mut out, (r + 1, s), c.clone());
            if s > 0 && !self.comm.is_zero() {
                add(&mut out, (r, s - 1), (c * &self.comm).scale(&rat(s as i64, 1)));
            }
        }
        out
    }

    fn times(&self, table: &NormalTable, kind: Kind) -> NormalTable {
        match kind {
            Kind::A => Self::times_a(table),
            Kind::Adag => self.times_adag(table),
            Kind::Q => combine(&Self::times_a(table), &self.eta, &self.times_adag(table), &self.eta),
            Kind::P => combine(&self.times_adag(table), &self.i_eta, &Self::times_a(table), &-&self.i_eta),
        }
    }

    fn table(&mut self, subword: &[(Kind, u32)]) -> &NormalTable {
        if !self.memo.contains_key(subword) {
            let (last, prefix) = match subword.split_last() {
                None => {
                    let mut t = NormalTable::new();
                    t.insert((0, 0), Coeff::one());
                    self.memo.insert(Vec::new(), t);
                    return &self.memo[subword];
                }
                Some(split) => split,
            };
            // extend the table of the word with one letter fewer
            let mut shorter = prefix.to_vec();
            if last.1 > 1 {
                shorter.push((last.0, last.1 - 1));
            }
            let base = self.table(&shorter).clone();
            let t = self.times(&base, last.0);
            self.memo.insert(subword.to_vec(), t);
        }
        &self.memo[subword]
    }
}

fn add(table: &mut NormalTable, key: (u32, u32), c: Coeff) {
    let slot = table.entry(key).or_default();
    *slot += &c;
    if slot.is_zero() {
        table.remove(&key);
    }
}

fn combine(x: &NormalTable, cx: &Coeff, y: &NormalTable, cy: &Coeff) -> NormalTable {
    let mut out = NormalTable::new();
    for (&k, c) in x {
        add(&mut out, k, c * cx);
    }
    for (&k, c) in y {
        add(&mut out, k, c * cy);
    }
    out
}

/// Splits every word into per-mode subwords and sums
/// `coefficient * prod_mode value(mode, table)`.
fn fold_modes<T, C, F>(x: &OperatorPoly, rules: &CommutatorRules, zero: T, one: T, coeff: C, mut value: F) -> T
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
    C: Fn(&Coeff) -> T,
    F: FnMut(u32, &NormalTable) -> T,
{
    let mut orderer = NormalOrderer::new(rules);
    let mut total = zero;
    for (w, c) in x.terms() {
        let mut by_mode: BTreeMap<u32, Vec<(Kind, u32)>> = BTreeMap::new();
        for &(g, e) in w.factors() {
            let sub = by_mode.entry(g.mode).or_default();
            match sub.last_mut() {
                Some((k, n)) if *k == g.kind => *n += e,
                _ => sub.push((g.kind, e)),
            }
        }
        let mut v = one.clone();
        for (mode, sub) in by_mode {
            v = v * value(mode, orderer.table(&sub));
        }
        total = total + coeff(c) * v;
    }
    total
}

/// `<α1| x |α2> / <α1|α2>`: normal order, then `Adag -> conj(α1)`, `A -> α2`
/// per mode.
pub fn coherent_matrix_element(
    x: &OperatorPoly,
    alpha1: &[Complex64],
    alpha2: &[Complex64],
    hbar: f64,
) -> Result<Complex64, OpError> {
    if alpha1.len() != alpha2.len() {
        return Err(OpError::DimensionMismatch {
            needed: alpha1.len(),
            got: alpha2.len(),
        });
    }
    check_modes(x, alpha1.len())?;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let coeff = |c: &Coeff| c.evaluate(hbar);
    Ok(fold_modes(x, &CommutatorRules::default(), zero, one, coeff, |mode, table| {
        let (a1, a2) = (alpha1[mode as usize].conj(), alpha2[mode as usize]);
        table
            .iter()
            .map(|(&(r, s), v)| v.evaluate(hbar) * a1.powu(r) * a2.powu(s))
            .sum()
    }))
}

/// Exact diagonal expectation at a rational phase-space center
/// `(q1, p1, q2, p2, ...)`, keeping ℏ symbolic.
pub fn coherent_expectation_exact(
    x: &OperatorPoly,
    center: &[BigRational],
) -> Result<Coeff, OpError> {
    coherent_expectation_exact_with(x, center, &CommutatorRules::default())
}

pub fn coherent_expectation_exact_with(
    x: &OperatorPoly,
    center: &[BigRational],
    rules: &CommutatorRules,
) -> Result<Coeff, OpError> {
    if center.len() % 2 != 0 {
        return Err(OpError::OddCenter(center.len()));
    }
    let n_modes = center.len() / 2;
    check_modes(x, n_modes)?;
    // α0 = (q + ip) / sqrt(2ℏ) = (q + ip)/2 · η⁻¹
    let half = rat(1, 2);
    let alphas: Vec<(Coeff, Coeff)> = (0..n_modes)
        .map(|i| {
            let a = GaussRational::new(&center[2 * i] * &half, &center[2 * i + 1] * &half);
            (Coeff::graded(a.conj(), -1), Coeff::graded(a, -1))
        })
        .collect();
    let mut powers: HashMap<(u32, bool, u32), Coeff> = HashMap::new();
    let coeff = |c: &Coeff| CoeffSum(c.clone());
    Ok(fold_modes(x, rules, CoeffSum(Coeff::zero()), CoeffSum(Coeff::one()), coeff, |mode, table| {
        let (conj, plain) = &alphas[mode as usize];
        let mut pow = |dagger: bool, e: u32| {
            powers
                .entry((mode, dagger, e))
                .or_insert_with(|| if dagger { conj.pow(e) } else { plain.pow(e) })
                .clone()
        };
        let mut sum = Coeff::zero();
        for (&(r, s), v) in table {
            sum += &(&(v * &pow(true, r)) * &pow(false, s));
        }
        CoeffSum(sum)
    })
    .0)
}

#[derive(Clone)]
struct CoeffSum(Coeff);

impl std::ops::Add for CoeffSum {
    type Output = CoeffSum;
    fn add(self, o: CoeffSum) -> CoeffSum {
        CoeffSum(&self.0 + &o.0)
    }
}

impl std::ops::Mul for CoeffSum {
    type Output = CoeffSum;
    fn mul(self, o: CoeffSum) -> CoeffSum {
        CoeffSum(&self.0 * &o.0)
    }
}

/// Numeric diagonal expectation; the center is converted exactly and the
/// result rounded once at the end.
pub fn coherent_expectation(
    x: &OperatorPoly,
    center: &PhasePoint,
    hbar: f64,
) -> Result<Complex64, OpError> {
    let exact: Vec<BigRational> = center.coords().iter().map(|&v| rational_from_f64(v)).collect();
    Ok(coherent_expectation_exact(x, &exact)?.evaluate(hbar))
}
