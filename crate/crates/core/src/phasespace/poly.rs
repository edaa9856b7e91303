use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use super::numeric::NumericPoly;
use super::{PhaseError, PhasePoint};
use crate::opcore::{factorial, rat, rational_from_f64, Coeff};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Q,
    P,
}

/// A phase-space variable: coordinate of a 0-based mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseVar {
    pub mode: u32,
    pub coord: Coord,
}

impl PhaseVar {
    pub fn q(mode: u32) -> Self {
        PhaseVar { mode, coord: Coord::Q }
    }

    pub fn p(mode: u32) -> Self {
        PhaseVar { mode, coord: Coord::P }
    }

    /// Position in the `(q1, p1, q2, p2, ...)` layout.
    pub fn index(self) -> usize {
        2 * self.mode as usize + usize::from(self.coord == Coord::P)
    }

    pub fn partner(self) -> PhaseVar {
        PhaseVar {
            mode: self.mode,
            coord: match self.coord {
                Coord::Q => Coord::P,
                Coord::P => Coord::Q,
            },
        }
    }
}

/// Product of variable powers; zero exponents are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PhaseMonomial {
    exps: BTreeMap<PhaseVar, u32>,
}

impl PhaseMonomial {
    pub fn one() -> Self {
        PhaseMonomial::default()
    }

    pub fn var(v: PhaseVar) -> Self {
        PhaseMonomial::from_vars([(v, 1)])
    }

    pub fn from_vars<I: IntoIterator<Item = (PhaseVar, u32)>>(vars: I) -> Self {
        let mut m = PhaseMonomial::one();
        for (v, e) in vars {
            m.mul_var(v, e);
        }
        m
    }

    /// `(mode, q exponent, p exponent)` triples.
    pub fn from_exponents<I: IntoIterator<Item = (u32, u32, u32)>>(items: I) -> Self {
        PhaseMonomial::from_vars(
            items
                .into_iter()
                .flat_map(|(mode, n, m)| [(PhaseVar::q(mode), n), (PhaseVar::p(mode), m)]),
        )
    }

    fn mul_var(&mut self, v: PhaseVar, e: u32) {
        if e > 0 {
            *self.exps.entry(v).or_insert(0) += e;
        }
    }

    pub fn exponent(&self, v: PhaseVar) -> u32 {
        self.exps.get(&v).copied().unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = (PhaseVar, u32)> + '_ {
        self.exps.iter().map(|(&v, &e)| (v, e))
    }

    pub fn degree(&self) -> u32 {
        self.exps.values().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    /// Per mode `(q exponent, p exponent)`, modes ascending.
    pub fn mode_exponents(&self) -> BTreeMap<u32, (u32, u32)> {
        let mut out: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
        for (&v, &e) in &self.exps {
            let slot = out.entry(v.mode).or_default();
            match v.coord {
                Coord::Q => slot.0 = e,
                Coord::P => slot.1 = e,
            }
        }
        out
    }

    pub fn n_modes(&self) -> usize {
        self.exps.keys().map(|v| v.mode as usize + 1).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &PhaseMonomial) -> PhaseMonomial {
        let mut out = self.clone();
        for (&v, &e) in &other.exps {
            out.mul_var(v, e);
        }
        out
    }

    /// `∂^times/∂v^times`, as (falling-factorial weight, monomial).
    pub fn derivative(&self, v: PhaseVar, times: u32) -> Option<(BigInt, PhaseMonomial)> {
        let e = self.exponent(v);
        if times > e {
            return None;
        }
        let mut out = self.clone();
        if e == times {
            out.exps.remove(&v);
        } else {
            out.exps.insert(v, e - times);
        }
        Some((crate::opcore::falling(e, times), out))
    }

    fn expanded(&self) -> impl Iterator<Item = PhaseVar> + '_ {
        self.exps
            .iter()
            .flat_map(|(&v, &e)| std::iter::repeat_n(v, e as usize))
    }
}

/// Higher degree first, then lexicographic on the expanded variable list.
impl Ord for PhaseMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| self.expanded().cmp(other.expanded()))
    }
}

impl PartialOrd for PhaseMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Commutative polynomial with exact graded coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PhasePoly {
    terms: BTreeMap<PhaseMonomial, Coeff>,
}

impl PhasePoly {
    pub fn zero() -> Self {
        PhasePoly::default()
    }

    pub fn one() -> Self {
        PhasePoly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        PhasePoly::term(PhaseMonomial::one(), c)
    }

    pub fn var(v: PhaseVar) -> Self {
        PhasePoly::term(PhaseMonomial::var(v), Coeff::one())
    }

    pub fn monomial(m: PhaseMonomial) -> Self {
        PhasePoly::term(m, Coeff::one())
    }

    pub fn term(m: PhaseMonomial, c: Coeff) -> Self {
        let mut p = PhasePoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (PhaseMonomial, Coeff)>>(terms: I) -> Self {
        let mut p = PhasePoly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: PhaseMonomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                *slot += &c;
                if slot.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PhaseMonomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &PhaseMonomial) -> Option<&Coeff> {
        self.terms.get(m)
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

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(PhaseMonomial::degree).max().unwrap_or(0)
    }

    pub fn n_modes(&self) -> usize {
        self.terms.keys().map(PhaseMonomial::n_modes).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Coeff) -> PhasePoly {
        PhasePoly::from_terms(self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    pub fn pow(&self, exp: u32) -> PhasePoly {
        (0..exp).fold(PhasePoly::one(), |acc, _| &acc * self)
    }

    pub fn derivative(&self, v: PhaseVar, times: u32) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (m, c) in &self.terms {
            if let Some((w, dm)) = m.derivative(v, times) {
                out.add_term(dm, c.scale(&BigRational::from_integer(w)));
            }
        }
        out
    }

    fn all_vars(&self) -> Vec<PhaseVar> {
        let mut vars: Vec<PhaseVar> = self
            .terms
            .keys()
            .flat_map(|m| m.vars().map(|(v, _)| v))
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }

    pub fn laplacian(&self) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for v in self.all_vars() {
            out = &out + &self.derivative(v, 2);
        }
        out
    }

    /// `D f` with `D = ∑_i ∂_{q_i} ∂_{p_i}`.
    pub fn mixed_derivative(&self) -> PhasePoly {
        let mut modes: Vec<u32> = self.all_vars().iter().map(|v| v.mode).collect();
        modes.dedup();
        let mut out = PhasePoly::zero();
        for mode in modes {
            let d = self.derivative(PhaseVar::q(mode), 1).derivative(PhaseVar::p(mode), 1);
            out = &out + &d;
        }
        out
    }

    /// `∑_j weight(j) op^j f`, stopping once `op^j f` vanishes.
    fn operator_series<F, W>(&self, op: F, mut weight: W) -> PhasePoly
    where
        F: Fn(&PhasePoly) -> PhasePoly,
        W: FnMut(u32) -> Coeff,
    {
        let mut out = PhasePoly::zero();
        let mut cur = self.clone();
        let mut j = 0;
        while !cur.is_zero() {
            let w = weight(j);
            if !w.is_zero() {
                out = &out + &cur.scale(&w);
            }
            cur = op(&cur);
            j += 1;
        }
        out
    }

    pub fn smooth(&self, sigma: &Coeff) -> PhasePoly {
        let quarter = sigma.scale(&rat(1, 4));
        self.operator_series(PhasePoly::laplacian, |j| {
            quarter.pow(j).scale(&BigRational::new(BigInt::one(), factorial(j)))
        })
    }

    pub fn weyl_mixed_factor(&self, hbar: &Coeff) -> PhasePoly {
        let step = &Coeff::i() * &hbar.scale(&rat(1, 2));
        self.operator_series(PhasePoly::mixed_derivative, |j| {
            step.pow(j).scale(&BigRational::new(BigInt::one(), factorial(j)))
        })
    }

    pub fn sinc_commutator(&self, hbar: &Coeff) -> PhasePoly {
        let half = hbar.scale(&rat(1, 2));
        self.operator_series(PhasePoly::mixed_derivative, |j| {
            // odd powers only: D^{2r+1} carries (-1)^r (ℏ/2)^{2r} / (2r+1)!
            if j % 2 == 0 {
                return Coeff::zero();
            }
            let r = (j - 1) / 2;
            let sign = if r % 2 == 0 { 1 } else { -1 };
            half.pow(2 * r)
                .scale(&BigRational::new(BigInt::from(sign), factorial(j)))
        })
    }

    /// Exact value at a rational point `(q1, p1, ...)`; ℏ stays symbolic.
    pub fn evaluate_exact(&self, point: &[BigRational]) -> Result<Coeff, PhaseError> {
        self.check_dim(point.len())?;
        let mut total = Coeff::zero();
        for (m, c) in &self.terms {
            let mut v = BigRational::one();
            for (var, e) in m.vars() {
                v *= num_traits::pow(point[var.index()].clone(), e as usize);
            }
            total += &c.scale(&v);
        }
        Ok(total)
    }

    /// Numeric value: exact in rationals, rounded once at the end.
    pub fn evaluate(&self, point: &PhasePoint, hbar: f64) -> Result<Complex64, PhaseError> {
        let exact: Vec<BigRational> = point.coords().iter().map(|&v| rational_from_f64(v)).collect();
        Ok(self.evaluate_exact(&exact)?.evaluate(hbar))
    }

    fn check_dim(&self, len: usize) -> Result<(), PhaseError> {
        let needed = self.n_modes();
        if 2 * needed > len {
            return Err(PhaseError::DimensionMismatch {
                needed,
                got: len / 2,
            });
        }
        Ok(())
    }

    /// Float-coefficient copy for fast repeated evaluation.
    pub fn to_numeric(&self, hbar: f64) -> NumericPoly {
        NumericPoly::new(
            self.terms
                .iter()
                .map(|(m, c)| (m.vars().map(|(v, e)| (v.index(), e)).collect(), c.evaluate(hbar)))
                .collect(),
        )
    }

    /// Substitutes each variable `x_j` by `∑_k matrix[j][k] x_k` (row-major
    /// over the `(q1, p1, ...)` layout). Entries are converted exactly.
    pub fn compose_linear(&self, matrix: &[Vec<f64>]) -> PhasePoly {
        let dim = matrix.len();
        let var_at = |k: usize| {
            let mode = (k / 2) as u32;
            if k % 2 == 0 {
                PhaseVar::q(mode)
            } else {
                PhaseVar::p(mode)
            }
        };
        let images: Vec<PhasePoly> = (0..dim)
            .map(|j| {
                PhasePoly::from_terms(matrix[j].iter().enumerate().map(|(k, &a)| {
                    (PhaseMonomial::var(var_at(k)), Coeff::from_f64(a))
                }))
            })
            .collect();
        let mut out = PhasePoly::zero();
        for (m, c) in &self.terms {
            let mut acc = PhasePoly::constant(c.clone());
            for (v, e) in m.vars() {
                acc = &acc * &images[v.index()].pow(e);
            }
            out = &out + &acc;
        }
        out
    }
}

impl<'a> Add<&'a PhasePoly> for &'a PhasePoly {
    type Output = PhasePoly;
    fn add(self, o: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a PhasePoly> for &'a PhasePoly {
    type Output = PhasePoly;
    fn sub(self, o: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a PhasePoly> for &'a PhasePoly {
    type Output = PhasePoly;
    fn mul(self, o: &PhasePoly) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &PhasePoly {
    type Output = PhasePoly;
    fn neg(self) -> PhasePoly {
        self.scale(&Coeff::from_int(-1))
    }
}
