//! Exact scalars: Gaussian rationals graded by half-integer powers of ℏ.
//!
//! The grading unit is `η = sqrt(ℏ/2)`, so a graded term `v · η^h` with
//! `v ∈ ℚ(i)` covers every factor that appears in the algebra (`iℏ = 2i·η²`,
//! `sqrt(ℏ/2) = η`, coherent amplitudes `(q+ip)/sqrt(2ℏ) = (q+ip)/2 · η⁻¹`)
//! without leaving the rationals. `ℏ^j = 2^j · η^{2j}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `a + b i` with arbitrary-precision rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn zero() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRational::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_rational(re: BigRational) -> Self {
        GaussRational::new(re, BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRational::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        GaussRational::new(&self.re * r, &self.im * r)
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = GaussRational::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational image of a finite double. Panics on non-finite input.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value required for exact conversion")
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "{} - {}i", self.re, -self.im.clone())
                } else {
                    write!(f, "{} + {}i", self.re, self.im)
                }
            }
        }
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re, -self.im)
    }
}

/// One graded term `value · η^hbar_halfexp`, with `η = sqrt(ℏ/2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactCoefficient {
    pub value: GaussRational,
    pub hbar_halfexp: i32,
}

/// Finite sum of graded terms; the coefficient type of every exact
/// polynomial in the crate. Zero grades are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    terms: BTreeMap<i32, GaussRational>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn one() -> Self {
        Coeff::graded(GaussRational::one(), 0)
    }

    pub fn i() -> Self {
        Coeff::graded(GaussRational::i(), 0)
    }

    pub fn graded(value: GaussRational, hbar_halfexp: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(hbar_halfexp, value);
        }
        Coeff { terms }
    }

    pub fn from_gauss(value: GaussRational) -> Self {
        Coeff::graded(value, 0)
    }

    pub fn from_rational(r: BigRational) -> Self {
        Coeff::from_gauss(GaussRational::from_rational(r))
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::from_gauss(GaussRational::from_int(n))
    }

    /// Exact image of a finite double (binary expansion, no rounding).
    pub fn from_f64(x: f64) -> Self {
        Coeff::from_rational(rational_from_f64(x))
    }

    /// Symbolic ℏ.
    pub fn hbar() -> Self {
        Coeff::graded(GaussRational::from_int(2), 2)
    }

    /// Symbolic sqrt(ℏ/2).
    pub fn sqrt_half_hbar() -> Self {
        Coeff::graded(GaussRational::one(), 1)
    }

    /// Symbolic 1/ℏ.
    pub fn inv_hbar() -> Self {
        Coeff::graded(GaussRational::from_rational(rat(1, 2)), -2)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(GaussRational::is_one)
    }

    pub fn terms(&self) -> impl Iterator<Item = ExactCoefficient> + '_ {
        self.terms.iter().map(|(&h, v)| ExactCoefficient {
            value: v.clone(),
            hbar_halfexp: h,
        })
    }

    pub fn grade(&self, hbar_halfexp: i32) -> Option<&GaussRational> {
        self.terms.get(&hbar_halfexp)
    }

    pub fn grades(&self) -> impl Iterator<Item = i32> + '_ {
        self.terms.keys().copied()
    }

    pub fn add_term(&mut self, value: GaussRational, hbar_halfexp: i32) {
        if value.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(hbar_halfexp)
            .or_insert_with(GaussRational::zero);
        *slot = &*slot + &value;
        if slot.is_zero() {
            self.terms.remove(&hbar_halfexp);
        }
    }

    pub fn conj(&self) -> Self {
        Coeff {
            terms: self.terms.iter().map(|(&h, v)| (h, v.conj())).collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Coeff::zero();
        }
        Coeff {
            terms: self.terms.iter().map(|(&h, v)| (h, v.scale(r))).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Coeff::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// The plain Gaussian rational when no ℏ grade other than zero is present.
    pub fn as_gauss(&self) -> Option<GaussRational> {
        match self.terms.len() {
            0 => Some(GaussRational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    /// Exact substitution of a rational ℏ; fails if an odd grade is present.
    pub fn at_hbar(&self, hbar: &BigRational) -> Option<GaussRational> {
        let half = hbar / BigRational::from_integer(BigInt::from(2));
        let mut acc = GaussRational::zero();
        for (&h, v) in &self.terms {
            if h % 2 != 0 {
                return None;
            }
            let p = h / 2;
            let factor = if p >= 0 {
                num_traits::pow(half.clone(), p as usize)
            } else {
                num_traits::pow(half.recip(), (-p) as usize)
            };
            acc = &acc + &v.scale(&factor);
        }
        Some(acc)
    }

    /// Numeric value at a given ℏ > 0. Each grade is summed exactly first.
    pub fn evaluate(&self, hbar: f64) -> Complex64 {
        let eta = (hbar / 2.0).sqrt();
        self.terms
            .iter()
            .map(|(&h, v)| v.to_complex64() * eta.powi(h))
            .sum()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|v| v.im.is_zero())
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (h, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *h == 0 {
                write!(f, "({v})")?;
            } else {
                write!(f, "({v})*eta^{h}")?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, o: &Coeff) -> Coeff {
        let mut out = self.clone();
        out += o;
        out
    }
}

impl<'a> AddAssign<&'a Coeff> for Coeff {
    fn add_assign(&mut self, o: &Coeff) {
        for (&h, v) in &o.terms {
            self.add_term(v.clone(), h);
        }
    }
}

impl<'a> SubAssign<&'a Coeff> for Coeff {
    fn sub_assign(&mut self, o: &Coeff) {
        for (&h, v) in &o.terms {
            self.add_term(-v.clone(), h);
        }
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, o: &Coeff) -> Coeff {
        let mut out = self.clone();
        out -= o;
        out
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, o: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (&ha, va) in &self.terms {
            for (&hb, vb) in &o.terms {
                out.add_term(va * vb, ha + hb);
            }
        }
        out
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            terms: self.terms.into_iter().map(|(h, v)| (h, -v)).collect(),
        }
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -self.clone()
    }
}

/// Falling factorial `n (n-1) ... (n-k+1)`.
pub(crate) fn falling(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, j| acc * BigInt::from(n - j))
}

pub(crate) fn factorial(n: u32) -> BigInt {
    falling(n, n)
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    falling(n, k) / factorial(k)
}
