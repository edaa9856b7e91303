//! Exact noncommutative algebra over canonical `(Q, P)` and bosonic
//! `(A, Adag)` generator pairs.
//!
//! Commutators are c-numbers: `[Q_m, P_m] = iℏ`, `[A_m, Adag_m] = 1`, and
//! everything else commutes. Coefficients are exact ([`Coeff`]).

mod bosonic;
mod coeff;
mod coherent;
mod ordering;
mod poly;
mod quantize;
mod word;

use thiserror::Error;

pub use bosonic::{symmetric_normal_form, to_bosonic, to_canonical, to_normal_order, to_normal_order_closed};
pub use coeff::{rational_from_f64, Coeff, ExactCoefficient, GaussRational};
pub use coherent::{
    coherent_expectation, coherent_expectation_exact, coherent_expectation_exact_with,
    coherent_matrix_element,
};
pub use ordering::{
    canonicalize, canonicalize_closed_form, canonicalize_rewrite, exp_mixed_derivative,
    CommutatorRules, OrderTarget,
};
pub use poly::OperatorPoly;
pub use quantize::{
    arrangement_count, displacement_form, ordering_superoperator, quantize_symmetric,
    quantize_symmetric_poly, symmetrize_bruteforce, symmetrize_bruteforce_with,
    BRUTEFORCE_MAX_DEGREE,
};
pub use word::{Family, Generator, Kind, OperatorWord};

pub(crate) use coeff::{factorial, falling, rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("mode {mode} mixes canonical (Q, P) and bosonic (a, ad) generators")]
    KindMismatch { mode: u32 },
    #[error("degree {degree} exceeds the brute-force bound {bound}")]
    SizeExceeded { degree: u32, bound: u32 },
    #[error("mode {mode} is not in the ordered form required here")]
    NotOrdered { mode: u32 },
    #[error("expression needs {needed} modes but {got} were supplied")]
    DimensionMismatch { needed: usize, got: usize },
    #[error("phase-space center must have an even number of coordinates, got {0}")]
    OddCenter(usize),
}
