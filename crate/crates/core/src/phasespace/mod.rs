//! Commutative polynomials in phase-space variables `q_i, p_i` and the
//! differential operators acting on them: Laplacian, Gaussian smoothing
//! and its inverse, the Weyl mixed-derivative factor and the sine
//! commutator series.
//!
//! Width convention (used everywhere in the crate): smoothing with width
//! `σ` is `exp((σ/4) ∇²)`, the average against independent Gaussians of
//! variance `σ/2` per coordinate (density ∝ `exp(-x²/σ)`). A coherent state
//! corresponds to `σ = ℏ`.

mod numeric;
mod poly;

use thiserror::Error;

pub use numeric::NumericPoly;
pub use poly::{Coord, PhaseMonomial, PhasePoly, PhaseVar};

use num_complex::Complex64;

use crate::opcore::Coeff;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("phase-space point must have 2N coordinates, got {0}")]
    OddLength(usize),
    #[error("phase-space coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("polynomial uses {needed} modes but the point has {got}")]
    DimensionMismatch { needed: usize, got: usize },
}

/// `(q1, p1, ..., qN, pN)`, all finite.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint(Vec<f64>);

impl PhasePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, PhaseError> {
        if coords.len() % 2 != 0 {
            return Err(PhaseError::OddLength(coords.len()));
        }
        if let Some(index) = coords.iter().position(|v| !v.is_finite()) {
            return Err(PhaseError::NonFinite { index });
        }
        Ok(PhasePoint(coords))
    }

    pub fn from_qp(q: &[f64], p: &[f64]) -> Result<Self, PhaseError> {
        let coords = q.iter().zip(p).flat_map(|(&a, &b)| [a, b]).collect();
        PhasePoint::new(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn n_modes(&self) -> usize {
        self.0.len() / 2
    }

    pub fn q(&self, mode: usize) -> f64 {
        self.0[2 * mode]
    }

    pub fn p(&self, mode: usize) -> f64 {
        self.0[2 * mode + 1]
    }

    /// Euclidean norm over all 2N entries.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `∑ ∂²` over every variable.
pub fn laplacian(f: &PhasePoly) -> PhasePoly {
    f.laplacian()
}

/// `exp((σ/4)∇²) f`. `sigma` may be numeric (grade 0) or symbolic in ℏ.
pub fn smooth(f: &PhasePoly, sigma: &Coeff) -> PhasePoly {
    f.smooth(sigma)
}

/// `exp(-(σ/4)∇²) f`, the exact inverse of [`smooth`] on polynomials.
pub fn inverse_smooth(f: &PhasePoly, sigma: &Coeff) -> PhasePoly {
    f.smooth(&-sigma)
}

/// `exp((iℏ/2) ∑_i ∂_{q_i} ∂_{p_i}) f`: the classical symbol of the
/// QP-ordered operator with Weyl symbol `f`.
pub fn weyl_mixed_factor(f: &PhasePoly, hbar: &Coeff) -> PhasePoly {
    f.weyl_mixed_factor(hbar)
}

/// `sin((ℏ/2) D) / (ℏ/2) f` with `D = ∑_i ∂_{q_i} ∂_{p_i}`.
pub fn sinc_commutator(f: &PhasePoly, hbar: &Coeff) -> PhasePoly {
    f.sinc_commutator(hbar)
}

/// Coherent-state expectation of the symmetric quantization of a classical
/// function already evolved to time `t`: `smooth(f, ℏ)` at the center.
pub fn expectation_time_evolved(
    f_at_t: &PhasePoly,
    center: &PhasePoint,
    hbar: f64,
) -> Result<Complex64, PhaseError> {
    f_at_t.smooth(&Coeff::hbar()).evaluate(center, hbar)
}
