//! Ordered quantization calculus: exact operator algebra, Gaussian smoothing
//! of phase-space polynomials, Liouville Monte Carlo checks and the
//! Ehrenfest break time of coupled Kerr-type oscillators.

pub mod cli;
pub mod ehrenfest;
pub mod exprparse;
pub mod liouville;
pub mod opcore;
pub mod phasespace;
