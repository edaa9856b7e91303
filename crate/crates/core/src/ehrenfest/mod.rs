//! N coupled Kerr-type oscillators: exact flow, trajectory Laplacian, the
//! centroid departure δ(t) and the Ehrenfest break time.
//!
//! The derivation of the closed-form Laplacian is in
//! `docs/trajectory_laplacian.md`.

mod breaktime;
mod dual;
mod model;

pub use breaktime::{
    departure, departure_curve, ehrenfest_analytic, ehrenfest_both, ehrenfest_diagnostics, ehrenfest_numeric,
    serialize_real, smoothed_centroid_first_order, typical_period, BreakTime, DepartureCurve,
    EhrenfestError, EhrenfestResult, BISECTION_RTOL, SCAN_HORIZON, SCAN_STEP_FRACTION,
};
pub use dual::{HyperDual, Scalar};
pub use model::{
    action, classical_flow, flow_component_jet, trajectory_laplacian,
    trajectory_laplacian_autodiff, ModelConfig, ModelError, OscillatorModel,
};
