use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use super::model::{classical_flow, trajectory_laplacian, OscillatorModel};
use crate::phasespace::PhasePoint;

/// Bisection stops at this relative bracket width.
pub const BISECTION_RTOL: f64 = 1e-10;
/// Forward scan step, in units of Ω.
pub const SCAN_STEP_FRACTION: f64 = 0.01;
/// Scan horizon, in units of Ω.
pub const SCAN_HORIZON: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EhrenfestError {
    #[error("initial classical vector is zero (Λ = 0)")]
    DegenerateCenter,
    #[error("departure stays below 1 up to the scan horizon t = {horizon}")]
    NoCrossing { horizon: f64 },
    #[error("time grid must start at t >= 0 and increase strictly (index {index})")]
    InvalidGrid { index: usize },
    #[error("first-order formula breaks down: ℏk²/(8Λ) = {classicality} >= 1")]
    FirstOrderBreakdown { classicality: f64 },
}

/// A break time; `Infinite` for the harmonic limits. Serializes as a number
/// or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BreakTime {
    Finite(f64),
    Infinite,
}

impl BreakTime {
    pub fn value(self) -> f64 {
        match self {
            BreakTime::Finite(t) => t,
            BreakTime::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == BreakTime::Infinite
    }
}

impl Serialize for BreakTime {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_real(&self.value(), s)
    }
}

/// Finite values as JSON numbers, infinities as `"inf"` / `"-inf"`.
pub fn serialize_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EhrenfestResult {
    pub t_analytic: Option<BreakTime>,
    pub t_numeric: Option<BreakTime>,
    /// Ω = 1/(k(k-1) g Λ^{k-1}).
    #[serde(serialize_with = "serialize_real")]
    pub omega_typical: f64,
    /// S ≅ 2Λ.
    pub action_typical: f64,
    /// ℏk²/(8Λ).
    pub classicality: f64,
}

fn is_harmonic(model: &OscillatorModel) -> bool {
    model.g() == 0.0 || model.k() == 1
}

fn check_center(model: &OscillatorModel) -> Result<f64, EhrenfestError> {
    let norm = model.center().norm();
    if norm == 0.0 {
        return Err(EhrenfestError::DegenerateCenter);
    }
    Ok(norm)
}

/// Ω = 1/(k(k-1) g Λ^{k-1}); infinite in the harmonic limits.
pub fn typical_period(model: &OscillatorModel) -> f64 {
    if is_harmonic(model) {
        return f64::INFINITY;
    }
    let k = model.k() as f64;
    1.0 / (k * (k - 1.0) * model.g() * model.lambda().powi(model.k() as i32 - 1))
}

/// `δ(t) = (ℏ/4) ‖∇²r(t)‖ / ‖r(0)‖`, Euclidean norms over all 2N components.
pub fn departure(model: &OscillatorModel, t: f64) -> Result<f64, EhrenfestError> {
    let norm0 = check_center(model)?;
    let lap = trajectory_laplacian(model, t);
    let norm = lap.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(model.hbar() / 4.0 * norm / norm0)
}

/// First `t > 0` with `δ(t) = 1`: forward scan in steps of Ω/100 up to 10⁴Ω,
/// then bisection on the bracketing step.
pub fn ehrenfest_numeric(model: &OscillatorModel) -> Result<BreakTime, EhrenfestError> {
    check_center(model)?;
    if is_harmonic(model) {
        return Ok(BreakTime::Infinite);
    }
    let omega = typical_period(model);
    let step = SCAN_STEP_FRACTION * omega;
    let horizon = SCAN_HORIZON * omega;
    let steps = (horizon / step).round() as u64;
    let mut lo = 0.0;
    for n in 1..=steps {
        let t = n as f64 * step;
        if departure(model, t)? >= 1.0 {
            return Ok(BreakTime::Finite(bisect(model, lo, t)?));
        }
        lo = t;
    }
    Err(EhrenfestError::NoCrossing { horizon })
}

/// Refines a bracket with `δ(lo) < 1 <= δ(hi)`.
fn bisect(model: &OscillatorModel, mut lo: f64, mut hi: f64) -> Result<f64, EhrenfestError> {
    while hi - lo > BISECTION_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if departure(model, mid)? >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ω, S ≅ 2Λ and ℏk²/(8Λ), with both break times left empty.
pub fn ehrenfest_diagnostics(model: &OscillatorModel) -> Result<EhrenfestResult, EhrenfestError> {
    check_center(model)?;
    let lambda = model.lambda();
    let k = model.k() as f64;
    Ok(EhrenfestResult {
        t_analytic: None,
        t_numeric: None,
        omega_typical: typical_period(model),
        action_typical: 2.0 * lambda,
        classicality: model.hbar() * k * k / (8.0 * lambda),
    })
}

/// First-order break time
/// `t_E = 1/(k(k-1)) · 1/(gΛ^{k-1}) · (2Λ/ℏ)^{1/2} · (1 - ℏk²/(8Λ))`
/// with the diagnostics of [`ehrenfest_diagnostics`].
pub fn ehrenfest_analytic(model: &OscillatorModel) -> Result<EhrenfestResult, EhrenfestError> {
    let mut r = ehrenfest_diagnostics(model)?;
    r.t_analytic = Some(if is_harmonic(model) {
        BreakTime::Infinite
    } else {
        if r.classicality >= 1.0 {
            return Err(EhrenfestError::FirstOrderBreakdown { classicality: r.classicality });
        }
        BreakTime::Finite(r.omega_typical * (r.action_typical / model.hbar()).sqrt() * (1.0 - r.classicality))
    });
    Ok(r)
}

/// Analytic result with the numeric crossing filled in.
pub fn ehrenfest_both(model: &OscillatorModel) -> Result<EhrenfestResult, EhrenfestError> {
    let mut r = ehrenfest_analytic(model)?;
    r.t_numeric = Some(ehrenfest_numeric(model)?);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepartureCurve {
    pub samples: Vec<(f64, f64)>,
    pub model: OscillatorModel,
    /// First `δ = 1` crossing inside the grid, refined by bisection.
    pub crossing: Option<f64>,
}

impl DepartureCurve {
    /// `t,delta` rows with shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,delta\n");
        for (t, d) in &self.samples {
            s.push_str(&format!("{t},{d}\n"));
        }
        s
    }
}

pub fn departure_curve(model: &OscillatorModel, t_grid: &[f64]) -> Result<DepartureCurve, EhrenfestError> {
    for (index, w) in t_grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(EhrenfestError::InvalidGrid { index: index + 1 });
        }
    }
    if let Some(&t0) = t_grid.first() {
        if !(t0 >= 0.0 && t0.is_finite()) || !t_grid[t_grid.len() - 1].is_finite() {
            return Err(EhrenfestError::InvalidGrid { index: 0 });
        }
    }
    check_center(model)?;
    let deltas: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| departure(model, t))
        .collect::<Result<_, _>>()?;
    let mut crossing = None;
    if let Some(first) = deltas.iter().position(|&d| d >= 1.0) {
        crossing = Some(if first == 0 {
            t_grid[0]
        } else {
            bisect(model, t_grid[first - 1], t_grid[first])?
        });
    }
    Ok(DepartureCurve {
        samples: t_grid.iter().copied().zip(deltas).collect(),
        model: model.clone(),
        crossing,
    })
}

/// `r(t) + (ℏ/4) ∇²r(t)`: the first-order smoothed centroid.
pub fn smoothed_centroid_first_order(model: &OscillatorModel, t: f64) -> PhasePoint {
    let r = classical_flow(model, model.center(), t);
    let lap = trajectory_laplacian(model, t);
    let h4 = model.hbar() / 4.0;
    PhasePoint::new(r.coords().iter().zip(&lap).map(|(a, b)| a + h4 * b).collect())
        .expect("finite centroid")
}
