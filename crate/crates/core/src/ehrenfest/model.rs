use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dual::{HyperDual, Scalar};
use crate::phasespace::PhasePoint;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid model field `{field}`: {reason}")]
pub struct ModelError {
    pub field: &'static str,
    pub reason: String,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError { field, reason: reason.into() }
}

/// JSON model document; every field is required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "N")]
    pub n: i64,
    pub k: i64,
    pub g: f64,
    pub hbar: f64,
    pub omega: Vec<f64>,
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
}

/// `H = Σ ω_i (q_i² + p_i²)/2 + g Λ^k` with `Λ = Σ (q_i² + p_i²)/2`.
/// Every mode rotates by `Θ_i = ω_i t + g t k Λ^{k-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorModel {
    k: u32,
    g: f64,
    hbar: f64,
    omega: Vec<f64>,
    center: PhasePoint,
}

/// `Λ(x) = Σ (q_i² + p_i²)/2`.
pub fn action<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::constant(0.0), |acc, &v| acc + v * v) * T::constant(0.5)
}

impl OscillatorModel {
    pub fn new(k: u32, g: f64, hbar: f64, omega: Vec<f64>, center: PhasePoint) -> Result<Self, ModelError> {
        let n = omega.len();
        if n == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        if k == 0 {
            return Err(invalid("k", "must be at least 1"));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(invalid("g", "must be finite and non-negative"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(invalid("hbar", "must be finite and positive"));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(invalid("omega", "entries must be finite"));
        }
        if center.n_modes() != n {
            return Err(invalid("q0", format!("expected {n} modes, got {}", center.n_modes())));
        }
        Ok(OscillatorModel { k, g, hbar, omega, center })
    }

    pub fn from_config(c: &ModelConfig) -> Result<Self, ModelError> {
        if c.n < 1 {
            return Err(invalid("N", "must be at least 1"));
        }
        let n = c.n as usize;
        if c.k < 1 || c.k > i32::MAX as i64 {
            return Err(invalid("k", "must be a positive integer"));
        }
        for (field, v) in [("omega", &c.omega), ("q0", &c.q0), ("p0", &c.p0)] {
            if v.len() != n {
                return Err(invalid(field, format!("expected {n} entries, got {}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid(field, "entries must be finite"));
            }
        }
        let center = PhasePoint::from_qp(&c.q0, &c.p0).map_err(|e| invalid("q0", e.to_string()))?;
        OscillatorModel::new(c.k as u32, c.g, c.hbar, c.omega.clone(), center)
    }

    pub fn to_config(&self) -> ModelConfig {
        let n = self.n_modes();
        ModelConfig {
            n: n as i64,
            k: self.k as i64,
            g: self.g,
            hbar: self.hbar,
            omega: self.omega.clone(),
            q0: (0..n).map(|i| self.center.q(i)).collect(),
            p0: (0..n).map(|i| self.center.p(i)).collect(),
        }
    }

    /// N = 2, k = 2, ω = 1, g = 0.1, q = p = 1 (Λ = 2).
    pub fn figure_defaults(hbar: f64) -> Self {
        let center = PhasePoint::new(vec![1.0; 4]).expect("finite");
        OscillatorModel::new(2, 0.1, hbar, vec![1.0, 1.0], center).expect("valid defaults")
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }
    pub fn center(&self) -> &PhasePoint {
        &self.center
    }

    /// Copy with a different ℏ (validated).
    pub fn with_hbar(&self, hbar: f64) -> Result<Self, ModelError> {
        OscillatorModel::new(self.k, self.g, hbar, self.omega.clone(), self.center.clone())
    }

    pub fn with_center(&self, center: PhasePoint) -> Result<Self, ModelError> {
        OscillatorModel::new(self.k, self.g, self.hbar, self.omega.clone(), center)
    }

    /// Λ at the model center.
    pub fn lambda(&self) -> f64 {
        action(self.center.coords())
    }

    /// `g t k Λ^{k-1}`, the amplitude-dependent part of every mode's angle.
    fn nonlinear_angle<T: Scalar>(&self, lambda: T, t: f64) -> T {
        let kf = self.k as f64;
        lambda.powi(self.k as i32 - 1) * T::constant(self.g * t * kf)
    }

    /// Rotation angles at the model center.
    pub fn theta(&self, t: f64) -> Vec<f64> {
        let shared = self.nonlinear_angle(self.lambda(), t);
        self.omega.iter().map(|w| w * t + shared).collect()
    }

    /// Exact flow on raw coordinates `(q1, p1, ...)` for any scalar type.
    /// The angle uses Λ of the argument, so this is a map on all of phase space.
    pub fn flow_coords<T: Scalar>(&self, x: &[T], t: f64) -> Vec<T> {
        let shared = self.nonlinear_angle(action(x), t);
        let mut out = Vec::with_capacity(x.len());
        for (i, w) in self.omega.iter().enumerate() {
            let th = shared + T::constant(w * t);
            let (c, s) = (th.cos(), th.sin());
            let (q, p) = (x[2 * i], x[2 * i + 1]);
            out.push(q * c + p * s);
            out.push(p * c - q * s);
        }
        out
    }

    /// `∂Θ/∂Λ = g t k (k-1) Λ^{k-2}` at the center.
    pub fn angle_slope(&self, t: f64) -> f64 {
        let k = self.k as f64;
        if self.k < 2 {
            return 0.0;
        }
        self.g * t * k * (k - 1.0) * self.lambda().powi(self.k as i32 - 2)
    }
}

/// `r(t)` for an arbitrary initial point.
pub fn classical_flow(model: &OscillatorModel, x: &PhasePoint, t: f64) -> PhasePoint {
    PhasePoint::new(model.flow_coords(x.coords(), t)).expect("rotation of finite data is finite")
}

/// `∇²r(t)` at the model center from the closed form
/// `∇²w_i(t) = -2 w_i(t) Θ' [Θ'Λ + i(N + k - 1)]`, `w_i = q_i + i p_i`,
/// `Θ' = ∂Θ/∂Λ`; real part is the q component, imaginary part the p component.
pub fn trajectory_laplacian(model: &OscillatorModel, t: f64) -> Vec<f64> {
    let slope = model.angle_slope(t);
    let lambda = model.lambda();
    let nk = (model.n_modes() + model.k as usize) as f64 - 1.0;
    let factor = Complex64::new(slope * lambda, nk) * (-2.0 * slope);
    let r = model.flow_coords(model.center.coords(), t);
    let mut out = Vec::with_capacity(r.len());
    for i in 0..model.n_modes() {
        let lap = Complex64::new(r[2 * i], r[2 * i + 1]) * factor;
        out.push(lap.re);
        out.push(lap.im);
    }
    out
}

/// `∇²r(t)` at the model center by hyper-dual differentiation of the flow.
pub fn trajectory_laplacian_autodiff(model: &OscillatorModel, t: f64) -> Vec<f64> {
    let x = model.center.coords();
    let mut out = vec![0.0; x.len()];
    for j in 0..x.len() {
        let seeded: Vec<HyperDual> = x
            .iter()
            .enumerate()
            .map(|(n, &v)| if n == j { HyperDual::new(v, 1.0, 1.0, 0.0) } else { HyperDual::constant(v) })
            .collect();
        for (o, y) in out.iter_mut().zip(model.flow_coords(&seeded, t)) {
            *o += y.e12;
        }
    }
    out
}

/// Value, gradient and Hessian of one flow component at `x`.
pub fn flow_component_jet(model: &OscillatorModel, x: &[f64], t: f64, component: usize) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let d = x.len();
    let mut value = 0.0;
    let mut grad = vec![0.0; d];
    let mut hess = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            let seeded: Vec<HyperDual> = x
                .iter()
                .enumerate()
                .map(|(n, &v)| HyperDual::new(v, f64::from(n == a), f64::from(n == b), 0.0))
                .collect();
            let y = model.flow_coords(&seeded, t)[component];
            value = y.re;
            if a == b {
                grad[a] = y.e1;
            }
            hess[a][b] = y.e12;
            hess[b][a] = y.e12;
        }
    }
    (value, grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn model(n: usize, k: u32, g: f64, hbar: f64, center: Vec<f64>) -> OscillatorModel {
        OscillatorModel::new(k, g, hbar, vec![1.0; n], PhasePoint::new(center).unwrap()).unwrap()
    }

    #[test]
    fn flow_examples() {
        let m = model(1, 2, 0.0, 1.0, vec![1.0, 0.0]);
        let x = PhasePoint::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(classical_flow(&m, &x, 0.0), x);
        let y = classical_flow(&m, &x, FRAC_PI_2);
        assert!(y.q(0).abs() < 1e-15 && (y.p(0) + 1.0).abs() < 1e-15);
        let m = OscillatorModel::figure_defaults(1.0);
        let th = m.theta(2.0);
        assert!((th[0] - 2.8).abs() < 1e-15 && (th[1] - 2.8).abs() < 1e-15);
    }

    #[test]
    fn laplacian_paths_agree() {
        let m = OscillatorModel::figure_defaults(1.0);
        for &t in &[0.0, 0.3, 2.0, 17.5] {
            let a = trajectory_laplacian(&m, t);
            let b = trajectory_laplacian_autodiff(&m, t);
            let scale = a.iter().map(|v| v.abs()).fold(1e-300, f64::max);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-10 * scale, "t={t}: {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn harmonic_limits_have_zero_laplacian() {
        for (k, g) in [(2, 0.0), (1, 0.3)] {
            let m = model(2, k, g, 1.0, vec![0.5, 1.0, -0.2, 0.3]);
            assert!(trajectory_laplacian(&m, 3.0).iter().all(|&v| v == 0.0));
            assert!(trajectory_laplacian_autodiff(&m, 3.0).iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn config_validation_names_field() {
        let good = OscillatorModel::figure_defaults(1.0).to_config();
        assert!(OscillatorModel::from_config(&good).is_ok());
        let mut c = good.clone();
        c.omega.pop();
        assert_eq!(OscillatorModel::from_config(&c).unwrap_err().field, "omega");
        let mut c = good.clone();
        c.hbar = 0.0;
        assert_eq!(OscillatorModel::from_config(&c).unwrap_err().field, "hbar");
        let mut c = good;
        c.k = 0;
        assert_eq!(OscillatorModel::from_config(&c).unwrap_err().field, "k");
    }

    #[test]
    fn jet_matches_laplacian() {
        let m = model(2, 3, 0.2, 1.0, vec![0.5, 1.0, -0.2, 0.3]);
        let lap = trajectory_laplacian(&m, 1.7);
        for c in 0..4 {
            let (v, _, h) = flow_component_jet(&m, m.center().coords(), 1.7, c);
            assert_eq!(v, m.flow_coords(m.center().coords(), 1.7)[c]);
            let tr: f64 = (0..4).map(|i| h[i][i]).sum();
            assert!((tr - lap[c]).abs() < 1e-12);
        }
    }
}
