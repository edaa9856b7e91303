//! Python module `ordquant`.

use num_complex::Complex64;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ordquant::cli;
use ordquant::ehrenfest::{self, EhrenfestError, ModelConfig, OscillatorModel};
use ordquant::exprparse::{self, ParsedExpr};
use ordquant::liouville::{self, FlowMap, GaussianEnsemble};
use ordquant::opcore::{self, Coeff, OrderTarget};
use ordquant::phasespace::{self, PhasePoint};

create_exception!(ordquant, ParseError, PyValueError, "Expression syntax error; `offset` is the byte position.");
create_exception!(ordquant, NoCrossingError, PyRuntimeError, "The departure never reached 1 within the scan horizon.");

fn parse_err(e: exprparse::ParseError) -> PyErr {
    let err = ParseError::new_err(e.to_string());
    Python::attach(|py| {
        let v = err.value(py);
        let _ = v.setattr("offset", e.offset);
        let _ = v.setattr("expected", e.expected.clone());
    });
    err
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ehrenfest_err(e: EhrenfestError) -> PyErr {
    match e {
        EhrenfestError::NoCrossing { .. } => NoCrossingError::new_err(e.to_string()),
        other => value_err(other),
    }
}

/// A real number given either as a float or as exact decimal text (`"0.1"`, `"3/4"`).
#[derive(FromPyObject)]
enum Number {
    Text(String),
    Float(f64),
}

impl Number {
    fn exact(&self) -> PyResult<BigRational> {
        match self {
            Number::Text(s) => cli::parse_exact(s).map_err(PyValueError::new_err),
            Number::Float(x) if x.is_finite() => Ok(opcore::rational_from_f64(*x)),
            Number::Float(x) => Err(PyValueError::new_err(format!("{x} is not finite"))),
        }
    }
}

fn parse_target(name: &str) -> PyResult<OrderTarget> {
    match name {
        "qp" => Ok(OrderTarget::QP),
        "pq" => Ok(OrderTarget::PQ),
        "normal" => Ok(OrderTarget::Normal),
        "antinormal" => Ok(OrderTarget::Antinormal),
        _ => Err(PyValueError::new_err(format!(
            "unknown target '{name}'; expected qp, pq, normal or antinormal"
        ))),
    }
}

/// Commutative polynomial in `q1, p1, q2, p2, ...` with exact coefficients.
#[pyclass(module = "ordquant", name = "PhasePoly", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPhasePoly(phasespace::PhasePoly);

#[pymethods]
impl PyPhasePoly {
    #[new]
    fn new(expr: &str) -> PyResult<Self> {
        exprparse::parse_phase_expr(expr).map(PyPhasePoly).map_err(parse_err)
    }

    fn __str__(&self) -> String {
        exprparse::render_phase(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("PhasePoly('{}')", self.__str__())
    }

    fn __add__(&self, other: &Self) -> Self {
        PyPhasePoly(&self.0 + &other.0)
    }

    fn __sub__(&self, other: &Self) -> Self {
        PyPhasePoly(&self.0 - &other.0)
    }

    fn __mul__(&self, other: &Self) -> Self {
        PyPhasePoly(&self.0 * &other.0)
    }

    fn __neg__(&self) -> Self {
        PyPhasePoly(-&self.0)
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree()
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.0.n_modes()
    }

    fn laplacian(&self) -> Self {
        PyPhasePoly(self.0.laplacian())
    }

    /// Gaussian smoothing `exp((sigma/4) ∇²)`; `sigma = ℏ` gives the
    /// coherent-state expectation symbol.
    #[pyo3(signature = (sigma, inverse = false))]
    fn smooth(&self, sigma: Number, inverse: bool) -> PyResult<Self> {
        let s = sigma.exact()?;
        if s < BigRational::from_integer(0.into()) {
            return Err(PyValueError::new_err("sigma must be non-negative"));
        }
        let s = Coeff::from_rational(s);
        Ok(PyPhasePoly(if inverse { phasespace::inverse_smooth(&self.0, &s) } else { self.0.smooth(&s) }))
    }

    /// Value at `(q1, p1, ...)`; symbolic ℏ constants are taken at `hbar`.
    #[pyo3(signature = (point, hbar = 1.0))]
    fn evaluate(&self, point: Vec<f64>, hbar: f64) -> PyResult<Complex64> {
        let p = PhasePoint::new(point).map_err(value_err)?;
        self.0.evaluate(&p, hbar).map_err(value_err)
    }

    /// Totally symmetric operator, QP-ordered.
    fn quantize(&self) -> PyOperatorPoly {
        PyOperatorPoly(opcore::quantize_symmetric_poly(&self.0))
    }
}

/// Noncommutative polynomial in `Q, P` or `a, ad` generators.
#[pyclass(module = "ordquant", name = "OperatorPoly", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyOperatorPoly(opcore::OperatorPoly);

#[pymethods]
impl PyOperatorPoly {
    #[new]
    fn new(expr: &str) -> PyResult<Self> {
        exprparse::parse_operator_expr(expr).map(PyOperatorPoly).map_err(parse_err)
    }

    fn __str__(&self) -> String {
        exprparse::render_operator(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("OperatorPoly('{}')", self.__str__())
    }

    fn __add__(&self, other: &Self) -> Self {
        PyOperatorPoly(&self.0 + &other.0)
    }

    fn __sub__(&self, other: &Self) -> Self {
        PyOperatorPoly(&self.0 - &other.0)
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.0.multiply(&other.0).map(PyOperatorPoly).map_err(value_err)
    }

    fn adjoint(&self) -> Self {
        PyOperatorPoly(self.0.adjoint())
    }

    #[pyo3(signature = (target = "qp"))]
    fn ordered(&self, target: &str) -> PyResult<Self> {
        opcore::canonicalize(&self.0, parse_target(target)?).map(PyOperatorPoly).map_err(value_err)
    }

    /// `<z| X |z>` for the coherent state centered at `(q1, p1, ...)`.
    fn expectation(&self, center: Vec<f64>, hbar: f64) -> PyResult<Complex64> {
        let c = PhasePoint::new(center).map_err(value_err)?;
        opcore::coherent_expectation(&self.0, &c, hbar).map_err(value_err)
    }

    /// Exact expectation with symbolic ℏ, rendered as text.
    fn expectation_exact(&self, center: Vec<Number>) -> PyResult<String> {
        let c = center.iter().map(Number::exact).collect::<PyResult<Vec<_>>>()?;
        let v = opcore::coherent_expectation_exact(&self.0, &c).map_err(value_err)?;
        Ok(exprparse::render_coeff(&v))
    }
}

/// `N` coupled oscillators with a shared `g Λ^k` nonlinearity.
#[pyclass(module = "ordquant", name = "Model", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel(OscillatorModel);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (k, g, hbar, omega, q0, p0))]
    fn new(k: u32, g: f64, hbar: f64, omega: Vec<f64>, q0: Vec<f64>, p0: Vec<f64>) -> PyResult<Self> {
        let config = ModelConfig { n: omega.len() as i64, k: i64::from(k), g, hbar, omega, q0, p0 };
        OscillatorModel::from_config(&config).map(PyModel).map_err(value_err)
    }

    /// Parameters of the two-mode quartic example, `q = p = 1`.
    #[staticmethod]
    #[pyo3(signature = (hbar = 1.0))]
    fn figure_defaults(hbar: f64) -> Self {
        PyModel(OscillatorModel::figure_defaults(hbar))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let config: ModelConfig = serde_json::from_str(text).map_err(value_err)?;
        OscillatorModel::from_config(&config).map(PyModel).map_err(value_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0.to_config()).expect("serializable")
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.0.hbar()
    }

    #[getter]
    fn action(&self) -> f64 {
        self.0.lambda()
    }

    fn with_hbar(&self, hbar: f64) -> PyResult<Self> {
        self.0.with_hbar(hbar).map(PyModel).map_err(value_err)
    }

    fn flow(&self, point: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
        let p = PhasePoint::new(point).map_err(value_err)?;
        if p.n_modes() != self.0.n_modes() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", 2 * self.0.n_modes())));
        }
        Ok(ehrenfest::classical_flow(&self.0, &p, t).coords().to_vec())
    }

    fn trajectory_laplacian(&self, t: f64) -> Vec<f64> {
        ehrenfest::trajectory_laplacian(&self.0, t)
    }

    fn departure(&self, t: f64) -> PyResult<f64> {
        ehrenfest::departure(&self.0, t).map_err(ehrenfest_err)
    }

    fn departure_curve(&self, times: Vec<f64>) -> PyResult<Vec<f64>> {
        let curve = ehrenfest::departure_curve(&self.0, &times).map_err(ehrenfest_err)?;
        Ok(curve.samples.iter().map(|&(_, d)| d).collect())
    }

    /// Break times and diagnostics; `inf` marks the harmonic limits.
    #[pyo3(signature = (method = "both"))]
    fn ehrenfest<'py>(&self, py: Python<'py>, method: &str) -> PyResult<Bound<'py, PyDict>> {
        let r = match method {
            "analytic" => ehrenfest::ehrenfest_analytic(&self.0),
            "numeric" => ehrenfest::ehrenfest_diagnostics(&self.0).and_then(|mut r| {
                r.t_numeric = Some(ehrenfest::ehrenfest_numeric(&self.0)?);
                Ok(r)
            }),
            "both" => ehrenfest::ehrenfest_both(&self.0),
            _ => return Err(PyValueError::new_err("method must be analytic, numeric or both")),
        }
        .map_err(ehrenfest_err)?;
        let d = PyDict::new(py);
        d.set_item("t_analytic", r.t_analytic.map(|t| t.value()))?;
        d.set_item("t_numeric", r.t_numeric.map(|t| t.value()))?;
        d.set_item("omega_typical", r.omega_typical)?;
        d.set_item("action_typical", r.action_typical)?;
        d.set_item("classicality", r.classicality)?;
        Ok(d)
    }
}

/// Canonical ordering of an operator or phase-space expression.
#[pyfunction]
#[pyo3(signature = (expr, target = "qp"))]
fn order(expr: &str, target: &str) -> PyResult<String> {
    let op = match exprparse::parse_expr(expr).map_err(parse_err)? {
        ParsedExpr::Phase(f) => opcore::quantize_symmetric_poly(&f),
        ParsedExpr::Operator(x) => x,
    };
    let ordered = opcore::canonicalize(&op, parse_target(target)?).map_err(value_err)?;
    Ok(exprparse::render_operator(&ordered))
}

/// Ensemble average of a phase-space polynomial under a linear flow against
/// the smoothed prediction.
#[pyfunction]
#[pyo3(signature = (expr, center, sigma, t, flow = "harmonic", omega = None, samples = 1_000_000, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn mc_verify<'py>(
    py: Python<'py>,
    expr: &str,
    center: Vec<f64>,
    sigma: f64,
    t: f64,
    flow: &str,
    omega: Option<Vec<f64>>,
    samples: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let f = exprparse::parse_phase_expr(expr).map_err(parse_err)?;
    let center = PhasePoint::new(center).map_err(value_err)?;
    let flow = match flow {
        "identity" => FlowMap::Identity,
        "harmonic" => FlowMap::Harmonic { omega: omega.unwrap_or_else(|| vec![1.0; center.n_modes()]) },
        _ => return Err(PyValueError::new_err("flow must be identity or harmonic")),
    };
    let ensemble = GaussianEnsemble::new(center, sigma).map_err(value_err)?;
    let r = py
        .detach(|| liouville::verify_smoothing_identity(&f, &ensemble, &flow, t, samples, seed))
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("mean", r.mean)?;
    d.set_item("stderr", r.stderr)?;
    d.set_item("reference", r.reference)?;
    d.set_item("pass", r.pass)?;
    d.set_item("samples", r.samples)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

/// Runs the command-line front end in-process: `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> (i32, String, String) {
    py.detach(|| {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("ordquant".to_string()).chain(args);
        let code = cli::run(argv, &mut out, &mut err);
        (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
    })
}

#[pymodule]
#[pyo3(name = "ordquant")]
fn ordquant_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPhasePoly>()?;
    m.add_class::<PyOperatorPoly>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(order, m)?)?;
    m.add_function(wrap_pyfunction!(mc_verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("NoCrossingError", m.py().get_type::<NoCrossingError>())?;
    Ok(())
}
