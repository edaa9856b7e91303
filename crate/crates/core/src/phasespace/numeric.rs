use num_complex::Complex64;

/// Double-precision polynomial for hot loops. Variables are addressed by
/// their index in the `(q1, p1, q2, p2, ...)` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericPoly {
    terms: Vec<(Vec<(usize, u32)>, Complex64)>,
}

impl NumericPoly {
    pub fn new(terms: Vec<(Vec<(usize, u32)>, Complex64)>) -> Self {
        NumericPoly { terms }
    }

    pub fn n_vars(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|(vars, _)| vars.iter().map(|&(i, _)| i + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(vars, c)| {
                let v: f64 = vars.iter().map(|&(i, e)| x[i].powi(e as i32)).product();
                c * v
            })
            .sum()
    }

    /// Real part of [`NumericPoly::eval`]; imaginary coefficients are dropped.
    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(vars, c)| {
                let v: f64 = vars.iter().map(|&(i, e)| x[i].powi(e as i32)).product();
                c.re * v
            })
            .sum()
    }
}
