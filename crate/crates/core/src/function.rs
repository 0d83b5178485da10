//! Evaluable function handles used throughout the calculus.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A pure, deterministic real-to-complex function on the interval of a beta map.
///
/// An optional exact derivative may be attached. It is consulted only at the
/// fixed point `s0`, where the beta-derivative is defined as the ordinary
/// derivative instead of a difference quotient.
#[derive(Clone)]
pub struct ScalarFunction {
    eval: ComplexFn,
    derivative: Option<ComplexFn>,
}

impl ScalarFunction {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            derivative: None,
        }
    }

    /// Wraps a real-valued closure.
    pub fn real<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(move |t| Complex64::new(f(t), 0.0))
    }

    pub fn constant(value: Complex64) -> Self {
        Self::new(move |_| value).with_derivative(|_| Complex64::new(0.0, 0.0))
    }

    pub fn polynomial(poly: Polynomial) -> Self {
        let derivative = poly.derivative();
        Self::new(move |t| poly.eval(t)).with_derivative(move |t| derivative.eval(t))
    }

    /// Attaches an exact derivative, used as the override at `s0`.
    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        (self.eval)(t)
    }

    pub fn exact_derivative(&self, t: f64) -> Option<Complex64> {
        self.derivative.as_ref().map(|d| d(t))
    }

    pub fn has_exact_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Pointwise product. The exact derivative is carried over when both factors have one.
    pub fn mul(&self, other: &ScalarFunction) -> ScalarFunction {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let product = Self::new(move |t| f(t) * g(t));
        match (&self.derivative, &other.derivative) {
            (Some(df), Some(dg)) => {
                let (f, g, df, dg) = (self.eval.clone(), other.eval.clone(), df.clone(), dg.clone());
                product.with_derivative(move |t| df(t) * g(t) + f(t) * dg(t))
            }
            _ => product,
        }
    }

    /// `alpha * self + gamma * other`.
    pub fn linear_combination(
        &self,
        alpha: Complex64,
        other: &ScalarFunction,
        gamma: Complex64,
    ) -> ScalarFunction {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let combo = Self::new(move |t| alpha * f(t) + gamma * g(t));
        match (&self.derivative, &other.derivative) {
            (Some(df), Some(dg)) => {
                let (df, dg) = (df.clone(), dg.clone());
                combo.with_derivative(move |t| alpha * df(t) + gamma * dg(t))
            }
            _ => combo,
        }
    }

    /// `t -> self(inner(t))`, with no derivative override.
    pub fn compose_real<F>(&self, inner: F) -> ScalarFunction
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f = self.eval.clone();
        Self::new(move |t| f(inner(t)))
    }

    pub fn conj(&self) -> ScalarFunction {
        let f = self.eval.clone();
        let conj = Self::new(move |t| f(t).conj());
        match &self.derivative {
            Some(d) => {
                let d = d.clone();
                conj.with_derivative(move |t| d(t).conj())
            }
            None => conj,
        }
    }
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("exact_derivative", &self.derivative.is_some())
            .finish_non_exhaustive()
    }
}

/// Complex polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::new(vec![Complex64::new(0.0, 0.0)]);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }
}

impl From<Polynomial> for ScalarFunction {
    fn from(poly: Polynomial) -> Self {
        ScalarFunction::polynomial(poly)
    }
}
