use thiserror::Error;

/// Errors produced by the beta-calculus library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval: lower bound {lo} is not below upper bound {hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(&'static str),

    #[error("beta returned a non-finite value at t = {t}")]
    NonFiniteSample { t: f64 },

    #[error("orbit left the interval at step {step} (value {value})")]
    DepthExceeded { step: usize, value: f64 },

    #[error("{what} = {value} is outside the admissible range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("no convergence in {context} after {iterations} iterations")]
    NoConvergence {
        context: &'static str,
        iterations: usize,
    },

    #[error("orbit of x = {x} reached k_max = {k_max} with tail gap {tail_gap:e} still above tolerance")]
    TruncationCap { x: f64, k_max: usize, tail_gap: f64 },

    #[error("function returned a non-finite value at t = {t}")]
    NonFiniteValue { t: f64 },

    #[error("beta-integral from s0 to x = {x} diverges: partial sum {partial_sum:e} after {terms} terms")]
    SeriesDivergence { x: f64, terms: usize, partial_sum: f64 },

    #[error("invalid norm exponent p = {0}; need p >= 1 or p = infinity")]
    InvalidExponent(f64),

    #[error("lattice functions live on different lattices")]
    LatticeMismatch,

    #[error(
        "product factor vanishes at beta^k(t) = {point} (evaluating at t = {t}); e_p is undefined there"
    )]
    PoleEncountered { t: f64, point: f64 },

    #[error("boundary condition elimination divides by zero at the {end} end")]
    DegenerateBc { end: &'static str },

    #[error("boundary coefficients violate the nondegeneracy condition |{first}| + |{second}| != 0 at the {end} end")]
    Nondegeneracy {
        end: &'static str,
        first: &'static str,
        second: &'static str,
    },

    #[error("potential r is not real-valued at t = {t} (imaginary part {imag:e})")]
    RealityViolation { t: f64, imag: f64 },

    #[error("invalid endpoints: {0}")]
    InvalidEndpoints(String),

    #[error("eigensolver did not converge for eigenvalue {index} within {steps} bisection steps")]
    EigenNoConvergence { index: usize, steps: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
