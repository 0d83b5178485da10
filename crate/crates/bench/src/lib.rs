//! Shared fixtures for the benchmarks.

use betacalc::{BetaMap, Complex64, Endpoints, Polynomial, ScalarFunction, SlpProblem};

/// `f(t) = 1 + t - t^2 / 2 + t^3 / 6`.
pub fn cubic_polynomial() -> ScalarFunction {
    ScalarFunction::polynomial(Polynomial::real(&[1.0, 1.0, -0.5, 1.0 / 6.0]))
}

/// Dirichlet problem on `(0, 1)` for the Jackson map with `q = 0.5` and `r = 0`.
pub fn jackson_dirichlet(depth: usize) -> SlpProblem {
    SlpProblem::new(
        BetaMap::jackson(0.5).expect("valid q"),
        Endpoints::Right { b: 1.0 },
        ScalarFunction::constant(Complex64::new(0.0, 0.0)),
        (1.0, 0.0),
        (1.0, 0.0),
        depth,
    )
    .expect("valid problem")
}

/// Robin problem on `(-2, 6)` for the Hahn map with `q = 0.5`, `omega = 1` and `r(t) = t`.
pub fn hahn_two_sided(depth: usize) -> SlpProblem {
    SlpProblem::new(
        BetaMap::hahn(0.5, 1.0).expect("valid parameters"),
        Endpoints::Both { a: -2.0, b: 6.0 },
        ScalarFunction::polynomial(Polynomial::real(&[0.0, 1.0])),
        (1.0, 0.5),
        (2.0, 1.0),
        depth,
    )
    .expect("valid problem")
}
