//! Beta-exponential and beta-trigonometric functions as truncated infinite products.
//!
//! `e_p(t) = 1 / prod_k [1 - p(t_k)(t_k - t_{k+1})]` and
//! `E_p(t) = prod_k [1 + p(t_k)(t_k - t_{k+1})]` over the orbit `t_k = beta^k(t)`.
//! The trigonometric functions combine `e_{ip}`, `e_{-ip}` (or `E`) with the
//! conventional divisor `2i` for the sines, so that `e_{ip} = cos + i sin`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beta_map::{BetaMap, Tolerances};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::quantum_calc::beta_inverse_derivative;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// The coefficient `p` of the exponentials, continuous at `s0`.
#[derive(Debug, Clone)]
pub enum CoefficientFunction {
    Constant(Complex64),
    Function(ScalarFunction),
}

impl CoefficientFunction {
    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            CoefficientFunction::Constant(z) => *z,
            CoefficientFunction::Function(f) => f.eval(t),
        }
    }

    /// `c * p`.
    pub fn scale(&self, c: Complex64) -> Self {
        match self {
            CoefficientFunction::Constant(z) => CoefficientFunction::Constant(c * z),
            CoefficientFunction::Function(f) => {
                let g = f.clone();
                let scaled = ScalarFunction::new(move |t| c * g.eval(t));
                CoefficientFunction::Function(match f.has_exact_derivative() {
                    true => {
                        let g = f.clone();
                        scaled.with_derivative(move |t| c * g.exact_derivative(t).unwrap_or_default())
                    }
                    false => scaled,
                })
            }
        }
    }

    pub fn as_scalar(&self) -> ScalarFunction {
        match self {
            CoefficientFunction::Constant(z) => ScalarFunction::constant(*z),
            CoefficientFunction::Function(f) => f.clone(),
        }
    }
}

impl From<ScalarFunction> for CoefficientFunction {
    fn from(f: ScalarFunction) -> Self {
        CoefficientFunction::Function(f)
    }
}

impl From<Complex64> for CoefficientFunction {
    fn from(z: Complex64) -> Self {
        CoefficientFunction::Constant(z)
    }
}

impl From<f64> for CoefficientFunction {
    fn from(x: f64) -> Self {
        CoefficientFunction::Constant(Complex64::new(x, 0.0))
    }
}

/// Which special function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialKind {
    #[serde(rename = "e")]
    ExpSmall,
    #[serde(rename = "E")]
    ExpBig,
    #[serde(rename = "sin")]
    Sin,
    #[serde(rename = "cos")]
    Cos,
    #[serde(rename = "Sin")]
    SinBig,
    #[serde(rename = "Cos")]
    CosBig,
}

impl SpecialKind {
    pub const ALL: [SpecialKind; 6] = [
        SpecialKind::ExpSmall,
        SpecialKind::ExpBig,
        SpecialKind::Sin,
        SpecialKind::Cos,
        SpecialKind::SinBig,
        SpecialKind::CosBig,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            SpecialKind::ExpSmall => "e",
            SpecialKind::ExpBig => "E",
            SpecialKind::Sin => "sin",
            SpecialKind::Cos => "cos",
            SpecialKind::SinBig => "Sin",
            SpecialKind::CosBig => "Cos",
        }
    }

    /// Built from `E` products rather than `e` products.
    pub fn is_big(self) -> bool {
        matches!(
            self,
            SpecialKind::ExpBig | SpecialKind::SinBig | SpecialKind::CosBig
        )
    }

    /// The trigonometric partner: `sin <-> cos`, `Sin <-> Cos`, and the exponentials map to themselves.
    pub fn partner(self) -> SpecialKind {
        match self {
            SpecialKind::Sin => SpecialKind::Cos,
            SpecialKind::Cos => SpecialKind::Sin,
            SpecialKind::SinBig => SpecialKind::CosBig,
            SpecialKind::CosBig => SpecialKind::SinBig,
            other => other,
        }
    }

    /// `+1` for exponentials and sines, `-1` for cosines: `D_beta cos = -p sin`.
    fn derivative_sign(self) -> f64 {
        match self {
            SpecialKind::Cos | SpecialKind::CosBig => -1.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for SpecialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for SpecialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SpecialKind::ALL
            .into_iter()
            .find(|k| k.symbol() == s)
            .ok_or_else(|| {
                format!("unknown special function kind `{s}`; expected one of e, E, sin, cos, Sin, Cos")
            })
    }
}

/// `prod_k [1 + sign * p(t_k)(t_k - t_{k+1})]`, multiplied deepest factor first.
///
/// Stops at the lattice truncation depth of `t` or at the first factor whose
/// deviation from 1 is below `atol`.
fn orbit_product(
    p: &CoefficientFunction,
    t: f64,
    sign: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<Complex64> {
    tol.check()?;
    map.check_point("t", t)?;
    let s0 = map.fixed_point();
    if t == s0 {
        return Ok(ONE);
    }
    let threshold = tol.atol * (t - s0).abs().max(1.0);
    let mut factors = Vec::new();
    let mut x = t;
    while (x - s0).abs() > threshold {
        if factors.len() >= tol.k_max {
            return Err(Error::NoConvergence {
                context: "beta-exponential product",
                iterations: tol.k_max,
            });
        }
        let next = map.forward(x);
        if !next.is_finite() {
            return Err(Error::NonFiniteSample { t: x });
        }
        let px = p.eval(x);
        if !(px.re.is_finite() && px.im.is_finite()) {
            return Err(Error::NonFiniteValue { t: x });
        }
        let deviation = px * (x - next);
        if deviation.norm() < tol.atol {
            break;
        }
        let factor = ONE + sign * deviation;
        if sign < 0.0 && factor.norm() < tol.atol {
            return Err(Error::PoleEncountered { t, point: x });
        }
        factors.push(factor);
        x = next;
    }
    Ok(factors.iter().rev().fold(ONE, |acc, f| acc * f))
}

/// `e_{p,beta}(t)`.
pub fn exp_small(p: &CoefficientFunction, t: f64, map: &BetaMap, tol: &Tolerances) -> Result<Complex64> {
    orbit_product(p, t, -1.0, map, tol).map(|d| ONE / d)
}

/// `E_{p,beta}(t)`.
pub fn exp_big(p: &CoefficientFunction, t: f64, map: &BetaMap, tol: &Tolerances) -> Result<Complex64> {
    orbit_product(p, t, 1.0, map, tol)
}

/// `sin`, `cos`, `Sin` or `Cos` built from the exponentials with coefficients `ip` and `-ip`.
pub fn trig(
    kind: SpecialKind,
    p: &CoefficientFunction,
    t: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<Complex64> {
    let exp = if kind.is_big() { exp_big } else { exp_small };
    let plus = exp(&p.scale(I), t, map, tol)?;
    let minus = exp(&p.scale(-I), t, map, tol)?;
    match kind {
        SpecialKind::Sin | SpecialKind::SinBig => Ok((plus - minus) / (2.0 * I)),
        SpecialKind::Cos | SpecialKind::CosBig => Ok((plus + minus) / 2.0),
        SpecialKind::ExpSmall => exp_small(p, t, map, tol),
        SpecialKind::ExpBig => exp_big(p, t, map, tol),
    }
}

/// Evaluates any of the six functions.
pub fn evaluate(
    kind: SpecialKind,
    p: &CoefficientFunction,
    t: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<Complex64> {
    match kind {
        SpecialKind::ExpSmall => exp_small(p, t, map, tol),
        SpecialKind::ExpBig => exp_big(p, t, map, tol),
        _ => trig(kind, p, t, map, tol),
    }
}

/// The special function as a function handle (non-finite on evaluation errors).
pub fn as_function(
    kind: SpecialKind,
    p: &CoefficientFunction,
    map: &BetaMap,
    tol: &Tolerances,
) -> ScalarFunction {
    let (p, map, tol) = (p.clone(), map.clone(), *tol);
    ScalarFunction::new(move |t| {
        evaluate(kind, &p, t, &map, &tol).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })
}

/// The value `D_beta y(t)` predicted by the product structure.
///
/// `e` and the small trigonometric functions differentiate at `t`
/// (`D e = p e`, `D sin = p cos`, `D cos = -p sin`); the `E` family evaluates
/// the result one step down the orbit (`D E = p E(beta(t))`, `D Sin = p Cos(beta(t))`,
/// `D Cos = -p Sin(beta(t))`).
pub fn beta_derivative_identity(
    kind: SpecialKind,
    p: &CoefficientFunction,
    t: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<Complex64> {
    let at = if kind.is_big() { map.forward(t) } else { t };
    Ok(kind.derivative_sign() * p.eval(t) * evaluate(kind.partner(), p, at, map, tol)?)
}

/// The value `D_{beta^-1} y(t)`: the forward identity evaluated at `beta^-1(t)`.
///
/// Explicitly `D_{beta^-1} e = p(a) e(a)`, `D_{beta^-1} E = p(a) E(t)`,
/// `D_{beta^-1} sin = p(a) cos(a)`, `D_{beta^-1} Sin = p(a) Cos(t)` with
/// `a = beta^-1(t)`, and the cosines with a minus sign.
pub fn inverse_derivative_identity(
    kind: SpecialKind,
    p: &CoefficientFunction,
    t: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<Complex64> {
    let a = map.invert(t, tol)?;
    let at = if kind.is_big() { t } else { a };
    Ok(kind.derivative_sign() * p.eval(a) * evaluate(kind.partner(), p, at, map, tol)?)
}

/// The value `D_{beta^-1} D_beta y(t)` from the inverse product rule.
///
/// With `a = beta^-1(t)`, `w = D_beta beta^-1 (t)` and `Dp = D_{beta^-1} p(t)`:
///
/// - `e`: `Dp e(t) + p(a)^2 e(a)`
/// - `E`: `Dp E(beta t) + p(a) p(t) E(beta t) / w`
/// - `sin`: `Dp cos(t) - p(a)^2 sin(a)`, `cos`: `-Dp sin(t) - p(a)^2 cos(a)`
/// - `Sin`: `Dp Cos(beta t) - p(a) p(t) Sin(beta t) / w`, `Cos`: `-Dp Sin(beta t) - p(a) p(t) Cos(beta t) / w`
pub fn second_derivative_identity(
    kind: SpecialKind,
    p: &CoefficientFunction,
    t: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<Complex64> {
    let a = map.invert(t, tol)?;
    let bt = map.forward(t);
    let dp = match p {
        CoefficientFunction::Constant(_) => Complex64::new(0.0, 0.0),
        CoefficientFunction::Function(f) => beta_inverse_derivative(f, t, map, tol)?,
    };
    let (pa, pt) = (p.eval(a), p.eval(t));
    let sign = kind.derivative_sign();
    let y = |k: SpecialKind, x: f64| evaluate(k, p, x, map, tol);
    let partner = kind.partner();
    if kind.is_big() {
        let w = map.inverse_weight(t, tol)?;
        match kind {
            SpecialKind::ExpBig => Ok(dp * y(kind, bt)? + pa * pt * y(kind, bt)? / w),
            _ => Ok(sign * dp * y(partner, bt)? - pa * pt * y(kind, bt)? / w),
        }
    } else {
        match kind {
            SpecialKind::ExpSmall => Ok(dp * y(kind, t)? + pa * pa * y(kind, a)?),
            _ => Ok(sign * dp * y(partner, t)? - pa * pa * y(kind, a)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Polynomial;
    use crate::quantum_calc::{beta_derivative, beta_inverse_derivative};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::new(1e-16, 1e-10, 100_000).unwrap()
    }

    /// Independent oracle: `n` factors of the Jackson product with constant `z`.
    fn jackson_product(q: f64, z: Complex64, t: f64, sign: f64, n: usize) -> Complex64 {
        (0..n).fold(ONE, |acc, k| {
            let tk = t * q.powi(k as i32);
            acc * (ONE + sign * z * (tk - q * tk))
        })
    }

    #[test]
    fn values_at_fixed_point_are_one() {
        let p = CoefficientFunction::Constant(c(0.7, -0.2));
        for map in [
            BetaMap::jackson(0.5).unwrap(),
            BetaMap::hahn(0.5, 1.0).unwrap(),
            BetaMap::cubic(),
        ] {
            let s0 = map.fixed_point();
            assert_eq!(exp_small(&p, s0, &map, &tol()).unwrap(), ONE);
            assert_eq!(exp_big(&p, s0, &map, &tol()).unwrap(), ONE);
            assert_eq!(trig(SpecialKind::Cos, &p, s0, &map, &tol()).unwrap(), ONE);
            assert_eq!(trig(SpecialKind::CosBig, &p, s0, &map, &tol()).unwrap(), ONE);
            assert_eq!(trig(SpecialKind::Sin, &p, s0, &map, &tol()).unwrap(), c(0.0, 0.0));
            assert_eq!(
                trig(SpecialKind::SinBig, &p, s0, &map, &tol()).unwrap(),
                c(0.0, 0.0)
            );
        }
    }

    #[test]
    fn zero_coefficient_gives_one() {
        let p = CoefficientFunction::Constant(c(0.0, 0.0));
        let map = BetaMap::hahn(0.5, 1.0).unwrap();
        for t in [-3.0, 0.0, 5.0, 11.0] {
            assert_eq!(exp_small(&p, t, &map, &tol()).unwrap(), ONE);
            assert_eq!(exp_big(&p, t, &map, &tol()).unwrap(), ONE);
        }
    }

    #[test]
    fn jackson_exponential_matches_product_oracle() {
        let map = BetaMap::jackson(0.5).unwrap();
        let v = exp_small(&1.0.into(), 0.5, &map, &tol()).unwrap();
        let oracle = ONE / jackson_product(0.5, ONE, 0.5, -1.0, 60);
        assert!((v - oracle).norm() < 1e-14);
        assert!((v.re - 1.731_373_309_727_532).abs() < 1e-12);
        let big = exp_big(&c(0.3, 0.4).into(), 0.9, &map, &tol()).unwrap();
        let oracle = jackson_product(0.5, c(0.3, 0.4), 0.9, 1.0, 60);
        assert!((big - oracle).norm() < 1e-14);
    }

    #[test]
    fn reciprocal_identity() {
        let p = CoefficientFunction::Function(
            Polynomial::new(vec![c(0.2, 0.1), c(-0.3, 0.5), c(0.1, 0.0)]).into(),
        );
        let minus = p.scale(c(-1.0, 0.0));
        let map = BetaMap::hahn(0.8, 0.4).unwrap();
        for t in [-2.0, 0.5, 1.9, 4.0, 7.5] {
            let prod = exp_small(&p, t, &map, &tol()).unwrap() * exp_big(&minus, t, &map, &tol()).unwrap();
            assert!((prod - ONE).norm() <= 1e-12, "t = {t}: {prod}");
        }
    }

    #[test]
    fn cos_recomposition() {
        let map = BetaMap::jackson(0.5).unwrap();
        let p: CoefficientFunction = 1.0.into();
        let ep = exp_small(&p.scale(I), 0.5, &map, &tol()).unwrap();
        let em = exp_small(&p.scale(-I), 0.5, &map, &tol()).unwrap();
        let cos = trig(SpecialKind::Cos, &p, 0.5, &map, &tol()).unwrap();
        let sin = trig(SpecialKind::Sin, &p, 0.5, &map, &tol()).unwrap();
        assert!((cos * cos - (ep * ep + 2.0 * ep * em + em * em) / 4.0).norm() < 1e-12);
        // e_{ip} = cos + i sin
        assert!((cos + I * sin - ep).norm() < 1e-14);
    }

    #[test]
    fn pole_is_reported() {
        // factor 1 - 1 * (2 - 1) vanishes at the first step of the orbit of 2
        let map = BetaMap::jackson(0.5).unwrap();
        let err = exp_small(&1.0.into(), 2.0, &map, &tol()).unwrap_err();
        assert_eq!(err, Error::PoleEncountered { t: 2.0, point: 2.0 });
        let err = exp_small(&1.0.into(), 4.0, &map, &tol()).unwrap_err();
        assert_eq!(err, Error::PoleEncountered { t: 4.0, point: 2.0 });
        assert!(exp_big(&c(-1.0, 0.0).into(), 2.0, &map, &tol()).is_ok());
    }

    #[test]
    fn capped_product_does_not_converge() {
        let map = BetaMap::jackson(0.99).unwrap();
        let t = Tolerances::new(1e-12, 1e-10, 20).unwrap();
        assert!(matches!(
            exp_small(&0.5.into(), 1.0, &map, &t),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn kinds_parse() {
        for k in SpecialKind::ALL {
            assert_eq!(k.symbol().parse::<SpecialKind>().unwrap(), k);
        }
        assert!("tan".parse::<SpecialKind>().is_err());
    }

    fn check_all_identities(map: &BetaMap, p: &CoefficientFunction, points: &[f64]) {
        let tol = tol();
        for kind in SpecialKind::ALL {
            let y = as_function(kind, p, map, &tol);
            let dy = {
                let (y, map) = (y.clone(), map.clone());
                ScalarFunction::new(move |t| beta_derivative(&y, t, &map, &tol).unwrap())
            };
            for &t in points {
                let rel = |lhs: Complex64, rhs: Complex64| {
                    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300)
                };
                let lhs = beta_derivative(&y, t, map, &tol).unwrap();
                let rhs = beta_derivative_identity(kind, p, t, map, &tol).unwrap();
                assert!(rel(lhs, rhs) <= 1e-9, "D {kind} at {t}: {lhs} vs {rhs}");
                let lhs = beta_inverse_derivative(&y, t, map, &tol).unwrap();
                let rhs = inverse_derivative_identity(kind, p, t, map, &tol).unwrap();
                assert!(rel(lhs, rhs) <= 1e-9, "Dinv {kind} at {t}: {lhs} vs {rhs}");
                let lhs = beta_inverse_derivative(&dy, t, map, &tol).unwrap();
                let rhs = second_derivative_identity(kind, p, t, map, &tol).unwrap();
                assert!(rel(lhs, rhs) <= 1e-8, "DinvD {kind} at {t}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn identities_hahn_polynomial_coefficient() {
        let map = BetaMap::hahn(0.5, 1.0).unwrap();
        let p = CoefficientFunction::Function(Polynomial::new(vec![c(0.3, 0.0), c(0.0, 0.1)]).into());
        check_all_identities(&map, &p, &[2.6, 3.0, 4.5, 0.5]);
    }

    #[test]
    fn identities_cubic_constant_coefficient() {
        let map = BetaMap::cubic();
        check_all_identities(&map, &c(0.0, 2.0).into(), &[0.5, 0.7, -0.6]);
    }
}
