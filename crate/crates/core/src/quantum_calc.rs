//! Beta-derivatives, beta-integrals, norms, inner products and the identities linking them.
//!
//! All integral identities assume the integrands are continuous at `s0`; no
//! jump correction is applied.

use num_complex::Complex64;
use serde::Serialize;

use crate::beta_map::{BetaMap, Tolerances};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::lattice::{build_lattice, build_lattice_with_depth, Lattice, SignedOrbit, Support};
use crate::lattice_function::LatticeFunction;
use crate::sum::{ComplexSum, NeumaierSum};

/// Value of a truncated beta-integral with an estimate of the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: Complex64,
    /// `|t_K - s0| * max |f|` over the last three orbit samples.
    pub tail_bound: f64,
    /// Number of summed terms; for two-sided integrals, the larger of the two orbits.
    pub depth: usize,
}

impl IntegralEstimate {
    fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            tail_bound: 0.0,
            depth: 0,
        }
    }
}

pub(crate) fn eval_finite(f: &ScalarFunction, t: f64) -> Result<Complex64> {
    let v = f.eval(t);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue { t })
    }
}

/// `f'(s0)`: the attached exact derivative if any, else a central difference
/// with step `sqrt(atol) * max(1, |s0|)`, one-sided where `I` ends.
pub fn derivative_at_fixed_point(f: &ScalarFunction, map: &BetaMap, tol: &Tolerances) -> Result<Complex64> {
    let s0 = map.fixed_point();
    if let Some(d) = f.exact_derivative(s0) {
        return finite_result(d, s0);
    }
    let h = tol.atol.sqrt() * s0.abs().max(1.0);
    let iv = map.interval();
    let (lo, hi) = match (iv.contains(s0 - h), iv.contains(s0 + h)) {
        (true, true) => (s0 - h, s0 + h),
        (false, true) => (s0, s0 + h),
        (true, false) => (s0 - h, s0),
        (false, false) => {
            return Err(Error::OutOfRange {
                what: "difference step around s0",
                value: h,
                lo: iv.lo,
                hi: iv.hi,
            })
        }
    };
    let d = (eval_finite(f, hi)? - eval_finite(f, lo)?) / (hi - lo);
    finite_result(d, s0)
}

fn finite_result(v: Complex64, t: f64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue { t })
    }
}

/// `D_beta f(t) = (f(beta(t)) - f(t)) / (beta(t) - t)`, and `f'(s0)` at the fixed point.
pub fn beta_derivative(f: &ScalarFunction, t: f64, map: &BetaMap, tol: &Tolerances) -> Result<Complex64> {
    map.check_point("t", t)?;
    let bt = map.forward(t);
    if t == map.fixed_point() || bt == t {
        return derivative_at_fixed_point(f, map, tol);
    }
    let d = (eval_finite(f, bt)? - eval_finite(f, t)?) / (bt - t);
    finite_result(d, t)
}

/// `D_{beta^-1} f(t) = (f(t) - f(beta^-1(t))) / (t - beta^-1(t))`, and `f'(s0)` at the fixed point.
pub fn beta_inverse_derivative(
    f: &ScalarFunction,
    t: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<Complex64> {
    map.check_point("t", t)?;
    if t == map.fixed_point() {
        return derivative_at_fixed_point(f, map, tol);
    }
    let prev = map.invert(t, tol)?;
    map.check_point("beta^-1(t)", prev)?;
    let d = (eval_finite(f, t)? - eval_finite(f, prev)?) / (t - prev);
    finite_result(d, t)
}

/// `(D_beta beta^-1)(t) = (t - beta^-1(t)) / (beta(t) - t)`.
pub fn inverse_weight(map: &BetaMap, t: f64, tol: &Tolerances) -> Result<f64> {
    map.inverse_weight(t, tol)
}

/// Lattice-level derivatives: `forward[k]` is `D_beta f(t_k)` for `k < K` and
/// `inverse[k]` is `D_{beta^-1} f(t_k)` for `k >= 1`, both from the orbit's own
/// neighbours, so `inverse[k + 1] == forward[k]` bit for bit.
pub fn lattice_derivatives(
    f: &ScalarFunction,
    lattice: &Lattice,
) -> Result<(Vec<Complex64>, Vec<Option<Complex64>>)> {
    let t = lattice.points();
    let v = t.iter().map(|&x| eval_finite(f, x)).collect::<Result<Vec<_>>>()?;
    let quotient = |k: usize| (v[k + 1] - v[k]) / (t[k + 1] - t[k]);
    let forward = (0..lattice.depth()).map(quotient).collect();
    let inverse = (0..t.len())
        .map(|k| if k == 0 { None } else { Some(quotient(k - 1)) })
        .collect();
    Ok((forward, inverse))
}

/// `int_{s0}^x f d_beta = sum_k mu_k f(t_k)` over the truncated orbit of `x`.
pub fn beta_integral_from_s0(
    f: &ScalarFunction,
    x: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<IntegralEstimate> {
    let lattice = build_lattice(map, x, tol)?;
    orbit_integral(f, &lattice, map, tol)
}

/// Sums `mu_k f(t_k)` over a prepared lattice, guarding against divergence and truncation.
pub fn orbit_integral(
    f: &ScalarFunction,
    lattice: &Lattice,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<IntegralEstimate> {
    if lattice.depth() == 0 {
        return Ok(IntegralEstimate::zero());
    }
    let t = lattice.points();
    let mut acc = ComplexSum::new();
    let mut magnitudes = Vec::with_capacity(lattice.depth());
    for (k, &mu) in lattice.weights().iter().enumerate() {
        let term = mu * eval_finite(f, t[k])?;
        acc += term;
        magnitudes.push(term.norm());
        if acc.value().norm() > 1.0 / tol.atol && k > 0 && magnitudes[k] >= magnitudes[k - 1] {
            return Err(Error::SeriesDivergence {
                x: lattice.base(),
                terms: k + 1,
                partial_sum: acc.value().norm(),
            });
        }
    }
    if rising_tail(&magnitudes) {
        probe_divergence(f, lattice, map, tol, acc, &magnitudes)?;
    }
    lattice.check_cap(tol.k_max)?;
    let tail_max = t[t.len().saturating_sub(3)..]
        .iter()
        .map(|&x| eval_finite(f, x).map(|v| v.norm()))
        .try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))?;
    Ok(IntegralEstimate {
        value: acc.value(),
        tail_bound: lattice.tail_gap() * tail_max,
        depth: lattice.depth(),
    })
}

fn rising_tail(magnitudes: &[f64]) -> bool {
    let n = magnitudes.len();
    n >= 3
        && magnitudes[n - 1] > 0.0
        && magnitudes[n - 1] >= magnitudes[n - 2]
        && magnitudes[n - 2] >= magnitudes[n - 3]
}

/// Terms that still grow at the truncation depth: keep summing along the orbit
/// until they turn, the partial sum passes `1/atol`, or `k_max` is hit.
fn probe_divergence(
    f: &ScalarFunction,
    lattice: &Lattice,
    map: &BetaMap,
    tol: &Tolerances,
    mut acc: ComplexSum,
    magnitudes: &[f64],
) -> Result<()> {
    let mut t = lattice.tail_point();
    let mut prev = magnitudes[magnitudes.len() - 1];
    let mut terms = magnitudes.len();
    while terms < tol.k_max {
        let next = map.forward(t);
        if next == t || !next.is_finite() {
            break;
        }
        let term = (t - next) * eval_finite(f, t)?;
        acc += term;
        terms += 1;
        if acc.value().norm() > 1.0 / tol.atol {
            return Err(Error::SeriesDivergence {
                x: lattice.base(),
                terms,
                partial_sum: acc.value().norm(),
            });
        }
        if term.norm() < prev {
            return Ok(());
        }
        prev = term.norm();
        t = next;
    }
    Ok(())
}

/// `int_a^b f d_beta = int_{s0}^b f d_beta - int_{s0}^a f d_beta`.
pub fn beta_integral(
    f: &ScalarFunction,
    a: f64,
    b: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<IntegralEstimate> {
    if a == b {
        map.check_point("a", a)?;
        return Ok(IntegralEstimate::zero());
    }
    let upper = beta_integral_from_s0(f, b, map, tol)?;
    let lower = beta_integral_from_s0(f, a, map, tol)?;
    Ok(IntegralEstimate {
        value: upper.value - lower.value,
        tail_bound: upper.tail_bound + lower.tail_bound,
        depth: upper.depth.max(lower.depth),
    })
}

/// `|int_a^b D_beta f d_beta - (f(b) - f(a))|` for `f` continuous at `s0`.
pub fn fundamental_theorem_residual(
    f: &ScalarFunction,
    a: f64,
    b: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<f64> {
    let df = derivative_function(f, map, tol);
    let lhs = beta_integral(&df, a, b, map, tol)?.value;
    let rhs = eval_finite(f, b)? - eval_finite(f, a)?;
    Ok((lhs - rhs).norm())
}

/// `|int f D_beta g - ([f g]_a^b - int (g o beta) D_beta f)|` for `f`, `g` continuous at `s0`.
pub fn integration_by_parts_residual(
    f: &ScalarFunction,
    g: &ScalarFunction,
    a: f64,
    b: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<f64> {
    let dg = derivative_function(g, map, tol);
    let df = derivative_function(f, map, tol);
    let lhs = beta_integral(&f.mul(&dg), a, b, map, tol)?.value;
    let m = map.clone();
    let g_beta = g.compose_real(move |t| m.forward(t));
    let rest = beta_integral(&g_beta.mul(&df), a, b, map, tol)?.value;
    let boundary = eval_finite(f, b)? * eval_finite(g, b)? - eval_finite(f, a)? * eval_finite(g, a)?;
    Ok((lhs - (boundary - rest)).norm())
}

/// `|int_{s0}^b f(beta(t)) d_beta t - int_{s0}^{beta(b)} f(u) (D_beta beta^-1)(u) d_beta u|`.
pub fn change_of_variables_residual(
    f: &ScalarFunction,
    b: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<f64> {
    let m = map.clone();
    let f_beta = f.compose_real(move |t| m.forward(t));
    let lhs = beta_integral_from_s0(&f_beta, b, map, tol)?;

    // the image orbit beta(t_k) with the same number of terms; the weight can be
    // unbounded at s0 (e.g. t^3), so a gap-based cutoff of its own would drop terms
    let lattice = build_lattice_with_depth(map, map.forward(b), lhs.depth)?;
    let t = lattice.points();
    let mut acc = ComplexSum::new();
    for (k, &mu) in lattice.weights().iter().enumerate() {
        let w = map.inverse_weight(t[k], tol)?;
        acc += mu * w * eval_finite(f, t[k])?;
    }
    Ok((lhs.value - acc.value()).norm())
}

/// `D_beta f` as a function handle; the value at `s0` is `f'(s0)`.
pub fn derivative_function(f: &ScalarFunction, map: &BetaMap, tol: &Tolerances) -> ScalarFunction {
    let (f, map, tol) = (f.clone(), map.clone(), *tol);
    ScalarFunction::new(move |t| {
        beta_derivative(&f, t, &map, &tol).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })
}

/// `D_{beta^-1} f` as a function handle.
pub fn inverse_derivative_function(f: &ScalarFunction, map: &BetaMap, tol: &Tolerances) -> ScalarFunction {
    let (f, map, tol) = (f.clone(), map.clone(), *tol);
    ScalarFunction::new(move |t| {
        beta_inverse_derivative(&f, t, &map, &tol).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })
}

/// Weighted sum `sum_k sign * mu_k * h(t_k)` over every orbit of `support`.
fn support_sum<F>(support: &Support, mut h: F) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let mut acc = ComplexSum::new();
    for orbit in support.orbits() {
        let t = orbit.lattice.points();
        for (k, &mu) in orbit.lattice.weights().iter().enumerate() {
            acc += orbit.sign * mu * h(t[k])?;
        }
    }
    Ok(acc.value())
}

/// Lattice for identities weighted by `D_beta beta^-1`: the term at `t_k` carries
/// the gap `t_{k-1} - t_k`, so the orbit runs one point past the usual cutoff.
fn weighted_lattice(map: &BetaMap, x: f64, tol: &Tolerances) -> Result<Lattice> {
    let lattice = build_lattice(map, x, tol)?;
    lattice.check_cap(tol.k_max)?;
    build_lattice_with_depth(map, x, lattice.depth() + 1)
}

fn weighted_support(map: &BetaMap, a: f64, b: f64, tol: &Tolerances) -> Result<Support> {
    let s0 = map.fixed_point();
    let mut orbits = vec![SignedOrbit {
        lattice: weighted_lattice(map, b, tol)?,
        sign: 1.0,
    }];
    if a != s0 {
        orbits.push(SignedOrbit {
            lattice: weighted_lattice(map, a, tol)?,
            sign: -1.0,
        });
    }
    Ok(Support::from_orbits(s0, orbits))
}

/// Adjoint of `D_beta` on `(s0, b)`:
/// `|<D_beta f, g> - (f(b) conj(g(beta^-1(b))) - f(s0) conj(g(s0)) + <f, -w D_{beta^-1} g>)|`
/// with `w = D_beta beta^-1`, all inner products on the orbit of `b`.
pub fn adjoint_residual_forward(
    f: &ScalarFunction,
    g: &ScalarFunction,
    b: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<f64> {
    let support = Support::one_sided(weighted_lattice(map, b, tol)?);
    let s0 = map.fixed_point();
    let boundary = eval_finite(f, b)? * eval_finite(g, map.invert(b, tol)?)?.conj()
        - eval_finite(f, s0)? * eval_finite(g, s0)?.conj();
    adjoint_forward_on(f, g, &support, boundary, map, tol)
}

/// Two-endpoint form on `(a, b)` with `a <= s0 <= b`:
/// `|<D_beta f, g> - (f(b) conj(g(beta^-1(b))) - f(a) conj(g(beta^-1(a))) + <f, -w D_{beta^-1} g>)|`.
pub fn adjoint_residual_two_sided(
    f: &ScalarFunction,
    g: &ScalarFunction,
    a: f64,
    b: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<f64> {
    let s0 = map.fixed_point();
    if !(a <= s0 && s0 <= b) {
        return Err(Error::InvalidEndpoints(format!(
            "need a <= s0 <= b, got a = {a}, s0 = {s0}, b = {b}"
        )));
    }
    let support = weighted_support(map, a, b, tol)?;
    let end_term = |x: f64| -> Result<Complex64> {
        if x == s0 {
            Ok(eval_finite(f, s0)? * eval_finite(g, s0)?.conj())
        } else {
            Ok(eval_finite(f, x)? * eval_finite(g, map.invert(x, tol)?)?.conj())
        }
    };
    let boundary = end_term(b)? - end_term(a)?;
    adjoint_forward_on(f, g, &support, boundary, map, tol)
}

fn adjoint_forward_on(
    f: &ScalarFunction,
    g: &ScalarFunction,
    support: &Support,
    boundary: Complex64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<f64> {
    let lhs = support_sum(support, |t| {
        Ok(beta_derivative(f, t, map, tol)? * eval_finite(g, t)?.conj())
    })?;
    let inner = support_sum(support, |t| {
        let w = map.inverse_weight(t, tol)?;
        Ok(eval_finite(f, t)? * (-w * beta_inverse_derivative(g, t, map, tol)?).conj())
    })?;
    Ok((lhs - (boundary + inner)).norm())
}

/// Adjoint of `-w D_{beta^-1}` on `(s0, b)`:
/// `|<-w D_{beta^-1} f, g> - (f(s0) conj(g(s0)) - f(beta^-1(b)) conj(g(b)) + <f, D_beta g>)|`.
pub fn adjoint_residual_inverse(
    f: &ScalarFunction,
    g: &ScalarFunction,
    b: f64,
    map: &BetaMap,
    tol: &Tolerances,
) -> Result<f64> {
    let support = Support::one_sided(weighted_lattice(map, b, tol)?);
    let s0 = map.fixed_point();
    let lhs = support_sum(&support, |t| {
        let w = map.inverse_weight(t, tol)?;
        Ok(-w * beta_inverse_derivative(f, t, map, tol)? * eval_finite(g, t)?.conj())
    })?;
    let inner = support_sum(&support, |t| {
        Ok(eval_finite(f, t)? * beta_derivative(g, t, map, tol)?.conj())
    })?;
    let boundary = eval_finite(f, s0)? * eval_finite(g, s0)?.conj()
        - eval_finite(f, map.invert(b, tol)?)? * eval_finite(g, b)?.conj();
    Ok((lhs - (boundary + inner)).norm())
}

/// `(sum |weight| |f|^p)^(1/p)` over every orbit; `p = inf` takes the sup
/// over all lattice values and the value at `s0`.
pub fn lp_norm(f: &LatticeFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p == f64::INFINITY {
        return Ok(f
            .values()
            .iter()
            .map(|v| v.norm())
            .fold(f.s0_value().norm(), f64::max));
    }
    let sum: NeumaierSum = f
        .support()
        .integration_weights()
        .zip(f.values())
        .map(|(w, v)| w.abs() * v.norm().powf(p))
        .collect();
    Ok(sum.value().powf(1.0 / p))
}

/// `<f, g> = sum weight * f * conj(g)` on a shared support.
pub fn inner_product(f: &LatticeFunction, g: &LatticeFunction) -> Result<Complex64> {
    f.check_same_support(g)?;
    let sum: ComplexSum = f
        .support()
        .integration_weights()
        .zip(f.values().iter().zip(g.values()))
        .map(|(w, (a, b))| w * a * b.conj())
        .collect();
    Ok(sum.value())
}
