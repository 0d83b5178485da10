//! Pointwise operator application, the bracket `[y, z]` and the Lagrange and self-adjointness checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{GridFunction, SlpProblem};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::lattice_function::LatticeFunction;
use crate::quantum_calc::{eval_finite, inner_product};
use crate::sum::{sum_real, ComplexSum};

/// Seed of the random pairs drawn by [`check_self_adjoint`].
pub const SELF_ADJOINT_SEED: u64 = 0x5eed_0003;

/// Relative tolerance of [`check_self_adjoint`].
pub const SELF_ADJOINT_RTOL: f64 = 1e-9;

/// `-w D_{beta^-1} D_beta y + r y` from the three values at `beta^-1(t) = tm`, `t` and `beta(t) = tp`.
#[allow(clippy::too_many_arguments)]
fn ell_from_values(
    tm: f64,
    t: f64,
    tp: f64,
    ym: Complex64,
    y: Complex64,
    yp: Complex64,
    r: Complex64,
) -> Complex64 {
    let d_here = (yp - y) / (tp - t);
    let d_before = (y - ym) / (t - tm);
    let dd = (d_before - d_here) / (tm - t);
    let w = (t - tm) / (tp - t);
    -w * dd + r * y
}

/// `l f(t)` for a function defined off the lattice, using `beta(t)` and `beta^-1(t)`.
pub fn apply_ell(f: &ScalarFunction, t: f64, problem: &SlpProblem) -> Result<Complex64> {
    let map = problem.map();
    map.check_point("t", t)?;
    let s0 = map.fixed_point();
    if t == s0 {
        return Err(Error::OutOfRange {
            what: "t (beta(t) = t at the fixed point)",
            value: t,
            lo: s0,
            hi: s0,
        });
    }
    let tp = map.forward(t);
    let tm = map.invert(t, problem.tolerances())?;
    if tm == t || tp == t {
        return Err(Error::OutOfRange {
            what: "t (lattice neighbour coincides with t)",
            value: t,
            lo: tm.min(tp),
            hi: tm.max(tp),
        });
    }
    let r = problem.potential().eval(t);
    Ok(ell_from_values(
        tm,
        t,
        tp,
        eval_finite(f, tm)?,
        eval_finite(f, t)?,
        eval_finite(f, tp)?,
        r,
    ))
}

/// `l y` at every orbit point `t_0 ..= t_K` from the grid values and ghosts; zero at the tails.
pub fn apply_ell_lattice(y: &GridFunction, problem: &SlpProblem) -> Result<LatticeFunction> {
    let depth = problem.depth();
    let mut out = Vec::with_capacity(problem.support().len());
    for (j, o) in problem.orbits().iter().enumerate() {
        let v = y.orbit_values(j);
        for k in 0..=depth {
            let (tm, ym) = if k == 0 {
                (o.ghost_point, y.ghosts()[j])
            } else {
                (o.points[k - 1], v[k - 1])
            };
            let r = problem.potential().eval(o.points[k]);
            out.push(ell_from_values(
                tm,
                o.points[k],
                o.points[k + 1],
                ym,
                v[k],
                v[k + 1],
                r,
            ));
        }
        out.push(Complex64::new(0.0, 0.0));
    }
    LatticeFunction::new(problem.support().clone(), out, Complex64::new(0.0, 0.0))
}

/// `[y, z](t_k) = y D_{beta^-1} z - z D_{beta^-1} y` at point `k` of `orbit`.
///
/// `k = 0` uses the ghost at `beta^-1` of the end; `k = K + 1` (the stand-in for
/// `s0`) uses the deepest difference quotient.
pub fn bracket_at(
    y: &GridFunction,
    z: &GridFunction,
    orbit: usize,
    k: usize,
    problem: &SlpProblem,
) -> Result<Complex64> {
    let o = problem.orbits().get(orbit).ok_or(Error::LatticeMismatch)?;
    if k >= o.points.len() {
        return Err(Error::OutOfRange {
            what: "lattice index",
            value: k as f64,
            lo: 0.0,
            hi: (o.points.len() - 1) as f64,
        });
    }
    let (yv, zv) = (y.orbit_values(orbit), z.orbit_values(orbit));
    let (tm, ym, zm) = if k == 0 {
        (o.ghost_point, y.ghosts()[orbit], z.ghosts()[orbit])
    } else {
        (o.points[k - 1], yv[k - 1], zv[k - 1])
    };
    let h = tm - o.points[k];
    let dy = (ym - yv[k]) / h;
    let dz = (zm - zv[k]) / h;
    Ok(yv[k] * dz - zv[k] * dy)
}

/// `[y, z](t)` at an orbit point `t`; `t = s0` maps to the deepest point of the right orbit.
pub fn bracket(y: &GridFunction, z: &GridFunction, t: f64, problem: &SlpProblem) -> Result<Complex64> {
    let s0 = problem.map().fixed_point();
    if t == s0 {
        return bracket_at(y, z, 0, problem.depth() + 1, problem);
    }
    for (j, o) in problem.orbits().iter().enumerate() {
        if let Some(k) = o.points.iter().position(|&p| p == t) {
            return bracket_at(y, z, j, k, problem);
        }
    }
    let (lo, hi) = problem
        .support()
        .points()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p), hi.max(p))
        });
    Err(Error::OutOfRange {
        what: "t (not a lattice point of the problem)",
        value: t,
        lo,
        hi,
    })
}

/// Both sides of the Lagrange identity for a pair of grid functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangeTerms {
    /// `int (l y . conj z - y . conj(l z)) d_beta` over the truncated lattice.
    pub integral: Complex64,
    /// `[y, conj z]` at `b`.
    pub right_bracket: Complex64,
    /// `[y, conj z]` at `s0` (deepest quotient) or at `a`.
    pub left_bracket: Complex64,
    /// `|integral - (right_bracket - left_bracket)|`.
    pub residual: f64,
    /// Sum of the magnitudes of every summand and bracket.
    pub scale: f64,
}

/// Evaluates both sides of `int (l y zbar - y l zbar) = [y, zbar](b) - [y, zbar](left end)`.
pub fn lagrange_terms(y: &GridFunction, z: &GridFunction, problem: &SlpProblem) -> Result<LagrangeTerms> {
    let zc = z.conj();
    let ly = apply_ell_lattice(y, problem)?;
    let lzc = apply_ell_lattice(&zc, problem)?;
    let weights = problem.support().integration_weights();
    let mut sum = ComplexSum::new();
    let mut magnitudes = Vec::with_capacity(problem.support().len());
    for (w, ((a, b), (c, d))) in weights.zip(
        ly.values()
            .iter()
            .zip(zc.lattice_function().values())
            .zip(y.lattice_function().values().iter().zip(lzc.values())),
    ) {
        let (first, second) = (w * a * b, w * c * d);
        sum.add(first - second);
        magnitudes.push(first.norm() + second.norm());
    }
    let integral = sum.value();
    let right_bracket = bracket_at(y, &zc, 0, 0, problem)?;
    let left_bracket = if problem.is_two_sided() {
        bracket_at(y, &zc, 1, 0, problem)?
    } else {
        bracket_at(y, &zc, 0, problem.depth() + 1, problem)?
    };
    let residual = (integral - (right_bracket - left_bracket)).norm();
    let scale = sum_real(magnitudes) + right_bracket.norm() + left_bracket.norm();
    Ok(LagrangeTerms {
        integral,
        right_bracket,
        left_bracket,
        residual,
        scale,
    })
}

/// `|int (l y zbar - y l zbar) d_beta - ([y, zbar](b) - [y, zbar](left end))|`.
pub fn lagrange_residual(y: &GridFunction, z: &GridFunction, problem: &SlpProblem) -> Result<f64> {
    Ok(lagrange_terms(y, z, problem)?.residual)
}

/// Outcome of [`check_self_adjoint`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfAdjointReport {
    pub pass: bool,
    pub trials: usize,
    /// `max |<l y, z> - <y, l z>|` over the trials.
    pub max_defect: f64,
    /// Largest sum of summand magnitudes of the two inner products.
    pub scale: f64,
    pub symmetry_residual: f64,
    /// `max |W L|` entry.
    pub matrix_scale: f64,
    pub max_right_bracket: f64,
    pub max_left_bracket: f64,
    /// Set when `r` is not real on the lattice.
    pub reality_violation: Option<String>,
}

/// Checks `<l y, z> = <y, l z>` on random boundary-condition-satisfying pairs and the symmetry of `W L`.
pub fn check_self_adjoint(problem: &SlpProblem, trials: usize) -> Result<SelfAdjointReport> {
    let op = match problem.assemble() {
        Ok(op) => op,
        Err(e @ Error::RealityViolation { .. }) => {
            return Ok(SelfAdjointReport {
                pass: false,
                trials: 0,
                max_defect: f64::NAN,
                scale: f64::NAN,
                symmetry_residual: f64::NAN,
                matrix_scale: f64::NAN,
                max_right_bracket: f64::NAN,
                max_left_bracket: f64::NAN,
                reality_violation: Some(e.to_string()),
            })
        }
        Err(e) => return Err(e),
    };
    let matrix_scale = op.max_weighted_entry();
    let mut rng = ChaCha8Rng::seed_from_u64(SELF_ADJOINT_SEED);
    let mut draw = |n: usize| -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    };
    let mut max_defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut pass_pairs = true;
    let (mut max_right, mut max_left): (f64, f64) = (0.0, 0.0);
    for _ in 0..trials {
        let y = problem.bc_function(&draw(op.n))?;
        let z = problem.bc_function(&draw(op.n))?;
        let ly = apply_ell_lattice(&y, problem)?;
        let lz = apply_ell_lattice(&z, problem)?;
        let lhs = inner_product(&ly, z.lattice_function())?;
        let rhs = inner_product(y.lattice_function(), &lz)?;
        let magnitude: f64 = sum_real(
            problem
                .support()
                .integration_weights()
                .zip(ly.values().iter().zip(z.lattice_function().values()))
                .zip(y.lattice_function().values().iter().zip(lz.values()))
                .map(|((w, (a, b)), (c, d))| (w * a * b.conj()).norm() + (w * c * d.conj()).norm()),
        );
        let defect = (lhs - rhs).norm();
        pass_pairs &= defect <= SELF_ADJOINT_RTOL * magnitude;
        max_defect = max_defect.max(defect);
        scale = scale.max(magnitude);
        let terms = lagrange_terms(&y, &z, problem)?;
        max_right = max_right.max(terms.right_bracket.norm());
        max_left = max_left.max(terms.left_bracket.norm());
    }
    let pass = pass_pairs && op.symmetry_residual <= SELF_ADJOINT_RTOL * matrix_scale;
    Ok(SelfAdjointReport {
        pass,
        trials,
        max_defect,
        scale,
        symmetry_residual: op.symmetry_residual,
        matrix_scale,
        max_right_bracket: max_right,
        max_left_bracket: max_left,
        reality_violation: None,
    })
}

/// Which of `lambda = +m` and `lambda = -m` makes `l f = lambda f` on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignResolution {
    pub magnitude: f64,
    /// `max_k |l f(t_k) - m f(t_k)| / |m f(t_k)|` over `t_0 ..= t_K`.
    pub plus_residual: f64,
    /// Same with `-m`.
    pub minus_residual: f64,
    /// The sign with the smaller residual, times `magnitude`.
    pub lambda: f64,
    pub residual: f64,
}

/// Samples `f` on the problem lattice (ghosts included) and compares `l f` with `+-magnitude f`.
pub fn resolve_eigenvalue_sign(
    f: &ScalarFunction,
    magnitude: f64,
    problem: &SlpProblem,
) -> Result<SignResolution> {
    let y = problem.sample(f)?;
    let ly = apply_ell_lattice(&y, problem)?;
    let depth = problem.depth();
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    for (j, _) in problem.orbits().iter().enumerate() {
        let off = problem.support().offset(j);
        for k in 0..=depth {
            let fv = y.orbit_values(j)[k];
            let lv = ly.values()[off + k];
            let denom = (magnitude * fv).norm();
            if !lv.re.is_finite() || !lv.im.is_finite() {
                return Err(Error::NonFiniteValue {
                    t: problem.orbits()[j].points[k],
                });
            }
            plus = plus.max((lv - magnitude * fv).norm() / denom);
            minus = minus.max((lv + magnitude * fv).norm() / denom);
        }
    }
    let (lambda, residual) = if plus <= minus {
        (magnitude, plus)
    } else {
        (-magnitude, minus)
    };
    Ok(SignResolution {
        magnitude,
        plus_residual: plus,
        minus_residual: minus,
        lambda,
        residual,
    })
}
