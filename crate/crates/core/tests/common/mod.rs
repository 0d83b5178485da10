//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's assembly, eigensolver, summation or
//! operator application; maps are only used through `forward` and `invert`.

#![allow(dead_code, clippy::needless_range_loop)]

pub mod dd;

use dd::Dd;

use betacalc::{BetaMap, Complex64, ScalarFunction, Tolerances};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-34 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations in double-double, ascending.
///
/// A rotation is skipped once `|a_pq| <= tol sqrt(|a_pp a_qq|)`, the stopping rule that keeps
/// small eigenvalues of graded matrices to high relative accuracy.
pub fn jacobi_eigenvalues_dd(mut a: Vec<Vec<Dd>>) -> Vec<f64> {
    let n = a.len();
    let tol = 1e-28;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.is_zero() || apq.hi.abs() <= tol * (a[p][p].hi * a[q][q].hi).abs().sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (a[q][q] - a[p][p]) / (Dd::new(2.0) * apq);
                let t = if theta.is_zero() {
                    Dd::ONE
                } else {
                    Dd::new(theta.signum()) / (theta.abs() + (theta * theta + Dd::ONE).sqrt())
                };
                let cs = Dd::ONE / (t * t + Dd::ONE).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i].to_f64()).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `beta^k(x)` for `k = 0 ..= n` by direct iteration.
pub fn orbit(map: &BetaMap, x: f64, n: usize) -> Vec<f64> {
    let mut pts = vec![x];
    for _ in 0..n {
        let t = *pts.last().unwrap();
        pts.push(map.forward(t));
    }
    pts
}

/// Coefficients of `l y(t)` on `(y(beta^-1 t), y(t), y(beta t))` from `-w D_{beta^-1} D_beta y + r y`.
pub fn ell_coefficients(tm: f64, t: f64, tp: f64, r: f64) -> [f64; 3] {
    let a = 1.0 / (tp - t);
    let b = 1.0 / (t - tm);
    let cc = 1.0 / (tm - t);
    let w = (t - tm) / (tp - t);
    [w * cc * b, -w * cc * (a + b) + r, w * cc * a]
}

/// `ell_coefficients` in double-double; gaps of f64 points are exact.
pub fn ell_coefficients_dd(tm: f64, t: f64, tp: f64, r: f64) -> [Dd; 3] {
    let gap = |x: f64, y: f64| Dd::new(x) - Dd::new(y);
    let a = Dd::ONE / gap(tp, t);
    let b = Dd::ONE / gap(t, tm);
    let cc = Dd::ONE / gap(tm, t);
    let w = gap(t, tm) / gap(tp, t);
    [w * cc * b, Dd::new(r) - w * cc * (a + b), w * cc * a]
}

/// Dense operator and weights of a Sturm-Liouville problem built from the literal
/// three-point formula and explicit boundary eliminations.
pub struct DenseOracle {
    /// `L` rounded to f64.
    pub l: Vec<Vec<f64>>,
    pub l_dd: Vec<Vec<Dd>>,
    pub weights: Vec<f64>,
    /// `(orbit, k)` of each row; orbit 0 is the right end.
    pub labels: Vec<(usize, usize)>,
}

impl DenseOracle {
    /// `W^{1/2} L W^{-1/2}` in double-double, symmetrized.
    pub fn symmetrized(&self) -> Vec<Vec<Dd>> {
        let n = self.l.len();
        let s: Vec<Dd> = self.weights.iter().map(|&w| Dd::new(w).sqrt()).collect();
        let mut m = vec![vec![Dd::ZERO; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = s[i] * self.l_dd[i][j] / s[j];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = Dd::new(0.5) * (m[i][j] + m[j][i]);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        jacobi_eigenvalues_dd(self.symmetrized())
    }
}

struct OrbitData {
    pts: Vec<f64>,
    ghost: f64,
    bc: (f64, f64),
}

/// Builds the dense oracle for `(s0, b)` (`a = None`) or `(a, b)`.
pub fn dense_oracle(
    map: &BetaMap,
    a: Option<f64>,
    b: f64,
    r: impl Fn(f64) -> f64,
    bc_left: (f64, f64),
    bc_right: (f64, f64),
    depth: usize,
) -> DenseOracle {
    let tol = Tolerances::default();
    let mk = |x: f64, bc| OrbitData {
        pts: orbit(map, x, depth + 1),
        ghost: map.invert(x, &tol).unwrap(),
        bc,
    };
    let mut orbits = vec![mk(b, bc_right)];
    if let Some(a) = a {
        orbits.push(mk(a, bc_left));
    }
    // unknown index of (orbit, k)
    let mut index = std::collections::HashMap::new();
    let mut n = 0;
    for (j, o) in orbits.iter().enumerate() {
        let first = usize::from(o.bc.1 == 0.0);
        for k in first..=depth {
            index.insert((j, k), n);
            n += 1;
        }
    }
    let gap = |x: f64, y: f64| Dd::new(x) - Dd::new(y);
    // every lattice value (ghost = k of -1) as a combination of unknowns
    let expand = |j: usize, k: isize| -> Vec<(usize, Dd)> {
        let o = &orbits[j];
        if k == -1 {
            let (c1, c2) = o.bc;
            if c2 == 0.0 {
                return vec![];
            }
            // c1 y0 + c2 (y0 - yg) / (t0 - tg) = 0
            let h = gap(o.pts[0], o.ghost);
            return vec![(index[&(j, 0)], Dd::ONE + Dd::new(c1) * h / Dd::new(c2))];
        }
        let k = k as usize;
        if k <= depth {
            return index
                .get(&(j, k))
                .map(|&i| vec![(i, Dd::ONE)])
                .unwrap_or_default();
        }
        if orbits.len() == 1 {
            let (a1, a2) = bc_left;
            if a2 == 0.0 {
                return vec![];
            }
            // a1 s + a2 (s - y_K) / (t_{K+1} - t_K) = 0
            let h = gap(o.pts[depth + 1], o.pts[depth]);
            let s_coef = Dd::new(a2) / (Dd::new(a1) * h + Dd::new(a2));
            return vec![(index[&(0, depth)], s_coef)];
        }
        // shared value equating the deepest difference quotients of both orbits
        let hb = gap(orbits[0].pts[depth + 1], orbits[0].pts[depth]);
        let ha = gap(orbits[1].pts[depth + 1], orbits[1].pts[depth]);
        // (s - u)/hb = (s - v)/ha  =>  s (ha - hb) = u ha - v hb
        vec![
            (index[&(0, depth)], ha / (ha - hb)),
            (index[&(1, depth)], -hb / (ha - hb)),
        ]
    };
    let mut l_dd = vec![vec![Dd::ZERO; n]; n];
    let mut weights = vec![0.0; n];
    for (&(j, k), &i) in &index {
        let o = &orbits[j];
        let tm = if k == 0 { o.ghost } else { o.pts[k - 1] };
        let coefs = ell_coefficients_dd(tm, o.pts[k], o.pts[k + 1], r(o.pts[k]));
        for (d, &coef) in coefs.iter().enumerate() {
            for (col, e) in expand(j, k as isize + d as isize - 1) {
                l_dd[i][col] = l_dd[i][col] + coef * e;
            }
        }
        weights[i] = (o.pts[k] - o.pts[k + 1]).abs();
    }
    let l = l_dd
        .iter()
        .map(|row| row.iter().map(|v| v.to_f64()).collect())
        .collect();
    let mut labels = vec![(0, 0); n];
    for (&label, &i) in &index {
        labels[i] = label;
    }
    DenseOracle {
        l,
        l_dd,
        weights,
        labels,
    }
}

/// Both sides of the Lagrange identity by plain summation over explicit values.
///
/// `y[j]` and `z[j]` hold `(ghost, t_0, ..., t_{K+1})` values of orbit `j`;
/// the second orbit, when present, is the lower one and enters with weights `-(t_k - t_{k+1})`.
pub fn lagrange_oracle(
    orbits: &[(f64, Vec<f64>)],
    y: &[Vec<Complex64>],
    z: &[Vec<Complex64>],
    r: impl Fn(f64) -> f64,
) -> (Complex64, Complex64) {
    let mut integral = Complex64::new(0.0, 0.0);
    let mut brackets = Vec::new();
    for (j, (ghost, pts)) in orbits.iter().enumerate() {
        let sign = if j == 0 { 1.0 } else { -1.0 };
        let full: Vec<f64> = std::iter::once(*ghost).chain(pts.iter().copied()).collect();
        let yv = &y[j];
        let zc: Vec<Complex64> = z[j].iter().map(|v| v.conj()).collect();
        let ell = |v: &[Complex64], i: usize| -> Complex64 {
            let cf = ell_coefficients(full[i - 1], full[i], full[i + 1], r(full[i]));
            cf[0] * v[i - 1] + cf[1] * v[i] + cf[2] * v[i + 1]
        };
        for i in 1..full.len() - 1 {
            let mu = full[i] - full[i + 1];
            integral += sign * mu * (ell(yv, i) * zc[i] - yv[i] * ell(&zc, i));
        }
        let br = |i: usize, im: usize| -> Complex64 {
            let h = full[im] - full[i];
            yv[i] * (zc[im] - zc[i]) / h - zc[i] * (yv[im] - yv[i]) / h
        };
        brackets.push(br(1, 0));
        if orbits.len() == 1 {
            let last = full.len() - 1;
            brackets.push(br(last, last - 1));
        }
    }
    (integral, brackets[0] - brackets[1])
}

/// `int_0^x t^n d_q t = (1 - q) x^{n+1} / (1 - q^{n+1})`.
pub fn jackson_monomial_integral(q: f64, n: i32, x: f64) -> f64 {
    (1.0 - q) * x.powi(n + 1) / (1.0 - q.powi(n + 1))
}

/// `sum_{k=0}^{terms-1} mu_k f(t_k)` along the orbit of `x`, by plain summation.
pub fn deep_sum(map: &BetaMap, f: &ScalarFunction, x: f64, terms: usize) -> Complex64 {
    let pts = orbit(map, x, terms);
    (0..terms).map(|k| (pts[k] - pts[k + 1]) * f.eval(pts[k])).sum()
}
