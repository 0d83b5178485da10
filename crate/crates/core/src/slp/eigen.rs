//! Generalized eigenproblem `A v = lambda W v` for a weighted path operator.
//!
//! `A` is a path Laplacian with positive conductances plus a diagonal
//! potential and `W` is a positive diagonal. Eigenvalues come from bisection
//! on a differential Sturm count, eigenvectors from twisted factorizations.
//! Both work on the factors directly, so graded operators keep their small
//! eigenvalues to high relative accuracy.

use crate::error::{Error, Result};

/// Bisection cap per eigenvalue; enough to walk the full exponent range of `f64`.
pub const MAX_BISECTIONS: usize = 2200;

/// Eigenpairs in ascending order with `W`-orthonormal vectors.
#[derive(Debug, Clone)]
pub struct PathEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// The operator `A - x W` in factored form.
struct Pencil<'a> {
    weights: &'a [f64],
    potential: &'a [f64],
    conductance: &'a [f64],
}

fn nonzero(q: f64) -> f64 {
    if q == 0.0 {
        -f64::MIN_POSITIVE
    } else {
        q
    }
}

impl Pencil<'_> {
    fn n(&self) -> usize {
        self.weights.len()
    }

    fn c(&self, i: usize) -> f64 {
        self.conductance.get(i).copied().unwrap_or(0.0)
    }

    fn shifted(&self, i: usize, x: f64) -> f64 {
        self.potential[i] - x * self.weights[i]
    }

    /// Top-down pivots `(p, q)` with `q_i = p_i + c_i` the `LDL^T` pivots.
    fn forward(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let (mut p, mut q) = (vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let mut pi = self.shifted(i, x);
            if i > 0 {
                pi += self.c(i - 1) * p[i - 1] / q[i - 1];
            }
            p[i] = pi;
            q[i] = nonzero(pi + self.c(i));
        }
        (p, q)
    }

    /// Bottom-up pivots with `q_i = p_i + c_{i-1}` the `UDU^T` pivots.
    fn backward(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let (mut p, mut q) = (vec![0.0; n], vec![0.0; n]);
        for i in (0..n).rev() {
            let mut pi = self.shifted(i, x);
            if i + 1 < n {
                pi += self.c(i) * p[i + 1] / q[i + 1];
            }
            p[i] = pi;
            q[i] = nonzero(pi + if i > 0 { self.c(i - 1) } else { 0.0 });
        }
        (p, q)
    }

    /// Number of eigenvalues below `x`.
    fn count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut ratio = 0.0;
        for i in 0..self.n() {
            let p = self.shifted(i, x) + if i > 0 { self.c(i - 1) * ratio } else { 0.0 };
            let q = nonzero(p + self.c(i));
            if q < 0.0 {
                count += 1;
            }
            ratio = p / q;
        }
        count
    }

    /// Interval holding the whole spectrum.
    fn bracket(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let radius = 2.0 * (if i > 0 { self.c(i - 1) } else { 0.0 } + self.c(i));
            lo = lo.min(self.potential[i] / self.weights[i]);
            hi = hi.max((self.potential[i] + radius) / self.weights[i]);
        }
        let pad = |v: f64| 4.0 * f64::EPSILON * v.abs() + f64::MIN_POSITIVE;
        let (mut lo, mut hi) = (lo - pad(lo), hi + pad(hi));
        while self.count(lo) > 0 {
            lo -= 2.0 * lo.abs().max(1.0);
        }
        while self.count(hi) < n {
            hi += 2.0 * hi.abs().max(1.0);
        }
        (lo, hi)
    }

    /// The `k`-th eigenvalue (0-based) by bisection inside `(lo, hi)`.
    fn bisect(&self, k: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                return Ok(mid);
            }
            if self.count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::EigenNoConvergence {
            index: k,
            steps: MAX_BISECTIONS,
        })
    }

    /// Eigenvector for an eigenvalue approximation `x`, from the twist with the smallest pivot.
    fn vector(&self, x: f64) -> Vec<f64> {
        let n = self.n();
        let (pf, qf) = self.forward(x);
        let (pb, qb) = self.backward(x);
        let gamma = |r: usize| {
            let mut g = self.shifted(r, x);
            if r > 0 {
                g += self.c(r - 1) * pf[r - 1] / qf[r - 1];
            }
            if r + 1 < n {
                g += self.c(r) * pb[r + 1] / qb[r + 1];
            }
            g.abs()
        };
        let twist = (0..n).min_by(|&a, &b| gamma(a).total_cmp(&gamma(b))).unwrap_or(0);
        let mut y = vec![0.0; n];
        y[twist] = 1.0;
        for k in (0..twist).rev() {
            y[k] = self.c(k) * y[k + 1] / qf[k];
        }
        for k in twist + 1..n {
            y[k] = self.c(k - 1) * y[k - 1] / qb[k];
        }
        y
    }
}

/// `W`-inner product.
pub fn weighted_dot(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

/// Scales `v` to unit `W`-norm.
pub fn weighted_normalize(weights: &[f64], v: &mut [f64]) {
    let norm = weighted_dot(weights, v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|a| *a /= norm);
    }
}

/// Solves `(G^T C G + diag(potential)) v = lambda diag(weights) v`, where `G` is the path difference matrix.
///
/// `conductance[i]` couples unknowns `i` and `i + 1`.
pub fn path_eigen(weights: &[f64], potential: &[f64], conductance: &[f64]) -> Result<PathEigen> {
    let n = weights.len();
    assert_eq!(potential.len(), n, "potential must match the weights");
    assert_eq!(
        conductance.len() + 1,
        n.max(1),
        "conductance must have n - 1 entries"
    );
    let pencil = Pencil {
        weights,
        potential,
        conductance,
    };
    if n == 0 {
        return Ok(PathEigen {
            values: vec![],
            vectors: vec![],
        });
    }
    let (lo, hi) = pencil.bracket();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        // eigenvalue k lies above eigenvalue k - 1
        let start = values.last().map_or(lo, |&v: &f64| v.min(hi));
        let x = pencil.bisect(k, start.max(lo), hi)?;
        let mut v = pencil.vector(x);
        weighted_normalize(weights, &mut v);
        values.push(x);
        vectors.push(v);
    }
    Ok(PathEigen { values, vectors })
}
