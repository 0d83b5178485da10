//! Tridiagonal assembly of the discretized operator.

use serde::Serialize;

use super::SlpProblem;
use crate::error::{Error, Result};

/// `L` in tridiagonal form, with `(L y)_i = l y` at the `i`-th unknown after
/// boundary elimination, and the diagonal weights `W` making `W L` symmetric.
///
/// `W L` is also kept in factored form: a path with edge conductances `c_i`
/// between unknowns `i` and `i + 1` plus a diagonal `potential`, so that
/// `(W L)_ii = c_{i-1} + c_i + potential_i` and `(W L)_{i,i+1} = -c_i`. Every
/// factor is formed without cancellation, which the eigensolver relies on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteOperator {
    pub n: usize,
    pub diag: Vec<f64>,
    /// `sub[i] = L[i + 1][i]`.
    pub sub: Vec<f64>,
    /// `sup[i] = L[i][i + 1]`.
    pub sup: Vec<f64>,
    /// `|mu_k|` at each unknown.
    pub weights: Vec<f64>,
    /// Positive coupling between consecutive unknowns.
    pub conductance: Vec<f64>,
    /// Diagonal of `W L` beyond the couplings: `|mu_k| r(t_k)` and boundary terms.
    pub potential: Vec<f64>,
    /// `max |(W L)[i][i + 1] - (W L)[i + 1][i]|`.
    pub symmetry_residual: f64,
    /// `(orbit, k)` of each unknown.
    pub layout: Vec<(usize, usize)>,
}

impl DiscreteOperator {
    /// `L y` for a vector over the unknowns.
    pub fn apply<T>(&self, y: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        assert_eq!(y.len(), self.n, "vector length must match the operator");
        (0..self.n)
            .map(|i| {
                let mut acc = y[i] * self.diag[i];
                if i > 0 {
                    acc = acc + y[i - 1] * self.sub[i - 1];
                }
                if i + 1 < self.n {
                    acc = acc + y[i + 1] * self.sup[i];
                }
                acc
            })
            .collect()
    }

    /// Dense `L`, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            m[i][i] = self.diag[i];
            if i + 1 < self.n {
                m[i][i + 1] = self.sup[i];
                m[i + 1][i] = self.sub[i];
            }
        }
        m
    }

    /// Largest entry of `W L` in magnitude.
    pub fn max_weighted_entry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            m = m.max((self.weights[i] * self.diag[i]).abs());
            if i + 1 < self.n {
                m = m
                    .max((self.weights[i] * self.sup[i]).abs())
                    .max((self.weights[i + 1] * self.sub[i]).abs());
            }
        }
        m
    }

    /// `||L||_inf`, the largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.sub[i - 1].abs();
                }
                if i + 1 < self.n {
                    s += self.sup[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

impl SlpProblem {
    /// Assembles `L` on the truncated lattice.
    pub fn assemble(&self) -> Result<DiscreteOperator> {
        let layout = self.unknowns();
        let n = layout.len();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "depth",
                value: self.depth() as f64,
                reason: "no unknowns remain after boundary elimination",
            });
        }
        let orbits = self.orbits();
        let depth = self.depth();
        let two_sided = self.is_two_sided();

        let mut weights = Vec::with_capacity(n);
        let mut potential = Vec::with_capacity(n);
        for &(j, k) in &layout {
            let o = &orbits[j];
            let mu = o.mu(k);
            let w = mu.abs();
            let sign = mu.signum();
            let mut e = w * self.potential_at(o.points[k])?;
            if k == 0 {
                // ghost eliminated through c1 y + c2 D_{beta^-1} y = 0
                let (c1, c2) = o.bc;
                e += sign * c1 / c2;
            } else if k == 1 && o.pinned() {
                // coupling to the pinned end value
                e += 1.0 / o.mu(0).abs();
            }
            if k == depth && !two_sided {
                let (a1, a2) = self.bc_left();
                if a2 == 0.0 {
                    e += 1.0 / w;
                } else {
                    let denom = a2 - a1 * mu;
                    if denom.abs() <= 16.0 * f64::EPSILON * a2.abs().max((a1 * mu).abs()) {
                        return Err(Error::DegenerateBc { end: "left" });
                    }
                    // 1/mu - a2 / (mu (a2 - a1 mu)), in closed form
                    e += -a1 / denom;
                }
            }
            weights.push(w);
            potential.push(e);
        }
        let conductance: Vec<f64> = layout
            .windows(2)
            .map(|pair| {
                let ((j0, k0), (j1, k1)) = (pair[0], pair[1]);
                if j0 == j1 {
                    1.0 / orbits[j0].mu(k0.min(k1)).abs()
                } else {
                    // the shared s0 value, eliminated, leaves one coupling of the two deepest gaps in series
                    1.0 / (orbits[0].mu(depth).abs() + orbits[1].mu(depth).abs())
                }
            })
            .collect();

        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n - 1];
        let mut sup = vec![0.0; n - 1];
        for i in 0..n {
            let left = if i > 0 { conductance[i - 1] } else { 0.0 };
            let right = if i + 1 < n { conductance[i] } else { 0.0 };
            diag[i] = (left + right + potential[i]) / weights[i];
            if i + 1 < n {
                sup[i] = -conductance[i] / weights[i];
                sub[i] = -conductance[i] / weights[i + 1];
            }
        }
        // symmetry of W L as formed from the stored L
        let symmetry_residual = (0..n - 1)
            .map(|i| (weights[i] * sup[i] - weights[i + 1] * sub[i]).abs())
            .fold(0.0, f64::max);
        Ok(DiscreteOperator {
            n,
            diag,
            sub,
            sup,
            weights,
            conductance,
            potential,
            symmetry_residual,
            layout,
        })
    }
}

/// Assembles the operator of `problem`.
pub fn assemble(problem: &SlpProblem) -> Result<DiscreteOperator> {
    problem.assemble()
}
