//! Eigenpairs of the discretized operator.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{path_eigen, weighted_dot, weighted_normalize};
use super::{DiscreteOperator, SlpProblem};
use crate::error::Result;
use crate::lattice_function::LatticeFunction;
use crate::quantum_calc::{inner_product, lp_norm};

/// Real ascending eigenvalues with beta-orthonormal eigenfunctions.
#[derive(Debug, Clone)]
pub struct SlpSolution {
    pub eigenvalues: Vec<f64>,
    /// Eigenfunctions on the problem support, real-valued, `s0` value included.
    pub eigenfunctions: Vec<LatticeFunction>,
    /// `max_k |(L v_i)_k - lambda_i v_{i,k}|` over the unknowns.
    pub residuals: Vec<f64>,
    /// `max_{i != j} |<phi_i, phi_j>|`.
    pub gram_offdiag: f64,
    /// `max_i residuals_i / (|lambda_i| + ||L||_inf)`.
    pub residual: f64,
    /// Indices `i` with `lambda_i` and `lambda_{i+1}` equal within `rtol`.
    pub ties: Vec<usize>,
    pub operator: DiscreteOperator,
}

/// One eigenfunction in the solution JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenfunctionRecord {
    pub k: Vec<usize>,
    pub t: Vec<f64>,
    pub value: Vec<f64>,
}

#[derive(Serialize)]
struct SolutionJson<'a> {
    eigenvalues: &'a [f64],
    gram_offdiag: f64,
    residual: f64,
    eigenfunctions: Vec<EigenfunctionRecord>,
}

/// Gram-Schmidt in the `W`-inner product.
fn orthonormalize(weights: &[f64], vectors: &mut [Vec<f64>]) {
    for i in 0..vectors.len() {
        let (head, tail) = vectors.split_at_mut(i);
        for prev in head.iter() {
            let dot = weighted_dot(weights, &tail[0], prev);
            for (a, b) in tail[0].iter_mut().zip(prev) {
                *a -= dot * b;
            }
        }
        weighted_normalize(weights, &mut tail[0]);
    }
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0_f64, |m, a| if a.abs() > m.abs() { a } else { m });
    if pivot < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
}

impl SlpProblem {
    /// Assembles the operator and computes all eigenpairs.
    pub fn solve(&self) -> Result<SlpSolution> {
        let op = self.assemble()?;
        let n = op.n;
        let eig = path_eigen(&op.weights, &op.potential, &op.conductance)?;
        let eigenvalues = eig.values;
        let mut vectors = eig.vectors;

        let rtol = self.tolerances().rtol;
        let ties: Vec<usize> = (0..n.saturating_sub(1))
            .filter(|&i| {
                let (a, b) = (eigenvalues[i], eigenvalues[i + 1]);
                (b - a).abs() <= rtol * a.abs().max(b.abs()).max(1.0)
            })
            .collect();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && ties.contains(&(end - 1)) {
                end += 1;
            }
            if end - start > 1 {
                orthonormalize(&op.weights, &mut vectors[start..end]);
            }
            start = end;
        }

        let mut eigenfunctions = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for (lambda, v) in eigenvalues.iter().zip(vectors.iter_mut()) {
            fix_sign(v);
            let lv = op.apply(v);
            let res = lv
                .iter()
                .zip(v.iter())
                .map(|(l, x)| (l - lambda * x).abs())
                .fold(0.0, f64::max);
            residuals.push(res);
            let phi = self.embed(&op, v)?;
            let norm = lp_norm(&phi, 2.0)?;
            eigenfunctions.push(phi.scale(Complex64::new(1.0 / norm, 0.0)));
        }

        let mut gram_offdiag: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let g = inner_product(&eigenfunctions[i], &eigenfunctions[j])?;
                gram_offdiag = gram_offdiag.max(g.norm());
            }
        }
        let norm_l = op.inf_norm();
        let residual = eigenvalues
            .iter()
            .zip(&residuals)
            .map(|(l, r)| r / (l.abs() + norm_l))
            .fold(0.0, f64::max);

        Ok(SlpSolution {
            eigenvalues,
            eigenfunctions,
            residuals,
            gram_offdiag,
            residual,
            ties,
            operator: op,
        })
    }

    /// Places the unknowns on the support, with pinned ends at zero and the eliminated `s0` value.
    fn embed(&self, op: &DiscreteOperator, v: &[f64]) -> Result<LatticeFunction> {
        let depth = self.depth();
        let mut values = vec![vec![Complex64::new(0.0, 0.0); depth + 2]; self.orbits().len()];
        for (&(j, k), &x) in op.layout.iter().zip(v) {
            values[j][k] = Complex64::new(x, 0.0);
        }
        let deepest: Vec<Complex64> = values.iter().map(|o| o[depth]).collect();
        let s = self.deep_value(&deepest);
        for o in values.iter_mut() {
            o[depth + 1] = s;
        }
        LatticeFunction::new(self.support().clone(), values.into_iter().flatten().collect(), s)
    }
}

/// Solves `problem`.
pub fn solve(problem: &SlpProblem) -> Result<SlpSolution> {
    problem.solve()
}

impl SlpSolution {
    /// JSON with all eigenvalues and the first `modes` eigenfunctions.
    pub fn to_json(&self, modes: usize) -> String {
        let eigenfunctions = self
            .eigenfunctions
            .iter()
            .take(modes)
            .map(|phi| {
                let rows: Vec<_> = phi.rows().collect();
                EigenfunctionRecord {
                    k: rows.iter().map(|r| r.k).collect(),
                    t: rows.iter().map(|r| r.t_k).collect(),
                    value: rows.iter().map(|r| r.re_value).collect(),
                }
            })
            .collect();
        let json = SolutionJson {
            eigenvalues: &self.eigenvalues,
            gram_offdiag: self.gram_offdiag,
            residual: self.residual,
            eigenfunctions,
        };
        serde_json::to_string_pretty(&json).expect("solution serializes")
    }

    /// Eigenfunction `i` in the lattice CSV format.
    pub fn write_mode_csv<W: Write>(&self, i: usize, writer: W) -> csv::Result<()> {
        self.eigenfunctions[i].write_csv(writer)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Endpoints;
    use super::*;
    use crate::beta_map::BetaMap;
    use crate::function::ScalarFunction;

    fn dirichlet(r: f64, depth: usize) -> SlpProblem {
        SlpProblem::new(
            BetaMap::jackson(0.5).unwrap(),
            Endpoints::Right { b: 1.0 },
            ScalarFunction::constant(Complex64::new(r, 0.0)),
            (1.0, 0.0),
            (1.0, 0.0),
            depth,
        )
        .unwrap()
    }

    #[test]
    fn ascending_orthonormal_and_small_residual() {
        let sol = dirichlet(0.0, 12).solve().unwrap();
        assert!(sol.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(sol.gram_offdiag <= 1e-10, "{}", sol.gram_offdiag);
        assert!(sol.residual <= 1e-12, "{}", sol.residual);
        for phi in &sol.eigenfunctions {
            assert!((lp_norm(phi, 2.0).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let base = dirichlet(0.0, 6).solve().unwrap();
        let shifted = dirichlet(5.0, 6).solve().unwrap();
        for (a, b) in base.eigenvalues.iter().zip(&shifted.eigenvalues) {
            assert!((b - a - 5.0).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn json_lists_requested_modes() {
        let sol = dirichlet(0.0, 3).solve().unwrap();
        let v: serde_json::Value = serde_json::from_str(&sol.to_json(2)).unwrap();
        assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 3);
        assert_eq!(v["eigenfunctions"].as_array().unwrap().len(), 2);
        let first = &v["eigenfunctions"][0];
        assert_eq!(first["t"][0], 1.0);
        assert_eq!(first["value"][0], 0.0);
    }

    #[test]
    fn largest_component_is_positive() {
        let sol = dirichlet(0.0, 8).solve().unwrap();
        for phi in &sol.eigenfunctions {
            let big = phi
                .values()
                .iter()
                .fold(0.0_f64, |m, v| if v.re.abs() > m.abs() { v.re } else { m });
            assert!(big > 0.0);
        }
    }
}
