//! Beta-Sturm-Liouville problems on truncated lattices.
//!
//! The operator is `l y = -w D_{beta^-1} D_beta y + r y` with the pointwise
//! weight `w = D_beta beta^-1`, under separated boundary conditions
//! `c1 y + c2 D_{beta^-1} y = 0` at each end. On `(s0, b)` the left condition
//! sits at `s0`; on `(a, b)` it sits at `a`.
//!
//! Discretization, for the orbit `t_0 = b, ..., t_{K+1}` of an end with gaps
//! `mu_k = t_k - t_{k+1}`:
//!
//! - unknowns are `u_0 ..= u_K`; the row of `t_k` is `mu_k l y(t_k)`, a
//!   symmetric three-point stencil with off-diagonals `-1/mu_k`;
//! - the ghost value at `beta^-1(b)` is eliminated through the end condition,
//!   touching only the first diagonal entry; with `c2 = 0` the end value is
//!   pinned to zero and dropped;
//! - the deepest value `u_{K+1}` stands in for `y(s0)`. On `(s0, b)` it is
//!   eliminated by the `s0` condition with `D_{beta^-1} y(s0)` read as the
//!   deepest quotient. On `(a, b)` both orbits share it, and it is eliminated
//!   by making the energy stationary in that value, which equates the deepest
//!   difference quotients from the two sides. This is the only closure that
//!   keeps the weighted operator symmetric.

mod assemble;
pub mod eigen;
mod identities;
mod solve;

pub use assemble::{assemble, DiscreteOperator};
pub use identities::{
    apply_ell, apply_ell_lattice, bracket, bracket_at, check_self_adjoint, lagrange_residual, lagrange_terms,
    resolve_eigenvalue_sign, LagrangeTerms, SelfAdjointReport, SignResolution,
};
pub use solve::{solve, EigenfunctionRecord, SlpSolution};

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beta_map::{BetaMap, Tolerances};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::lattice::{build_lattice_with_depth, Lattice, SignedOrbit, Support};
use crate::lattice_function::LatticeFunction;

/// Interval of the problem: `(s0, b)` or `(a, b)` with `a < s0 < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoints {
    // `Both` first: an untagged `Right` would also accept `{"a": .., "b": ..}`
    Both { a: f64, b: f64 },
    Right { b: f64 },
}

/// Boundary coefficients `(c1, c2)` of `c1 y + c2 D_{beta^-1} y = 0`.
pub type BoundaryCondition = (f64, f64);

/// One end of the discretized interval and its orbit toward `s0`.
#[derive(Debug, Clone)]
pub(crate) struct EndOrbit {
    pub(crate) name: &'static str,
    /// `t_0 ..= t_{K+1}`.
    pub(crate) points: Vec<f64>,
    /// `beta^-1(t_0)`.
    pub(crate) ghost_point: f64,
    pub(crate) bc: BoundaryCondition,
}

impl EndOrbit {
    pub(crate) fn mu(&self, k: usize) -> f64 {
        self.points[k] - self.points[k + 1]
    }

    /// `beta^-1(t_0) - t_0`.
    pub(crate) fn mu_ghost(&self) -> f64 {
        self.ghost_point - self.points[0]
    }

    pub(crate) fn pinned(&self) -> bool {
        self.bc.1 == 0.0
    }
}

/// A Sturm-Liouville problem with real potential `r` and separated boundary conditions.
#[derive(Debug, Clone)]
pub struct SlpProblem {
    map: BetaMap,
    endpoints: Endpoints,
    r: ScalarFunction,
    bc_left: BoundaryCondition,
    bc_right: BoundaryCondition,
    depth: usize,
    tol: Tolerances,
    orbits: Vec<EndOrbit>,
    support: Arc<Support>,
}

fn check_nondegenerate(
    end: &'static str,
    bc: BoundaryCondition,
    names: (&'static str, &'static str),
) -> Result<()> {
    if !(bc.0.is_finite() && bc.1.is_finite()) {
        return Err(Error::InvalidParameter {
            name: names.0,
            value: if bc.0.is_finite() { bc.1 } else { bc.0 },
            reason: "boundary coefficients must be finite",
        });
    }
    if bc.0.abs() + bc.1.abs() == 0.0 {
        return Err(Error::Nondegeneracy {
            end,
            first: names.0,
            second: names.1,
        });
    }
    Ok(())
}

impl SlpProblem {
    /// Builds the problem on a lattice of `depth` gaps per end (`depth + 1` unknowns per orbit
    /// before Dirichlet pinning).
    ///
    /// `Endpoints::Both` with `a = s0` is the same as `Endpoints::Right`.
    pub fn new(
        map: BetaMap,
        endpoints: Endpoints,
        r: ScalarFunction,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
        depth: usize,
    ) -> Result<Self> {
        check_nondegenerate("left", bc_left, ("a1", "a2"))?;
        check_nondegenerate("right", bc_right, ("b1", "b2"))?;
        if depth == 0 {
            return Err(Error::InvalidParameter {
                name: "depth",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        let s0 = map.fixed_point();
        let tol = Tolerances::default();
        let endpoints = match endpoints {
            Endpoints::Both { a, b } if a == s0 => Endpoints::Right { b },
            other => other,
        };
        let end = |name, x: f64, bc| -> Result<EndOrbit> {
            let lattice = build_lattice_with_depth(&map, x, depth + 1)?;
            let ghost_point = map.invert(x, &tol)?;
            map.check_point("beta^-1 of an endpoint", ghost_point)?;
            let points = lattice.points();
            let gaps = points.windows(2).map(|p| p[0] - p[1]).chain([ghost_point - x]);
            for gap in gaps {
                if !(1.0 / gap.abs()).is_finite() || !(1.0 / (gap * gap)).is_finite() {
                    // consecutive points merge in floating point, so the stencil is undefined
                    return Err(Error::InvalidParameter {
                        name: "depth",
                        value: depth as f64,
                        reason: "orbit gaps underflow before this depth",
                    });
                }
            }
            Ok(EndOrbit {
                name,
                points: lattice.points().to_vec(),
                ghost_point,
                bc,
            })
        };
        let orbits = match endpoints {
            Endpoints::Right { b } => {
                if b == s0 || !b.is_finite() {
                    return Err(Error::InvalidEndpoints(format!(
                        "b = {b} must be finite and differ from s0 = {s0}"
                    )));
                }
                vec![end("right", b, bc_right)?]
            }
            Endpoints::Both { a, b } => {
                if !(a < s0 && s0 < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidEndpoints(format!(
                        "need finite a < s0 < b, got a = {a}, s0 = {s0}, b = {b}"
                    )));
                }
                vec![end("right", b, bc_right)?, end("left", a, bc_left)?]
            }
        };
        let support = Arc::new(Support::from_orbits(
            s0,
            orbits
                .iter()
                .map(|o| SignedOrbit {
                    lattice: Lattice::from_points(o.points.clone(), s0).expect("orbits are nonempty"),
                    sign: if o.name == "right" { 1.0 } else { -1.0 },
                })
                .collect(),
        ));
        Ok(Self {
            map,
            endpoints,
            r,
            bc_left,
            bc_right,
            depth,
            tol,
            orbits,
            support,
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Result<Self> {
        tol.check()?;
        self.tol = tol;
        Ok(self)
    }

    pub fn map(&self) -> &BetaMap {
        &self.map
    }

    pub fn endpoints(&self) -> Endpoints {
        self.endpoints
    }

    pub fn potential(&self) -> &ScalarFunction {
        &self.r
    }

    pub fn bc_left(&self) -> BoundaryCondition {
        self.bc_left
    }

    pub fn bc_right(&self) -> BoundaryCondition {
        self.bc_right
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn is_two_sided(&self) -> bool {
        self.orbits.len() == 2
    }

    /// Lattice support of grid functions: each orbit `t_0 ..= t_{K+1}`, the
    /// `a` orbit with negated weights, tail points weighing zero.
    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub(crate) fn orbits(&self) -> &[EndOrbit] {
        &self.orbits
    }

    /// `(orbit, k)` of every unknown in operator order.
    ///
    /// One-sided: `u_0 ..= u_K` (from `b` inward). Two-sided: the `a` orbit
    /// outward-in, then the `b` orbit inward-out, so that the two deepest
    /// unknowns are adjacent and the matrix stays tridiagonal.
    pub fn unknowns(&self) -> Vec<(usize, usize)> {
        let k_max = self.depth;
        let right_first = usize::from(self.orbits[0].pinned());
        if self.is_two_sided() {
            let left_first = usize::from(self.orbits[1].pinned());
            (left_first..=k_max)
                .map(|k| (1, k))
                .chain((right_first..=k_max).rev().map(|k| (0, k)))
                .collect()
        } else {
            (right_first..=k_max).map(|k| (0, k)).collect()
        }
    }

    pub fn dimension(&self) -> usize {
        self.unknowns().len()
    }

    /// Real potential at `t`, or a reality violation.
    pub(crate) fn potential_at(&self, t: f64) -> Result<f64> {
        let v = self.r.eval(t);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFiniteValue { t });
        }
        if v.im.abs() > self.tol.atol * v.re.abs().max(1.0) {
            return Err(Error::RealityViolation { t, imag: v.im });
        }
        Ok(v.re)
    }

    /// Deepest value shared at `s0` from the deepest unknowns of each orbit.
    pub(crate) fn deep_value(&self, deepest: &[Complex64]) -> Complex64 {
        let b = &self.orbits[0];
        let k = self.depth;
        if self.is_two_sided() {
            let (mu, nu) = (b.mu(k), self.orbits[1].mu(k));
            (deepest[0] * nu - deepest[1] * mu) / (nu - mu)
        } else {
            let (a1, a2) = self.bc_left;
            if a2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                deepest[0] * a2 / (a2 - a1 * b.mu(k))
            }
        }
    }

    /// Ghost value at `beta^-1` of the orbit's end making the end condition hold.
    pub(crate) fn ghost_value(&self, orbit: usize, values: &[Complex64]) -> Complex64 {
        let o = &self.orbits[orbit];
        let (c1, c2) = o.bc;
        let mg = o.mu_ghost();
        if c2 == 0.0 {
            // end value is pinned to zero; choose the ghost so that l y vanishes there
            -values[1] * mg / o.mu(0)
        } else {
            values[0] * (1.0 - c1 / c2 * mg)
        }
    }

    /// Grid function satisfying both boundary conditions, from the free unknowns in operator order.
    pub fn bc_function(&self, free: &[Complex64]) -> Result<GridFunction> {
        let layout = self.unknowns();
        if free.len() != layout.len() {
            return Err(Error::LatticeMismatch);
        }
        let len = self.depth + 2;
        let mut values = vec![vec![Complex64::new(0.0, 0.0); len]; self.orbits.len()];
        for (&(j, k), &v) in layout.iter().zip(free) {
            values[j][k] = v;
        }
        let deepest: Vec<Complex64> = values.iter().map(|v| v[self.depth]).collect();
        let s = self.deep_value(&deepest);
        for v in values.iter_mut() {
            v[self.depth + 1] = s;
        }
        let ghosts = (0..self.orbits.len())
            .map(|j| self.ghost_value(j, &values[j]))
            .collect();
        GridFunction::from_orbit_values(self, values, ghosts)
    }

    /// Grid function from arbitrary values on every orbit point and arbitrary ghosts.
    ///
    /// On `(a, b)` the two tail values are replaced by the shared value at `s0`
    /// implied by the deepest unknowns, which is part of the discrete function
    /// space rather than a boundary condition.
    pub fn free_function(
        &self,
        mut values: Vec<Vec<Complex64>>,
        ghosts: Vec<Complex64>,
    ) -> Result<GridFunction> {
        if values.len() != self.orbits.len()
            || ghosts.len() != self.orbits.len()
            || values.iter().any(|v| v.len() != self.depth + 2)
        {
            return Err(Error::LatticeMismatch);
        }
        if self.is_two_sided() {
            let deepest: Vec<Complex64> = values.iter().map(|v| v[self.depth]).collect();
            let s = self.deep_value(&deepest);
            for v in values.iter_mut() {
                v[self.depth + 1] = s;
            }
        }
        GridFunction::from_orbit_values(self, values, ghosts)
    }

    /// Samples `f` on every orbit point and ghost point.
    pub fn sample(&self, f: &ScalarFunction) -> Result<GridFunction> {
        let values = self
            .orbits
            .iter()
            .map(|o| o.points.iter().map(|&t| f.eval(t)).collect())
            .collect();
        let ghosts = self.orbits.iter().map(|o| f.eval(o.ghost_point)).collect();
        GridFunction::from_orbit_values(self, values, ghosts)
    }

    /// Residuals `c1 y + c2 D_{beta^-1} y` at the right end and at the left end (`s0` or `a`).
    pub fn boundary_residuals(&self, y: &GridFunction) -> (Complex64, Complex64) {
        let right = self.end_condition(0, y);
        let left = if self.is_two_sided() {
            self.end_condition(1, y)
        } else {
            let (a1, a2) = self.bc_left;
            let o = &self.orbits[0];
            let v = y.orbit_values(0);
            let k = self.depth;
            let d = (v[k + 1] - v[k]) / (o.points[k + 1] - o.points[k]);
            a1 * v[k + 1] + a2 * d
        };
        (right, left)
    }

    fn end_condition(&self, orbit: usize, y: &GridFunction) -> Complex64 {
        let o = &self.orbits[orbit];
        let (c1, c2) = o.bc;
        let v = y.orbit_values(orbit);
        let d = (v[0] - y.ghosts[orbit]) / (o.points[0] - o.ghost_point);
        c1 * v[0] + c2 * d
    }
}

/// A lattice function on the problem support together with its ghost values at `beta^-1` of each end.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: LatticeFunction,
    ghosts: Vec<Complex64>,
}

impl GridFunction {
    fn from_orbit_values(
        problem: &SlpProblem,
        values: Vec<Vec<Complex64>>,
        ghosts: Vec<Complex64>,
    ) -> Result<Self> {
        let s0_value = values[0][problem.depth + 1];
        let flat = values.into_iter().flatten().collect();
        Ok(Self {
            values: LatticeFunction::new(problem.support.clone(), flat, s0_value)?,
            ghosts,
        })
    }

    pub fn lattice_function(&self) -> &LatticeFunction {
        &self.values
    }

    pub fn into_lattice_function(self) -> LatticeFunction {
        self.values
    }

    pub fn ghosts(&self) -> &[Complex64] {
        &self.ghosts
    }

    pub fn orbit_values(&self, orbit: usize) -> &[Complex64] {
        self.values.orbit_values(orbit)
    }

    pub fn conj(&self) -> Self {
        Self {
            values: self.values.conj(),
            ghosts: self.ghosts.iter().map(|g| g.conj()).collect(),
        }
    }
}
