//! General quantum (beta-) calculus.
//!
//! For a strictly increasing map `beta` with a unique fixed point `s0`
//! attracting every orbit, this crate provides the beta-derivative
//! `D_beta f(t) = (f(beta(t)) - f(t)) / (beta(t) - t)`, the beta-integral as a
//! series over the orbit `beta^k(x)`, norms and inner products on lattice
//! functions, the beta-exponential and trigonometric functions as infinite
//! products, and a self-adjoint Sturm-Liouville eigensolver on truncated
//! lattices.

pub mod beta_map;
pub mod error;
pub mod function;
pub mod lattice;
pub mod lattice_function;
pub mod quantum_calc;
pub mod slp;
pub mod special_fn;
pub mod sum;

pub use beta_map::{BetaFamily, BetaMap, BetaMapSpec, Interval, Tolerances, ValidationReport};
pub use error::{Error, Result};
pub use function::{Polynomial, ScalarFunction};
pub use lattice::{build_lattice, build_lattice_with_depth, Lattice, Support};
pub use lattice_function::LatticeFunction;
pub use num_complex::Complex64;
pub use quantum_calc::IntegralEstimate;
pub use slp::{DiscreteOperator, Endpoints, SlpProblem, SlpSolution};
pub use special_fn::{CoefficientFunction, SpecialKind};
