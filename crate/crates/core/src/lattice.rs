//! Truncated beta-orbits and the supports built from them.

use serde::Serialize;

use crate::beta_map::{BetaMap, Tolerances};
use crate::error::{Error, Result};
use crate::sum::sum_real;

/// Truncated orbit `t_k = beta^k(x)`, `k = 0..=K`, with gaps `mu_k = t_k - t_{k+1}`.
///
/// The depth `K` counts the gaps: a lattice of depth `K` has `K + 1` points
/// and `K` weights, and `t_K` is the tail point nearest `s0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    base: f64,
    s0: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
    tail_gap: f64,
    capped: bool,
}

impl Lattice {
    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Signed gaps `mu_k`, one fewer than the points.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tail_point(&self) -> f64 {
        *self.points.last().expect("a lattice has at least its base point")
    }

    /// `|t_K - s0|`.
    pub fn tail_gap(&self) -> f64 {
        self.tail_gap
    }

    /// True when `k_max` was reached before the tail criterion.
    pub fn is_capped(&self) -> bool {
        self.capped
    }

    /// Compensated sum of the gaps; telescopes to `t_0 - t_K`.
    pub fn total_weight(&self) -> f64 {
        sum_real(self.weights.iter().copied())
    }

    pub fn check_cap(&self, k_max: usize) -> Result<()> {
        if self.capped {
            Err(Error::TruncationCap {
                x: self.base,
                k_max,
                tail_gap: self.tail_gap,
            })
        } else {
            Ok(())
        }
    }

    /// Builds a lattice from raw points, e.g. when reading CSV.
    pub fn from_points(points: Vec<f64>, s0: f64) -> Result<Self> {
        let Some(&base) = points.first() else {
            return Err(Error::InvalidParameter {
                name: "points",
                value: 0.0,
                reason: "a lattice needs at least one point",
            });
        };
        let weights = points.windows(2).map(|w| w[0] - w[1]).collect();
        let tail_gap = (points[points.len() - 1] - s0).abs();
        Ok(Self {
            base,
            s0,
            points,
            weights,
            tail_gap,
            capped: false,
        })
    }
}

/// Orbit of `x` truncated at the first `K` with `|t_K - s0| <= atol * max(1, |x - s0|)`.
///
/// Reaching `k_max` first is not an error here: the lattice comes back with
/// [`Lattice::is_capped`] set, and consumers decide whether to escalate.
pub fn build_lattice(map: &BetaMap, x: f64, tol: &Tolerances) -> Result<Lattice> {
    tol.check()?;
    map.check_point("x", x)?;
    let s0 = map.fixed_point();
    let threshold = tol.atol * (x - s0).abs().max(1.0);
    let mut points = vec![x];
    let mut t = x;
    let mut capped = false;
    while (t - s0).abs() > threshold {
        if points.len() > tol.k_max {
            capped = true;
            break;
        }
        let next = step(map, t, points.len())?;
        if next == t {
            // floating-point stagnation short of the tolerance
            capped = true;
            break;
        }
        points.push(next);
        t = next;
    }
    Ok(finish(x, s0, points, capped))
}

/// Orbit of `x` with exactly `depth` gaps.
pub fn build_lattice_with_depth(map: &BetaMap, x: f64, depth: usize) -> Result<Lattice> {
    map.check_point("x", x)?;
    let s0 = map.fixed_point();
    let mut points = Vec::with_capacity(depth + 1);
    points.push(x);
    let mut t = x;
    for k in 1..=depth {
        t = step(map, t, k)?;
        points.push(t);
    }
    Ok(finish(x, s0, points, false))
}

fn step(map: &BetaMap, t: f64, k: usize) -> Result<f64> {
    let next = map.forward(t);
    if !next.is_finite() {
        return Err(Error::NonFiniteSample { t });
    }
    if !map.interval().contains(next) {
        return Err(Error::DepthExceeded { step: k, value: next });
    }
    Ok(next)
}

fn finish(base: f64, s0: f64, points: Vec<f64>, capped: bool) -> Lattice {
    let weights = points.windows(2).map(|w| w[0] - w[1]).collect();
    let tail_gap = (points[points.len() - 1] - s0).abs();
    Lattice {
        base,
        s0,
        points,
        weights,
        tail_gap,
        capped,
    }
}

/// A lattice entering an integral with sign `+1` (upper limit) or `-1` (lower limit).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedOrbit {
    pub lattice: Lattice,
    pub sign: f64,
}

/// Discrete support of `int_a^b`: the orbit of `b`, plus the orbit of `a` with negated weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Support {
    s0: f64,
    orbits: Vec<SignedOrbit>,
}

impl Support {
    /// Support of `int_{s0}^x`.
    pub fn one_sided(lattice: Lattice) -> Self {
        Self {
            s0: lattice.s0(),
            orbits: vec![SignedOrbit { lattice, sign: 1.0 }],
        }
    }

    /// Support of `int_a^b = int_{s0}^b - int_{s0}^a`; the `a` orbit is omitted when `a = s0`.
    pub fn two_sided(map: &BetaMap, a: f64, b: f64, tol: &Tolerances) -> Result<Self> {
        let right = build_lattice(map, b, tol)?;
        let mut support = Self::one_sided(right);
        if a != map.fixed_point() {
            let left = build_lattice(map, a, tol)?;
            support.orbits.push(SignedOrbit {
                lattice: left,
                sign: -1.0,
            });
        }
        Ok(support)
    }

    pub fn from_orbits(s0: f64, orbits: Vec<SignedOrbit>) -> Self {
        Self { s0, orbits }
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn orbits(&self) -> &[SignedOrbit] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.iter().map(|o| o.lattice.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_capped(&self) -> bool {
        self.orbits.iter().any(|o| o.lattice.is_capped())
    }

    pub fn check_cap(&self, k_max: usize) -> Result<()> {
        self.orbits.iter().try_for_each(|o| o.lattice.check_cap(k_max))
    }

    /// All points, orbit by orbit.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        self.orbits
            .iter()
            .flat_map(|o| o.lattice.points().iter().copied())
    }

    /// Signed integration weight of every point; the tail point of each orbit weighs zero.
    pub fn integration_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.orbits.iter().flat_map(|o| {
            o.lattice
                .weights()
                .iter()
                .map(move |&w| o.sign * w)
                .chain(std::iter::once(0.0))
        })
    }

    /// `(orbit, k)` for every flattened index.
    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.orbits
            .iter()
            .enumerate()
            .flat_map(|(j, o)| (0..o.lattice.len()).map(move |k| (j, k)))
    }

    /// Offset of the first point of `orbit` in the flattened order.
    pub fn offset(&self, orbit: usize) -> usize {
        self.orbits[..orbit].iter().map(|o| o.lattice.len()).sum()
    }
}
