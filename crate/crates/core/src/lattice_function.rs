//! Complex values on a lattice support: the concrete representative of an `L^p_beta` class.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::lattice::{Lattice, SignedOrbit, Support};

/// Values on every point of a [`Support`], plus the limit value at `s0`.
///
/// Equality compares points and values only: two functions are equal iff
/// they agree on every lattice point.
#[derive(Debug, Clone)]
pub struct LatticeFunction {
    support: Arc<Support>,
    values: Vec<Complex64>,
    s0_value: Complex64,
}

/// One CSV row of a [`LatticeFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub k: usize,
    pub t_k: f64,
    pub weight: f64,
    pub re_value: f64,
    pub im_value: f64,
}

impl LatticeFunction {
    pub fn new(support: Arc<Support>, values: Vec<Complex64>, s0_value: Complex64) -> Result<Self> {
        if values.len() != support.len() {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self {
            support,
            values,
            s0_value,
        })
    }

    /// Samples `f` on every point of `support` and at `s0`.
    pub fn sample(f: &ScalarFunction, support: Arc<Support>) -> Result<Self> {
        let values = support
            .points()
            .map(|t| finite(f.eval(t), t))
            .collect::<Result<Vec<_>>>()?;
        let s0 = support.s0();
        let s0_value = finite(f.eval(s0), s0)?;
        Ok(Self {
            support,
            values,
            s0_value,
        })
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn s0_value(&self) -> Complex64 {
        self.s0_value
    }

    pub fn points(&self) -> Vec<f64> {
        self.support.points().collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.support.integration_weights().collect()
    }

    /// Value at point `k` of orbit `orbit`.
    pub fn value_at(&self, orbit: usize, k: usize) -> Complex64 {
        self.values[self.support.offset(orbit) + k]
    }

    /// Values of one orbit, from its base point to its tail point.
    pub fn orbit_values(&self, orbit: usize) -> &[Complex64] {
        let start = self.support.offset(orbit);
        let len = self.support.orbits()[orbit].lattice.len();
        &self.values[start..start + len]
    }

    /// `(f(t_{k+1}) - f(t_k)) / (t_{k+1} - t_k)`: the beta-derivative at `t_k` seen on the lattice.
    pub fn forward_quotient(&self, orbit: usize, k: usize) -> Option<Complex64> {
        let lat = &self.support.orbits()[orbit].lattice;
        if k + 1 >= lat.len() {
            return None;
        }
        let t = lat.points();
        let v = self.orbit_values(orbit);
        Some((v[k + 1] - v[k]) / (t[k + 1] - t[k]))
    }

    /// `(f(t_k) - f(t_{k-1})) / (t_k - t_{k-1})`: the inverse-direction derivative at `t_k`.
    pub fn backward_quotient(&self, orbit: usize, k: usize) -> Option<Complex64> {
        if k == 0 {
            return None;
        }
        let lat = &self.support.orbits()[orbit].lattice;
        let t = lat.points();
        let v = self.orbit_values(orbit);
        Some((v[k] - v[k - 1]) / (t[k] - t[k - 1]))
    }

    pub fn map_values<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            support: self.support.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            s0_value: f(self.s0_value),
        }
    }

    pub fn conj(&self) -> Self {
        self.map_values(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_values(|v| c * v)
    }

    /// Pointwise `self + other`.
    pub fn add(&self, other: &LatticeFunction) -> Result<Self> {
        self.check_same_support(other)?;
        Ok(Self {
            support: self.support.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            s0_value: self.s0_value + other.s0_value,
        })
    }

    pub fn check_same_support(&self, other: &LatticeFunction) -> Result<()> {
        if Arc::ptr_eq(&self.support, &other.support) || self.support == other.support {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = CsvRow> + '_ {
        self.support
            .indices()
            .zip(self.support.points())
            .zip(self.support.integration_weights())
            .zip(&self.values)
            .map(|((((_, k), t), w), v)| CsvRow {
                k,
                t_k: t,
                weight: w,
                re_value: v.re,
                im_value: v.im,
            })
    }

    /// Writes `k,t_k,weight,re_value,im_value` rows; the tail point of each orbit has weight 0.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing CSV to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv).
    ///
    /// An orbit starts at every row with `k = 0`; its sign is recovered from
    /// the first weight. The value at `s0` is taken from the last tail point.
    pub fn read_csv<R: Read>(reader: R, s0: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let rows = rdr
            .deserialize::<CsvRow>()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::LatticeMismatch)?;
        let mut groups: Vec<Vec<CsvRow>> = Vec::new();
        for row in rows {
            if row.k == 0 || groups.is_empty() {
                groups.push(Vec::new());
            }
            groups.last_mut().expect("pushed above").push(row);
        }
        let mut orbits = Vec::new();
        let mut values = Vec::new();
        for group in &groups {
            let points: Vec<f64> = group.iter().map(|r| r.t_k).collect();
            let sign = match group.as_slice() {
                [first, second, ..] if first.weight != 0.0 => {
                    (first.weight / (first.t_k - second.t_k)).signum()
                }
                _ => 1.0,
            };
            orbits.push(SignedOrbit {
                lattice: Lattice::from_points(points, s0)?,
                sign,
            });
            values.extend(group.iter().map(|r| Complex64::new(r.re_value, r.im_value)));
        }
        let s0_value = values.last().copied().unwrap_or_default();
        Self::new(Arc::new(Support::from_orbits(s0, orbits)), values, s0_value)
    }
}

impl PartialEq for LatticeFunction {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.support.points().eq(other.support.points())
    }
}

fn finite(v: Complex64, t: f64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue { t })
    }
}
