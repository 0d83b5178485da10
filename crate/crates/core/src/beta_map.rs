//! The map `beta: I -> I`, its fixed point, and grid-based validation.
//!
//! A valid map is continuous, strictly increasing, has a unique fixed point
//! `s0` and pulls every other point toward it:
//! `(t - s0) * (beta(t) - t) <= 0` with equality only at `t = s0`.
//! Validation samples these conditions on a finite grid; a passing report
//! certifies the sampled grid only.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::Polynomial;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Interval with optionally open and optionally infinite ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub lo_open: bool,
    #[serde(default)]
    pub hi_open: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self {
            lo,
            hi,
            lo_open: lo_open || lo.is_infinite(),
            hi_open: hi_open || hi.is_infinite(),
        })
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_open { t > self.lo } else { t >= self.lo };
        let below = if self.hi_open { t < self.hi } else { t <= self.hi };
        above && below
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_open { '(' } else { '[' };
        let r = if self.hi_open { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// Absolute/relative tolerances and the hard cap on orbit depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    pub k_max: usize,
}

impl Tolerances {
    pub fn new(atol: f64, rtol: f64, k_max: usize) -> Result<Self> {
        let tol = Self { atol, rtol, k_max };
        tol.check()?;
        Ok(tol)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.atol.is_finite() && self.atol > 0.0) {
            return Err(Error::InvalidTolerances("atol must be finite and positive"));
        }
        if !(self.rtol.is_finite() && self.rtol > 0.0) {
            return Err(Error::InvalidTolerances("rtol must be finite and positive"));
        }
        if self.k_max == 0 {
            return Err(Error::InvalidTolerances("k_max must be at least 1"));
        }
        Ok(())
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = k_max;
        self
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-10,
            k_max: 10_000,
        }
    }
}

/// Family of the map together with its parameters.
#[derive(Clone)]
pub enum BetaFamily {
    /// `beta(t) = q t + omega`, the Hahn operator.
    Hahn { q: f64, omega: f64 },
    /// `beta(t) = q t`, the Jackson operator.
    Jackson { q: f64 },
    /// `beta(t) = t^3` on `(-1, 1)`.
    Cubic,
    /// User-supplied strictly increasing map.
    Custom {
        forward: RealFn,
        inverse: Option<RealFn>,
        label: String,
    },
}

impl BetaFamily {
    pub fn name(&self) -> &str {
        match self {
            BetaFamily::Hahn { .. } => "hahn",
            BetaFamily::Jackson { .. } => "jackson",
            BetaFamily::Cubic => "cubic",
            BetaFamily::Custom { .. } => "custom",
        }
    }
}

impl fmt::Debug for BetaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaFamily::Hahn { q, omega } => f
                .debug_struct("Hahn")
                .field("q", q)
                .field("omega", omega)
                .finish(),
            BetaFamily::Jackson { q } => f.debug_struct("Jackson").field("q", q).finish(),
            BetaFamily::Cubic => f.write_str("Cubic"),
            BetaFamily::Custom { inverse, label, .. } => f
                .debug_struct("Custom")
                .field("label", label)
                .field("has_inverse", &inverse.is_some())
                .finish(),
        }
    }
}

/// A map `beta: I -> I` with its fixed point `s0`.
#[derive(Debug, Clone)]
pub struct BetaMap {
    family: BetaFamily,
    interval: Interval,
    s0: f64,
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "must lie in (0, 1)",
        })
    }
}

impl BetaMap {
    pub fn hahn(q: f64, omega: f64) -> Result<Self> {
        check_q(q)?;
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: omega,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self {
            family: BetaFamily::Hahn { q, omega },
            interval: Interval::real_line(),
            s0: omega / (1.0 - q),
        })
    }

    pub fn jackson(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(Self {
            family: BetaFamily::Jackson { q },
            interval: Interval::real_line(),
            s0: 0.0,
        })
    }

    pub fn cubic() -> Self {
        Self {
            family: BetaFamily::Cubic,
            interval: Interval {
                lo: -1.0,
                hi: 1.0,
                lo_open: true,
                hi_open: true,
            },
            s0: 0.0,
        }
    }

    /// A user-supplied map. Without `inverse`, inversion falls back to bisection.
    pub fn custom<F>(forward: F, interval: Interval, s0: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !interval.contains(s0) {
            return Err(Error::OutOfRange {
                what: "s0",
                value: s0,
                lo: interval.lo,
                hi: interval.hi,
            });
        }
        Ok(Self {
            family: BetaFamily::Custom {
                forward: Arc::new(forward),
                inverse: None,
                label: "closure".into(),
            },
            interval,
            s0,
        })
    }

    /// Attaches a closed-form inverse to a custom map; ignored for built-in families.
    pub fn with_inverse<F>(mut self, inverse: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let BetaFamily::Custom { inverse: inv, .. } = &mut self.family {
            *inv = Some(Arc::new(inverse));
        }
        self
    }

    pub fn with_label(mut self, name: impl Into<String>) -> Self {
        if let BetaFamily::Custom { label, .. } = &mut self.family {
            *label = name.into();
        }
        self
    }

    /// Restricts the map to a sub-interval containing `s0`.
    pub fn with_interval(mut self, interval: Interval) -> Result<Self> {
        if !interval.contains(self.s0) {
            return Err(Error::OutOfRange {
                what: "s0",
                value: self.s0,
                lo: interval.lo,
                hi: interval.hi,
            });
        }
        self.interval = interval;
        Ok(self)
    }

    pub fn family(&self) -> &BetaFamily {
        &self.family
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn fixed_point(&self) -> f64 {
        self.s0
    }

    #[inline]
    pub fn forward(&self, t: f64) -> f64 {
        match &self.family {
            BetaFamily::Hahn { q, omega } => q * t + omega,
            BetaFamily::Jackson { q } => q * t,
            BetaFamily::Cubic => t * t * t,
            BetaFamily::Custom { forward, .. } => forward(t),
        }
    }

    /// `(D_beta beta^{-1})(t) = (t - beta^{-1}(t)) / (beta(t) - t)`; equals `1/q` for Hahn maps.
    pub fn inverse_weight(&self, t: f64, tol: &Tolerances) -> Result<f64> {
        let prev = self.invert(t, tol)?;
        Ok((t - prev) / (self.forward(t) - t))
    }

    /// `beta^k(x)`.
    pub fn iterate(&self, x: f64, k: usize) -> Result<f64> {
        self.require_in_interval("x", x)?;
        let mut t = x;
        for step in 1..=k {
            t = self.forward(t);
            if !t.is_finite() {
                return Err(Error::NonFiniteSample { t });
            }
            if !self.interval.contains(t) {
                return Err(Error::DepthExceeded { step, value: t });
            }
            if t == self.s0 {
                break;
            }
        }
        Ok(t)
    }

    /// Image `beta(I)` as `(lo, hi)`, with infinite ends where `I` is unbounded.
    pub fn image_bounds(&self) -> (f64, f64) {
        let edge = |x: f64| {
            if x.is_infinite() {
                x
            } else {
                let y = self.forward(x);
                if y.is_finite() {
                    y
                } else {
                    x
                }
            }
        };
        (edge(self.interval.lo), edge(self.interval.hi))
    }

    fn in_image(&self, u: f64) -> bool {
        let (lo, hi) = self.image_bounds();
        let above = if self.interval.lo_open { u > lo } else { u >= lo };
        let below = if self.interval.hi_open { u < hi } else { u <= hi };
        above && below
    }

    /// `beta^{-1}(u)`, in closed form where the family has one and by bisection otherwise.
    pub fn invert(&self, u: f64, tol: &Tolerances) -> Result<f64> {
        if u == self.s0 {
            return Ok(self.s0);
        }
        if !u.is_finite() || !self.in_image(u) {
            let (lo, hi) = self.image_bounds();
            return Err(Error::OutOfRange {
                what: "beta^-1 argument",
                value: u,
                lo,
                hi,
            });
        }
        match &self.family {
            BetaFamily::Hahn { q, omega } => Ok((u - omega) / q),
            BetaFamily::Jackson { q } => Ok(u / q),
            BetaFamily::Cubic => Ok(u.cbrt()),
            BetaFamily::Custom {
                inverse: Some(inv), ..
            } => Ok(inv(u)),
            BetaFamily::Custom { inverse: None, .. } => self.bisect_inverse(u, tol),
        }
    }

    fn bisect_inverse(&self, u: f64, tol: &Tolerances) -> Result<f64> {
        let (mut lo, mut hi) = self.bracket(u)?;
        // The guarantee needs ceil(log2(width / atol)) + 8 halvings; the extra
        // 64 refine to the last representable bracket.
        let budget = ((hi - lo) / tol.atol).log2().ceil().max(0.0) as usize + 8;
        for _ in 0..budget + 64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.forward(mid);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { t: mid });
            }
            if v == u {
                return Ok(mid);
            }
            if v < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        if (self.forward(t) - u).abs() <= tol.atol {
            Ok(t)
        } else {
            Err(Error::NoConvergence {
                context: "bisection inverse",
                iterations: budget,
            })
        }
    }

    /// Finite bracket `[lo, hi]` in `I` with `beta(lo) <= u <= beta(hi)`.
    fn bracket(&self, u: f64) -> Result<(f64, f64)> {
        let iv = self.interval;
        let clip = |x: f64, toward: f64| {
            if x.is_finite() {
                x
            } else {
                let mut span = 1.0_f64.max(toward.abs());
                let mut y = toward + x.signum() * span;
                while self.forward(y).is_finite()
                    && (if x < 0.0 {
                        self.forward(y) > u
                    } else {
                        self.forward(y) < u
                    })
                    && span < 1e300
                {
                    span *= 2.0;
                    y = toward + x.signum() * span;
                }
                y
            }
        };
        let lo = clip(iv.lo, self.s0);
        let hi = clip(iv.hi, self.s0);
        Ok((lo, hi))
    }

    fn require_in_interval(&self, what: &'static str, x: f64) -> Result<()> {
        if self.interval.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what,
                value: x,
                lo: self.interval.lo,
                hi: self.interval.hi,
            })
        }
    }

    pub(crate) fn check_point(&self, what: &'static str, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFiniteSample { t: x });
        }
        self.require_in_interval(what, x)
    }

    /// Checks the map's invariants on a uniform grid of `grid_size` points.
    ///
    /// Unbounded ends are clipped to `s0 -/+ 1e6`.
    pub fn validate(&self, grid_size: usize, tol: &Tolerances) -> Result<ValidationReport> {
        self.validate_within(grid_size, tol, DEFAULT_VALIDATION_RADIUS)
    }

    /// Like [`validate`](Self::validate), clipping `I` to `s0 -/+ radius`.
    pub fn validate_within(
        &self,
        grid_size: usize,
        tol: &Tolerances,
        radius: f64,
    ) -> Result<ValidationReport> {
        tol.check()?;
        if grid_size < 3 {
            return Err(Error::InvalidParameter {
                name: "grid_size",
                value: grid_size as f64,
                reason: "must be at least 3",
            });
        }
        let iv = self.interval;
        if iv.lo >= iv.hi {
            return Err(Error::InvalidInterval { lo: iv.lo, hi: iv.hi });
        }
        let clip_lo = iv.lo.max(self.s0 - radius);
        let clip_hi = iv.hi.min(self.s0 + radius);
        if clip_lo >= clip_hi {
            return Err(Error::InvalidInterval {
                lo: clip_lo,
                hi: clip_hi,
            });
        }
        let step = (clip_hi - clip_lo) / (grid_size - 1) as f64;
        // open ends that were not clipped are approached to within half a step
        let lo = if iv.lo_open && clip_lo == iv.lo {
            clip_lo + 0.5 * step
        } else {
            clip_lo
        };
        let hi = if iv.hi_open && clip_hi == iv.hi {
            clip_hi - 0.5 * step
        } else {
            clip_hi
        };
        let grid: Vec<f64> = (0..grid_size)
            .map(|i| lo + (hi - lo) * i as f64 / (grid_size - 1) as f64)
            .collect();
        let images: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let b = self.forward(t);
                if b.is_finite() {
                    Ok(b)
                } else {
                    Err(Error::NonFiniteSample { t })
                }
            })
            .collect::<Result<_>>()?;

        let maps_into = grid
            .iter()
            .zip(&images)
            .find(|(_, &b)| !iv.contains(b))
            .map(|(&t, _)| t);

        let monotone = grid
            .windows(2)
            .zip(images.windows(2))
            .find(|(_, b)| b[1] <= b[0])
            .map(|(t, _)| t[1]);

        let fixed = self.forward(self.s0);
        let fixed_point = if fixed.is_finite() && (fixed - self.s0).abs() <= tol.atol {
            None
        } else {
            Some(self.s0)
        };

        let contraction = grid
            .iter()
            .zip(&images)
            .find(|(&t, &b)| {
                let product = (t - self.s0) * (b - t);
                if (t - self.s0).abs() <= tol.atol {
                    product > 0.0
                } else {
                    product >= 0.0
                }
            })
            .map(|(&t, _)| t);

        let checks = vec![
            CheckResult::new("maps_into_interval", maps_into),
            CheckResult::new("strictly_increasing", monotone),
            CheckResult::new("fixed_point", fixed_point),
            CheckResult::new("contraction_condition", contraction),
        ];
        let first_violation = checks
            .iter()
            .filter_map(|c| c.first_violation.map(|t| (c.name, t)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(check, t)| Violation {
                check: check.to_string(),
                t,
            });
        Ok(ValidationReport {
            pass: checks.iter().all(|c| c.pass),
            family: self.family.name().to_string(),
            s0: self.s0,
            region: [lo, hi],
            clipped: clip_lo != iv.lo || clip_hi != iv.hi,
            grid_size,
            checks,
            first_violation,
            note: "grid-based validation: a pass certifies the sampled region only".into(),
        })
    }
}

/// Half-width of the validation window around `s0` for unbounded intervals.
pub const DEFAULT_VALIDATION_RADIUS: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub first_violation: Option<f64>,
}

impl CheckResult {
    fn new(name: &'static str, first_violation: Option<f64>) -> Self {
        Self {
            name,
            pass: first_violation.is_none(),
            first_violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub t: f64,
}

/// Outcome of [`BetaMap::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub family: String,
    pub s0: f64,
    /// Sampled region after clipping unbounded or open ends.
    pub region: [f64; 2],
    pub clipped: bool,
    pub grid_size: usize,
    pub checks: Vec<CheckResult>,
    pub first_violation: Option<Violation>,
    pub note: String,
}

/// JSON description of a beta map, tagged by `"family"`.
///
/// `{"family":"hahn","q":0.5,"omega":1.0}`, `{"family":"jackson","q":0.5}`,
/// `{"family":"cubic"}` or
/// `{"family":"custom","poly":[0,0.5],"interval":[-1,1],"s0":0}` where the
/// custom forward map is a real polynomial in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BetaMapSpec {
    Hahn {
        q: f64,
        omega: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interval: Option<[f64; 2]>,
    },
    Jackson {
        q: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interval: Option<[f64; 2]>,
    },
    Cubic {},
    Custom {
        poly: Vec<f64>,
        interval: [f64; 2],
        s0: f64,
    },
}

impl BetaMapSpec {
    pub fn build(&self) -> Result<BetaMap> {
        let restrict = |map: BetaMap, iv: &Option<[f64; 2]>| match iv {
            Some([lo, hi]) => map.with_interval(Interval::closed(*lo, *hi)?),
            None => Ok(map),
        };
        match self {
            BetaMapSpec::Hahn { q, omega, interval } => restrict(BetaMap::hahn(*q, *omega)?, interval),
            BetaMapSpec::Jackson { q, interval } => restrict(BetaMap::jackson(*q)?, interval),
            BetaMapSpec::Cubic {} => Ok(BetaMap::cubic()),
            BetaMapSpec::Custom { poly, interval, s0 } => {
                if poly.is_empty() {
                    return Err(Error::InvalidParameter {
                        name: "poly",
                        value: 0.0,
                        reason: "custom map needs at least one coefficient",
                    });
                }
                let p = Polynomial::real(poly);
                let label = format!("poly{poly:?}");
                Ok(BetaMap::custom(
                    move |t| p.eval(t).re,
                    Interval::closed(interval[0], interval[1])?,
                    *s0,
                )?
                .with_label(label))
            }
        }
    }
}

impl BetaMap {
    pub fn from_json(json: &str) -> std::result::Result<Result<BetaMap>, serde_json::Error> {
        let spec: BetaMapSpec = serde_json::from_str(json)?;
        Ok(spec.build())
    }
}
