//! The Laplace distribution `Lap(b, z)`.
//!
//! A scale `b ≤ 0` is not an error: the distribution degenerates to a point
//! mass at the location, so mechanism code never has to special-case a
//! zero noise scale.

use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};
use crate::rng::RandomSource;

/// Quadrature and tail truncation extend this many scale units past the
/// location; each tail beyond carries mass `½e^{−40} ≈ 2.1e−18`.
pub const TAIL_SCALES: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Laplace {
    pub scale: f64,
    pub location: f64,
}

impl Laplace {
    pub fn new(scale: f64, location: f64) -> Self {
        Self { scale, location }
    }

    /// `Lap(b, 0)`.
    pub fn centered(scale: f64) -> Self {
        Self::new(scale, 0.0)
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.scale > 0.0)
    }

    /// Same scale, location moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self::new(self.scale, self.location + shift)
    }

    /// `exp(−|x−z|/b) / 2b`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(DpError::Degenerate(format!(
                "Lap({}, {}) is a point mass and has no density",
                self.scale, self.location
            )));
        }
        Ok(self.pdf_unchecked(x))
    }

    #[inline]
    pub(crate) fn pdf_unchecked(&self, x: f64) -> f64 {
        (-(x - self.location).abs() / self.scale).exp() / (2.0 * self.scale)
    }

    /// Piecewise CDF: `½exp((x−z)/b)` below the location and
    /// `1 − ½exp(−(x−z)/b)` above it. A step at `z` when degenerate.
    pub fn cdf(&self, x: f64) -> f64 {
        let (b, z) = (self.scale, self.location);
        if self.is_degenerate() {
            return if x < z { 0.0 } else { 1.0 };
        }
        if x <= z {
            0.5 * ((x - z) / b).exp()
        } else {
            1.0 - 0.5 * (-(x - z) / b).exp()
        }
    }

    /// `1 − cdf(x)`, computed without cancellation in the upper tail.
    pub fn survival(&self, x: f64) -> f64 {
        let (b, z) = (self.scale, self.location);
        if self.is_degenerate() {
            return if x < z { 1.0 } else { 0.0 };
        }
        if x >= z {
            0.5 * (-(x - z) / b).exp()
        } else {
            1.0 - 0.5 * ((x - z) / b).exp()
        }
    }

    /// Inverse CDF on the open unit interval.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DpError::Domain(format!("quantile level {p} not in (0, 1)")));
        }
        if self.is_degenerate() {
            return Ok(self.location);
        }
        let (b, z) = (self.scale, self.location);
        Ok(if p <= 0.5 {
            z + b * (2.0 * p).ln()
        } else {
            z - b * (2.0 * (1.0 - p)).ln()
        })
    }

    /// Inverse-transform sample; returns the location when degenerate.
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        let u = rng.uniform_open();
        if self.is_degenerate() {
            return self.location;
        }
        self.quantile(u).expect("uniform_open is inside (0, 1)")
    }

    /// `P(lo < X ≤ hi)`.
    pub fn interval_prob(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo > hi {
            return Err(DpError::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        // use whichever tail keeps both terms small
        if !self.is_degenerate() && lo >= self.location {
            Ok(self.survival(lo) - self.survival(hi))
        } else {
            Ok(self.cdf(hi) - self.cdf(lo))
        }
    }

    /// `[z − 40b, z + 40b]`, the window outside which mass is negligible.
    pub fn effective_support(&self) -> (f64, f64) {
        let w = TAIL_SCALES * self.scale.max(0.0);
        (self.location - w, self.location + w)
    }
}

/// `x⃗ + Lap(b)^m`: one independent draw per coordinate, in order, from `rng`.
pub fn laplace_vector_sample(scale: f64, locations: &[f64], rng: &mut RandomSource) -> Vec<f64> {
    locations
        .iter()
        .map(|&z| Laplace::new(scale, z).sample(rng))
        .collect()
}

/// Compares `Lap(b, z)` against `z + Lap(b, 0)` through their CDFs on a grid
/// of `points` values spanning `[z − 20b, z + 20b]`. Returns the largest
/// absolute deviation.
pub fn shift_law_deviation(scale: f64, location: f64, points: usize) -> f64 {
    let shifted = Laplace::new(scale, location);
    let base = Laplace::centered(scale);
    let (lo, hi) = (location - 20.0 * scale, location + 20.0 * scale);
    let steps = points.max(2) - 1;
    (0..=steps)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / steps as f64;
            (shifted.cdf(x) - base.cdf(x - location)).abs()
        })
        .fold(0.0, f64::max)
}

/// `true` iff the shift law holds within `tolerance` on a 1000-point grid.
pub fn shift_law_check(scale: f64, location: f64, tolerance: f64) -> bool {
    shift_law_deviation(scale, location, 1000) <= tolerance
}

/// `exp(|x − y| / b)`: the worst-case pointwise density ratio between
/// `Lap(b, x)` and `Lap(b, y)`.
pub fn density_ratio_bound(scale: f64, x: f64, y: f64) -> f64 {
    ((x - y).abs() / scale).exp()
}
