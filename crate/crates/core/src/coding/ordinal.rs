//! Mapping of a continuous column onto an m-point ordinal scale whose
//! intervals have the width of the smallest gap between observed values.

use super::CodingError;
use serde::{Deserialize, Serialize};

/// Relative guard applied before taking integer parts, so that values lying
/// on an interval boundary up to rounding do not land one interval low.
pub const FLOOR_GUARD: f64 = 1e-9;

/// Parameters of the ordinal scale derived from one continuous column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrdinalScale {
    /// Column minimum.
    pub mu: f64,
    /// Column maximum.
    pub max: f64,
    /// Smallest gap between successive distinct observed values.
    pub d0: f64,
    /// Number of scale points.
    pub m: u64,
}

impl OrdinalScale {
    /// Builds the scale for a column. The scale size is the level of the
    /// maximum, `floor((M - mu) / d0) + 1`, so every distinct value gets its
    /// own level and `(M - mu)/m < d0 <= (M - mu)/(m - 1)` holds.
    pub fn fit(column: &[f64]) -> Result<Self, CodingError> {
        if column.is_empty() {
            return Err(CodingError::EmptyColumn);
        }
        if let Some(bad) = column.iter().find(|v| !v.is_finite()) {
            return Err(CodingError::NonFinite(*bad));
        }
        let mut sorted = column.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        if sorted.len() < 2 {
            return Err(CodingError::ConstantColumn);
        }
        let d0 = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let mu = sorted[0];
        let max = sorted[sorted.len() - 1];
        let mut scale = OrdinalScale { mu, max, d0, m: u64::MAX };
        scale.m = scale.raw_level(max);
        Ok(scale)
    }

    fn raw_level(&self, x: f64) -> u64 {
        let ratio = (x - self.mu) / self.d0;
        ((ratio * (1.0 + FLOOR_GUARD)).floor().max(0.0) as u64).saturating_add(1)
    }

    /// Level `T(x)` of a value, clamped to `1..=m`.
    pub fn level(&self, x: f64) -> u64 {
        self.raw_level(x).clamp(1, self.m)
    }

    /// Interval `[mu + (l-1) d0, mu + l d0)` of values mapped to level `l`.
    pub fn interval(&self, level: u64) -> Result<(f64, f64), CodingError> {
        if level == 0 || level > self.m {
            return Err(CodingError::LevelOutOfRange { level, m: self.m });
        }
        let lo = self.mu + (level - 1) as f64 * self.d0;
        let hi = self.mu + level as f64 * self.d0;
        Ok((lo, hi))
    }
}

/// Maps a continuous column onto its ordinal scale.
pub fn discretize(column: &[f64]) -> Result<(Vec<u64>, OrdinalScale), CodingError> {
    let scale = OrdinalScale::fit(column)?;
    let levels = column.iter().map(|&x| scale.level(x)).collect();
    Ok((levels, scale))
}

/// Inverse of [`discretize`] for one level: the thin interval holding every
/// original value mapped to `level`.
pub fn decode_ordinal(level: u64, scale: &OrdinalScale) -> Result<(f64, f64), CodingError> {
    scale.interval(level)
}
