//! Barycentric coding of an m-point ordinal scale into n fuzzy categories.
//!
//! The range `(1/2, m + 1/2)` is cut into `n` equal intervals with bounds
//! `B_i = 1/2 + i m/n` and midpoints `A_i`. A unit mass placed at level `l`
//! is split between the two bounds of the interval holding `l` so that `l`
//! is their center of gravity. Each bound mass then travels outward one
//! interval at a time: two thirds of it settle on the midpoint of the
//! interval it crosses and one third moves on to the next bound, until the
//! outermost bound hands its remainder to the first or last category.
//!
//! A level sitting exactly on an inner bound `B_b` is split in halves
//! between `B_{b-1}` and `B_{b+1}`, which keeps the code symmetric under
//! `l -> m + 1 - l`.
//!
//! Positions are located with integer arithmetic (`l` against `B_i` is the
//! comparison of `(2l - 1) n` with `2 i m`), so boundary cases are exact
//! even when `m/n` has no finite binary expansion.

use super::CodingError;

/// Maximum absolute element-wise deviation accepted by [`decode_tuple`].
pub const EXACT_DECODE_TOLERANCE: f64 = 1e-9;

/// Largest scale on which [`decode_values`] falls back to a full scan.
const SCAN_LIMIT: u64 = 1 << 22;

/// Fuzzy memberships of one ordinal level.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricTuple {
    values: Vec<f64>,
    level: u64,
    scale_points: u64,
}

impl BarycentricTuple {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn width(&self) -> usize {
        self.values.len()
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn scale_points(&self) -> u64 {
        self.scale_points
    }
}

/// Where a level falls relative to the interval bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Position {
    /// Strictly inside interval `interval` (0-based), with the unit mass
    /// split as `left` at its lower bound and `right` at its upper bound.
    Inside { interval: usize, left: f64, right: f64 },
    /// Exactly on inner bound `B_bound`, `1 <= bound <= n - 1`.
    OnBound(usize),
}

fn locate(level: u64, m: u64, n: usize) -> Position {
    let q = (2 * level as u128 - 1) * n as u128;
    let d = 2 * m as u128;
    let index = (q / d) as usize;
    let r = q % d;
    if r == 0 {
        Position::OnBound(index)
    } else {
        Position::Inside {
            interval: index,
            left: (d - r) as f64 / d as f64,
            right: r as f64 / d as f64,
        }
    }
}

/// Mass entering interval `start` through its lower bound, moving down.
fn spread_down(values: &mut [f64], start: usize, mass: f64) {
    let mut carry = mass;
    for j in (1..=start).rev() {
        let passed = carry / 3.0;
        values[j] += carry - passed;
        carry = passed;
    }
    values[0] += carry;
}

/// Mass entering interval `start` through its upper bound, moving up.
fn spread_up(values: &mut [f64], start: usize, mass: f64) {
    let last = values.len() - 1;
    let mut carry = mass;
    for v in &mut values[start..last] {
        let passed = carry / 3.0;
        *v += carry - passed;
        carry = passed;
    }
    values[last] += carry;
}

fn check(level: u64, m: u64, n: usize) -> Result<(), CodingError> {
    if n < 2 {
        return Err(CodingError::BadTupleWidth(n));
    }
    if m == 0 || level == 0 || level > m {
        return Err(CodingError::LevelOutOfRange { level, m });
    }
    Ok(())
}

/// Writes the tuple of `level` into `out` (whose length is the width n).
pub(crate) fn fill_tuple(level: u64, m: u64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    match locate(level, m, out.len()) {
        Position::Inside { interval, left, right } => {
            spread_down(out, interval, left);
            spread_up(out, interval, right);
            if interval > 0 && interval + 1 < out.len() {
                // both bound masses leave two thirds here; avoid the rounding of the sum
                out[interval] = 2.0 / 3.0;
            }
        }
        Position::OnBound(bound) => {
            spread_down(out, bound - 1, 0.5);
            spread_up(out, bound, 0.5);
        }
    }
}

/// Codes level `level` of an `m`-point scale as an `n`-tuple.
pub fn barycentric_tuple(level: u64, m: u64, n: usize) -> Result<BarycentricTuple, CodingError> {
    check(level, m, n)?;
    let mut values = vec![0.0; n];
    fill_tuple(level, m, &mut values);
    Ok(BarycentricTuple {
        values,
        level,
        scale_points: m,
    })
}

/// Recovers the level of a tuple produced by [`barycentric_tuple`].
pub fn decode_tuple(tuple: &BarycentricTuple) -> Result<u64, CodingError> {
    decode_values(tuple.values(), tuple.scale_points(), EXACT_DECODE_TOLERANCE)
}

fn max_deviation(values: &[f64], level: u64, m: u64, buf: &mut [f64]) -> f64 {
    fill_tuple(level, m, buf);
    values
        .iter()
        .zip(buf.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Recovers the level whose tuple matches `values` within `tolerance`
/// (maximum absolute deviation per element). Useful for rounded tuples,
/// e.g. ones printed to three decimals.
///
/// The dominant element is inverted first: the first or last element for
/// levels in the outer intervals, or the neighbour of the central `2/3`
/// element for middle intervals. If no inverted candidate fits, the whole
/// scale is searched for the nearest tuple.
pub fn decode_values(values: &[f64], m: u64, tolerance: f64) -> Result<u64, CodingError> {
    let n = values.len();
    check(1, m, n)?;
    let mut buf = vec![0.0; n];
    let width = m as f64 / n as f64;
    let mut candidates: Vec<f64> = Vec::with_capacity(3);
    // first interval: y_1 = 1 - (l - 1/2)(n/m)/3
    candidates.push(0.5 + 3.0 * (1.0 - values[0]) * width);
    // last interval, mirrored
    candidates.push(m as f64 + 0.5 - 3.0 * (1.0 - values[n - 1]) * width);
    // middle interval p: y_p = 2/3, upper-bound mass recovered from y_{p+1}
    if let Some((p, _)) = values
        .iter()
        .enumerate()
        .take(n - 1)
        .skip(1)
        .find(|(_, &v)| (v - 2.0 / 3.0).abs() <= tolerance.max(1e-12))
    {
        let right = if p + 1 == n - 1 {
            3.0 * values[n - 1]
        } else {
            4.5 * values[p + 1]
        };
        candidates.push(0.5 + (p as f64 + right) * width);
    }

    let mut best: Option<(u64, f64)> = None;
    let consider = |level: u64, buf: &mut [f64], best: &mut Option<(u64, f64)>| {
        let dev = max_deviation(values, level, m, buf);
        if best.is_none_or(|(_, d)| dev < d) {
            *best = Some((level, dev));
        }
    };
    for c in candidates {
        if !c.is_finite() {
            continue;
        }
        let center = c.round().clamp(1.0, m as f64) as u64;
        for level in center.saturating_sub(1).max(1)..=(center + 1).min(m) {
            consider(level, &mut buf, &mut best);
        }
    }
    if best.is_none_or(|(_, d)| d > tolerance) && m <= SCAN_LIMIT {
        for level in 1..=m {
            consider(level, &mut buf, &mut best);
        }
    }
    match best {
        Some((level, dev)) if dev <= tolerance => Ok(level),
        _ => Err(CodingError::NoPreimage),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn table_one_rows() {
        let t = barycentric_tuple(3, 57, 3).unwrap();
        approx(t.values(), &[0.956, 0.029, 0.015], 5e-4);
        let t = barycentric_tuple(17, 57, 5).unwrap();
        approx(t.values(), &[0.184, 0.667, 0.099, 0.033, 0.017], 5e-4);
        assert_eq!(t.values()[1], 2.0 / 3.0);
        let t = barycentric_tuple(1, 57, 3).unwrap();
        approx(t.values(), &[0.991, 0.006, 0.003], 5e-4);
    }

    #[test]
    fn five_point_center() {
        let t = barycentric_tuple(3, 5, 5).unwrap();
        approx(
            t.values(),
            &[1.0 / 18.0, 1.0 / 9.0, 2.0 / 3.0, 1.0 / 9.0, 1.0 / 18.0],
            1e-15,
        );
    }

    #[test]
    fn first_interval_closed_form() {
        // y_1 = 1 + (1/2 - l) n / (3m), y_i = 2 (l - 1/2) n / (3^i m), y_n = (l - 1/2) n / (3^(n-1) m)
        let (l, m, n) = (4u64, 40u64, 4usize);
        let s = (l as f64 - 0.5) * n as f64 / m as f64;
        let expect = [1.0 - s / 3.0, 2.0 * s / 9.0, 2.0 * s / 27.0, s / 27.0];
        approx(barycentric_tuple(l, m, n).unwrap().values(), &expect, 1e-15);
    }

    #[test]
    fn bound_hits_split_in_halves() {
        // m = 2, n = 4: bounds at 0.5, 1, 1.5, 2, 2.5
        let t = barycentric_tuple(1, 2, 4).unwrap();
        approx(t.values(), &[0.5, 1.0 / 3.0, 1.0 / 9.0, 1.0 / 18.0], 1e-15);
        let t = barycentric_tuple(2, 2, 4).unwrap();
        approx(t.values(), &[1.0 / 18.0, 1.0 / 9.0, 1.0 / 3.0, 0.5], 1e-15);
        let t = barycentric_tuple(1, 1, 2).unwrap();
        approx(t.values(), &[0.5, 0.5], 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            barycentric_tuple(0, 5, 3).unwrap_err(),
            CodingError::LevelOutOfRange { level: 0, m: 5 }
        );
        assert_eq!(
            barycentric_tuple(6, 5, 3).unwrap_err(),
            CodingError::LevelOutOfRange { level: 6, m: 5 }
        );
        assert_eq!(barycentric_tuple(1, 5, 1).unwrap_err(), CodingError::BadTupleWidth(1));
        assert_eq!(
            decode_values(&[0.3, 0.3, 0.4], 57, 1e-6).unwrap_err(),
            CodingError::NoPreimage
        );
    }

    #[test]
    fn decodes_rounded_table_values() {
        assert_eq!(decode_values(&[0.956, 0.029, 0.015], 57, 5e-4), Ok(3));
        assert_eq!(
            decode_values(&[0.184, 0.667, 0.099, 0.033, 0.017], 57, 5e-4),
            Ok(17)
        );
    }

    #[test]
    fn round_trip_small_scales() {
        for n in [2usize, 3, 4, 5, 6, 7] {
            for m in 1..=60u64 {
                for l in 1..=m {
                    let t = barycentric_tuple(l, m, n).unwrap();
                    assert_eq!(decode_tuple(&t), Ok(l), "l={l} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn huge_scales_are_not_materialized() {
        let m = 5_000_000_000_000u64;
        let t = barycentric_tuple(m / 3, m, 4).unwrap();
        assert!((t.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(decode_tuple(&t), Ok(m / 3));
    }
}
