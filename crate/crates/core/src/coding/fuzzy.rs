//! Alternative fuzzy codings used as comparison baselines: triangular
//! membership functions on three hinges, and the bipolar doubling of a
//! standardized variable.

use super::CodingError;

/// Memberships of `x` under triangular functions peaking at each hinge.
pub fn triangular_tuple(x: f64, hinges: (f64, f64, f64)) -> Result<[f64; 3], CodingError> {
    let (h1, h2, h3) = hinges;
    if !(h1 < h2 && h2 < h3) {
        return Err(CodingError::DegenerateHinges { hinges });
    }
    if !(h1..=h3).contains(&x) {
        return Err(CodingError::OutOfHingeRange { x, hinges });
    }
    Ok(if x <= h2 {
        let right = (x - h1) / (h2 - h1);
        [1.0 - right, right, 0.0]
    } else {
        let right = (x - h2) / (h3 - h2);
        [0.0, 1.0 - right, right]
    })
}

/// Minimum, median and maximum of a column.
pub fn default_hinges(column: &[f64]) -> Result<(f64, f64, f64), CodingError> {
    if column.is_empty() {
        return Err(CodingError::EmptyColumn);
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let hinges = (sorted[0], median, sorted[n - 1]);
    if !(hinges.0 < hinges.1 && hinges.1 < hinges.2) {
        return Err(CodingError::DegenerateHinges { hinges });
    }
    Ok(hinges)
}

/// Bipolar pair `((1 + z)/2, (1 - z)/2)` of a standardized value.
pub fn escofier_values(z: f64) -> [f64; 2] {
    [(1.0 + z) / 2.0, (1.0 - z) / 2.0]
}

/// Sample mean and standard deviation (n - 1 denominator).
pub fn mean_sd(column: &[f64]) -> Result<(f64, f64), CodingError> {
    if column.len() < 2 {
        return Err(if column.is_empty() {
            CodingError::EmptyColumn
        } else {
            CodingError::ConstantColumn
        });
    }
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 || !var.is_finite() {
        return Err(CodingError::ConstantColumn);
    }
    Ok((mean, var.sqrt()))
}

/// Standardizes the column and doubles it into `(y+, y-)` rows. Entries are
/// negative whenever `|z| > 1`.
pub fn escofier_pair(column: &[f64]) -> Result<Vec<[f64; 2]>, CodingError> {
    let (mean, sd) = mean_sd(column)?;
    Ok(column.iter().map(|x| escofier_values((x - mean) / sd)).collect())
}
