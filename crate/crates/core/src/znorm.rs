//! Z-normalization: `(x - mean) / std` with the population standard deviation.

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ZNormedSeries {
    pub values: Vec<f64>,
    pub source_index: usize,
}

/// Population mean and standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Rescales `series` to zero mean and unit population standard deviation.
/// A constant series maps to all zeros.
pub fn z_normalize(series: &[f64]) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::SeriesTooShort { len: 0, min: 1 });
    }
    ensure_finite(series)?;
    let (mean, std) = mean_std(series);
    if std == 0.0 {
        return Ok(vec![0.0; series.len()]);
    }
    Ok(series.iter().map(|v| (v - mean) / std).collect())
}

/// [`z_normalize`] tagged with the index of the source series.
pub fn z_normalize_indexed(series: &[f64], source_index: usize) -> Result<ZNormedSeries> {
    Ok(ZNormedSeries {
        values: z_normalize(series)?,
        source_index,
    })
}
