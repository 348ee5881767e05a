//! Summary statistics for experiment tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (divisor `n - 1`); zero for fewer than two
/// values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Quantile of sorted data by linear interpolation between closest ranks:
/// position `h = (n - 1) q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `(Q1, Q2, Q3)`.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    (
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
    )
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub optima_count: usize,
    pub best: f64,
    pub mean: f64,
    pub sd: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// Summarizes `values`; a value counts as an optimum when it reaches
/// `optimum` (if any) within `1e-9`.
pub fn summarize(values: &[f64], optimum: Option<f64>) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let (q1, q2, q3) = quartiles(values);
    Ok(Summary {
        optima_count: optimum.map_or(0, |o| values.iter().filter(|&&v| v >= o - 1e-9).count()),
        best: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        mean: mean(values),
        sd: sample_sd(values),
        q1,
        q2,
        q3,
    })
}
