//! Shrinkage operators: scalar soft threshold, row-group threshold and the
//! per-entry batch variant.

use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{Error, Result};

fn check_eta(eta: f64) -> Result<()> {
    if eta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("threshold must be nonnegative, got {eta}")))
    }
}

/// sign(x)·max(|x| − eta, 0) for a single value. Caller guarantees eta ≥ 0.
#[inline]
pub fn shrink(x: f64, eta: f64) -> f64 {
    if x > eta {
        x - eta
    } else if x < -eta {
        x + eta
    } else {
        0.0
    }
}

pub fn soft_threshold_scalar(x: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(shrink(x, eta))
}

/// Elementwise soft threshold with a common threshold.
pub fn soft_threshold(m: &ArrayView2<f64>, eta: f64) -> Result<Array2<f64>> {
    check_eta(eta)?;
    Ok(m.mapv(|x| shrink(x, eta)))
}

/// Shrinks each row toward the origin by its own threshold in ℓ₂ norm.
/// Zero rows stay zero.
pub fn soft_threshold_rows(m: &ArrayView2<f64>, eta: &[f64]) -> Result<Array2<f64>> {
    if eta.len() != m.nrows() {
        return Err(Error::dims("soft_threshold_rows", m.nrows(), eta.len()));
    }
    if let Some(&bad) = eta.iter().find(|&&e| !(e >= 0.0)) {
        return Err(Error::InvalidInput(format!("row threshold must be nonnegative, got {bad}")));
    }
    let mut out = m.to_owned();
    for (mut row, &e) in out.rows_mut().into_iter().zip(eta) {
        let norm = row.dot(&row).sqrt();
        let factor = if norm > e { (norm - e) / norm } else { 0.0 };
        row.mapv_inplace(|v| v * factor);
    }
    Ok(out)
}

/// Elementwise soft threshold with per-entry thresholds `delta`.
pub fn batch_threshold(m: &ArrayView2<f64>, delta: &ArrayView2<f64>) -> Result<Array2<f64>> {
    if m.dim() != delta.dim() {
        return Err(Error::dims(
            "batch_threshold",
            format!("{:?}", m.dim()),
            format!("{:?}", delta.dim()),
        ));
    }
    if let Some(&bad) = delta.iter().find(|&&e| !(e >= 0.0)) {
        return Err(Error::InvalidInput(format!("threshold must be nonnegative, got {bad}")));
    }
    Ok(Zip::from(m).and(delta).map_collect(|&x, &e| shrink(x, e)))
}

/// Per-row threshold broadcast across columns, the same result as
/// `batch_threshold` with a row-replicated threshold matrix.
pub(crate) fn shrink_by_row(m: &ArrayView2<f64>, eta: &[f64]) -> Array2<f64> {
    let mut out = m.to_owned();
    for (mut row, &e) in out.rows_mut().into_iter().zip(eta) {
        row.mapv_inplace(|x| shrink(x, e));
    }
    out
}
