//! Exhaustive grid tuning with a chronological validation split.
//!
//! The last `val_fraction` of the rows (which callers keep in date order)
//! form the validation set; every grid point is fitted on the head and
//! scored by validation RMSE; ties go to the earlier grid point.

use super::{fit_model_with_seed, ModelError, ModelSpec};
use crate::math;
use crate::matrix::DenseMatrix;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub best_index: usize,
    pub best: ModelSpec,
    pub val_rmse: f64,
}

/// Picks the grid point with the lowest validation RMSE. Validation fits
/// use seeds derived from `seed`, so the outcome is a pure function of
/// `(grid, x, y, val_fraction, seed)`.
pub fn tune(
    grid: &[ModelSpec],
    x: &DenseMatrix,
    y: &[f64],
    val_fraction: f64,
    seed: u64,
) -> Result<TuneOutcome, ModelError> {
    if grid.is_empty() {
        return Err(ModelError::Config("tuning grid is empty"));
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(ModelError::Config("val_fraction must be in (0, 1)"));
    }
    if x.rows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            rows: x.rows(),
            targets: y.len(),
        });
    }
    let n = x.rows();
    if n < 2 {
        return Err(ModelError::TooFewRows { rows: n, needed: 2 });
    }
    let n_val = ((n as f64 * val_fraction) as usize).clamp(1, n - 1);
    let n_fit = n - n_val;

    let fit_rows: Vec<usize> = (0..n_fit).collect();
    let x_fit = x.select_rows(&fit_rows);
    let y_fit = &y[..n_fit];

    let mut best: Option<(usize, f64)> = None;
    for (i, spec) in grid.iter().enumerate() {
        let model = fit_model_with_seed(spec, &x_fit, y_fit, math::mix_seed(seed, "tune", i as u64))?;
        let mut sq = 0.0;
        for row in n_fit..n {
            let err = model.predict_row(x.row(row)) - y[row];
            sq += err * err;
        }
        let rmse = math::sqrt(sq / n_val as f64);
        if best.map_or(true, |(_, b)| rmse < b) {
            best = Some((i, rmse));
        }
    }
    let (best_index, val_rmse) = best.expect("grid is non-empty");
    Ok(TuneOutcome {
        best_index,
        best: grid[best_index].clone(),
        val_rmse,
    })
}
