//! Error metrics and the score-rate evaluation mechanism.
//!
//! Given a model-by-sub-experiment error table, each model earns two
//! per-sub score rates:
//!
//!   vs the analytic baseline: (E_BS - e) / E_BS * 100
//!   vs the worst learner:     (E    - e) / E    * 100
//!
//! where `e` is the model's own error, `E_BS` is the designated baseline
//! row's error in that sub-experiment, and `E` is the largest error among
//! the non-excluded (non-analytic) models. Reports are the weight-normalized
//! mean of the per-sub rates; the first rate goes negative exactly when the
//! model is worse than the baseline.

use crate::math;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("reference error must be positive, got {value}")]
    NonPositiveReference { value: f64 },
    #[error("negative error cell for model `{model}`, sub `{sub}`")]
    NegativeError { model: String, sub: String },
    #[error("missing cell for model `{model}`, sub `{sub}`")]
    MissingCell { model: String, sub: String },
    #[error("baseline row `{0}` not present in table")]
    MissingBaselineRow(String),
    #[error("weights do not match sub-experiments: {0}")]
    WeightMismatch(String),
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: &'static str, name: String },
}

/// Root mean squared error.
pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    Ok(math::sqrt(mse(pred, actual)?))
}

/// Mean squared error.
pub fn mse(pred: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    if pred.len() != actual.len() {
        return Err(EvalError::LengthMismatch {
            left: pred.len(),
            right: actual.len(),
        });
    }
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    let sum: f64 = pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Score rate against the analytic baseline: `(E_BS - e) / E_BS * 100`.
pub fn score_rate_bs(e: f64, e_bs: f64) -> Result<f64, EvalError> {
    if !(e_bs > 0.0) {
        return Err(EvalError::NonPositiveReference { value: e_bs });
    }
    Ok((e_bs - e) / e_bs * 100.0)
}

/// Score rate against the worst learner: `(E - e) / E * 100`.
pub fn score_rate_ml(e: f64, e_max: f64) -> Result<f64, EvalError> {
    if !(e_max > 0.0) {
        return Err(EvalError::NonPositiveReference { value: e_max });
    }
    Ok((e_max - e) / e_max * 100.0)
}

/// Relative MSE change when swapping training sets:
/// `(mse_denoised - mse_original) / mse_original * 100`.
pub fn error_increase_pct(mse_original: f64, mse_denoised: f64) -> Result<f64, EvalError> {
    if !(mse_original > 0.0) {
        return Err(EvalError::NonPositiveReference {
            value: mse_original,
        });
    }
    Ok((mse_denoised - mse_original) / mse_original * 100.0)
}

/// Per-sub-experiment weights, keyed like the table's sub-experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    entries: Vec<(String, f64)>,
}

impl WeightVector {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self, EvalError> {
        for (name, w) in &entries {
            if !(*w > 0.0) {
                return Err(EvalError::WeightMismatch(alloc::format!(
                    "weight for `{name}` must be positive, got {w}"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Weight 1 for every listed sub-experiment.
    pub fn equal(subs: &[String]) -> Self {
        Self {
            entries: subs.iter().map(|s| (s.clone(), 1.0)).collect(),
        }
    }

    pub fn get(&self, sub: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(name, _)| name == sub)
            .map(|(_, w)| *w)
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }
}

/// Weight-normalized mean of per-sub rates: `sum(w_s r_s) / sum(w_s)`.
/// `rates` must align with the weight entries.
pub fn weighted_score(rates: &[f64], weights: &WeightVector) -> Result<f64, EvalError> {
    if rates.len() != weights.entries.len() {
        return Err(EvalError::LengthMismatch {
            left: rates.len(),
            right: weights.entries.len(),
        });
    }
    if rates.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (rate, (_, w)) in rates.iter().zip(&weights.entries) {
        num += w * rate;
        den += w;
    }
    Ok(num / den)
}

/// Model-by-sub-experiment error table with an optional designated analytic
/// baseline row and the set of rows excluded from the worst-learner maximum.
/// Scoring requires the baseline row; plain result tables (window, noise)
/// can omit it.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    models: Vec<String>,
    subs: Vec<String>,
    /// Row-major `[model][sub]`.
    errors: Vec<f64>,
    bs_row: Option<String>,
    excluded_from_ml_max: Vec<String>,
}

impl ErrorTable {
    /// Builds a complete table. `cells` is row-major `[model][sub]`; every
    /// cell must be present and nonnegative, and a designated baseline row
    /// must be one of the models.
    pub fn new(
        models: Vec<String>,
        subs: Vec<String>,
        cells: Vec<f64>,
        bs_row: Option<&str>,
        excluded_from_ml_max: Vec<String>,
    ) -> Result<Self, EvalError> {
        if models.is_empty() || subs.is_empty() {
            return Err(EvalError::Empty);
        }
        for (i, m) in models.iter().enumerate() {
            if models[..i].contains(m) {
                return Err(EvalError::Duplicate {
                    what: "model",
                    name: m.clone(),
                });
            }
        }
        for (i, s) in subs.iter().enumerate() {
            if subs[..i].contains(s) {
                return Err(EvalError::Duplicate {
                    what: "sub-experiment",
                    name: s.clone(),
                });
            }
        }
        if cells.len() != models.len() * subs.len() {
            return Err(EvalError::LengthMismatch {
                left: cells.len(),
                right: models.len() * subs.len(),
            });
        }
        for (idx, &v) in cells.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(EvalError::NegativeError {
                    model: models[idx / subs.len()].clone(),
                    sub: subs[idx % subs.len()].clone(),
                });
            }
        }
        if let Some(bs) = bs_row {
            if !models.iter().any(|m| m == bs) {
                return Err(EvalError::MissingBaselineRow(bs.to_string()));
            }
        }
        Ok(Self {
            models,
            subs,
            errors: cells,
            bs_row: bs_row.map(String::from),
            excluded_from_ml_max,
        })
    }

    /// The conventional exclusion set for the worst-learner maximum: both
    /// analytic baselines.
    pub fn default_exclusions() -> Vec<String> {
        alloc::vec!["BS".to_string(), "BSM".to_string()]
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn subs(&self) -> &[String] {
        &self.subs
    }

    pub fn bs_row(&self) -> Option<&str> {
        self.bs_row.as_deref()
    }

    pub fn excluded(&self) -> &[String] {
        &self.excluded_from_ml_max
    }

    pub fn get(&self, model: &str, sub: &str) -> Result<f64, EvalError> {
        let mi = self
            .models
            .iter()
            .position(|m| m == model)
            .ok_or_else(|| EvalError::MissingCell {
                model: model.to_string(),
                sub: sub.to_string(),
            })?;
        let si = self
            .subs
            .iter()
            .position(|s| s == sub)
            .ok_or_else(|| EvalError::MissingCell {
                model: model.to_string(),
                sub: sub.to_string(),
            })?;
        Ok(self.errors[mi * self.subs.len() + si])
    }

    fn is_excluded(&self, model: &str) -> bool {
        self.excluded_from_ml_max.iter().any(|m| m == model)
    }

    /// Largest error in `sub` among models outside the exclusion set.
    pub fn worst_learner_error(&self, sub: &str) -> Result<f64, EvalError> {
        let si = self
            .subs
            .iter()
            .position(|s| s == sub)
            .ok_or_else(|| EvalError::MissingCell {
                model: "*".to_string(),
                sub: sub.to_string(),
            })?;
        let mut max: Option<f64> = None;
        for (mi, model) in self.models.iter().enumerate() {
            if self.is_excluded(model) {
                continue;
            }
            let v = self.errors[mi * self.subs.len() + si];
            if max.map_or(true, |m| v > m) {
                max = Some(v);
            }
        }
        max.ok_or(EvalError::Empty)
    }
}

/// One model's weighted score rates under both references.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreEntry {
    pub model: String,
    pub score_bs: f64,
    pub score_ml: f64,
}

/// Weighted score rates for every scored (non-baseline, non-excluded)
/// model, in table order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub entries: Vec<ScoreEntry>,
}

impl ScoreReport {
    pub fn get(&self, model: &str) -> Option<&ScoreEntry> {
        self.entries.iter().find(|e| e.model == model)
    }
}

/// Scores every non-excluded model in the table: per-sub rates against the
/// baseline row and against the worst learner, each aggregated by
/// `weighted_score`.
pub fn score_table(table: &ErrorTable, weights: &WeightVector) -> Result<ScoreReport, EvalError> {
    // Weights must cover exactly the table's sub-experiments, in order.
    if weights.entries.len() != table.subs.len()
        || weights
            .entries
            .iter()
            .zip(&table.subs)
            .any(|((name, _), sub)| name != sub)
    {
        return Err(EvalError::WeightMismatch(alloc::format!(
            "expected subs {:?}",
            table.subs
        )));
    }

    let bs_row = table
        .bs_row()
        .ok_or_else(|| EvalError::MissingBaselineRow(String::from("<none designated>")))?;
    let mut bs_refs = Vec::with_capacity(table.subs.len());
    let mut ml_refs = Vec::with_capacity(table.subs.len());
    for sub in &table.subs {
        bs_refs.push(table.get(bs_row, sub)?);
        ml_refs.push(table.worst_learner_error(sub)?);
    }

    let mut entries = Vec::new();
    for model in &table.models {
        if model == bs_row || table.is_excluded(model) {
            continue;
        }
        let mut rates_bs = Vec::with_capacity(table.subs.len());
        let mut rates_ml = Vec::with_capacity(table.subs.len());
        for (si, sub) in table.subs.iter().enumerate() {
            let own = table.get(model, sub)?;
            rates_bs.push(score_rate_bs(own, bs_refs[si])?);
            rates_ml.push(score_rate_ml(own, ml_refs[si])?);
        }
        entries.push(ScoreEntry {
            model: model.clone(),
            score_bs: weighted_score(&rates_bs, weights)?,
            score_ml: weighted_score(&rates_ml, weights)?,
        });
    }
    Ok(ScoreReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rmse_and_mse_basics() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        // Residuals [3, 4, 0, 0] -> sqrt(25/4) = 2.5.
        let pred = [3.0, 4.0, 0.0, 0.0];
        let actual = [0.0, 0.0, 0.0, 0.0];
        assert!((rmse(&pred, &actual).unwrap() - 2.5).abs() < 1e-15);
        // Residuals [1, 1] -> MSE 1.
        assert!((mse(&[2.0, 3.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn rmse_squared_is_mse() {
        let pred = [0.3, -1.2, 4.5, 2.2, 9.1];
        let actual = [0.1, -0.9, 5.0, 2.0, 8.4];
        let r = rmse(&pred, &actual).unwrap();
        let m = mse(&pred, &actual).unwrap();
        assert!((r * r - m).abs() < 1e-12);
    }

    #[test]
    fn score_rate_bs_examples() {
        assert_eq!(score_rate_bs(0.1270, 0.1270).unwrap(), 0.0);
        // Frozen from direct evaluation of the formula.
        assert!((score_rate_bs(0.0859, 0.1270).unwrap() - 32.362_204_724_409_45).abs() < 1e-10);
        assert!((score_rate_bs(0.1427, 0.1270).unwrap() + 12.362_204_724_409_448).abs() < 1e-10);
        assert!(score_rate_bs(0.1, 0.0).is_err());
    }

    #[test]
    fn score_rate_ml_examples() {
        assert_eq!(score_rate_ml(0.1221, 0.1221).unwrap(), 0.0);
        assert!((score_rate_ml(0.0859, 0.1221).unwrap() - 29.647_829_647_829_65).abs() < 1e-10);
        assert_eq!(score_rate_ml(0.0, 0.5).unwrap(), 100.0);
        assert!(score_rate_ml(0.1, 0.0).is_err());
    }

    #[test]
    fn error_increase_examples() {
        assert!((error_increase_pct(0.00826, 0.04214).unwrap() - 410.169_491_525_423_7).abs()
            < 1e-9);
        assert!((error_increase_pct(0.02457, 0.00821).unwrap() + 66.585_266_585_266_58).abs()
            < 1e-9);
        assert_eq!(error_increase_pct(0.5, 0.5).unwrap(), 0.0);
        assert!(error_increase_pct(0.0, 1.0).is_err());
    }

    #[test]
    fn weighted_score_constant_rates() {
        let w = WeightVector::new(vec![("a".to_string(), 1.0), ("b".to_string(), 3.0)]).unwrap();
        assert!((weighted_score(&[7.0, 7.0], &w).unwrap() - 7.0).abs() < 1e-12);
        assert!(weighted_score(&[1.0], &w).is_err());
    }

    #[test]
    fn single_model_table_scores_zero() {
        // One learner whose error equals the baseline's: both rates are 0.
        let table = ErrorTable::new(
            names(&["BS", "M"]),
            names(&["only"]),
            vec![0.2, 0.2],
            Some("BS"),
            names(&["BS"]),
        )
        .unwrap();
        let w = WeightVector::equal(table.subs());
        let report = score_table(&table, &w).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].score_bs, 0.0);
        assert_eq!(report.entries[0].score_ml, 0.0);
    }

    #[test]
    fn scale_invariance_of_rates() {
        let table = ErrorTable::new(
            names(&["BS", "A", "B"]),
            names(&["s1", "s2"]),
            vec![0.10, 0.20, 0.05, 0.16, 0.08, 0.04],
            Some("BS"),
            names(&["BS"]),
        )
        .unwrap();
        let scaled = ErrorTable::new(
            names(&["BS", "A", "B"]),
            names(&["s1", "s2"]),
            // s1 column scaled by 3.
            vec![0.30, 0.20, 0.15, 0.16, 0.24, 0.04],
            Some("BS"),
            names(&["BS"]),
        )
        .unwrap();
        let w = WeightVector::equal(table.subs());
        assert_eq!(
            score_table(&table, &w).unwrap(),
            score_table(&scaled, &w).unwrap()
        );
    }

    #[test]
    fn missing_baseline_row_rejected() {
        assert!(matches!(
            ErrorTable::new(names(&["A"]), names(&["s"]), vec![0.1], Some("BS"), vec![]),
            Err(EvalError::MissingBaselineRow(_))
        ));
    }

    #[test]
    fn weights_must_match_subs() {
        let table = ErrorTable::new(
            names(&["BS", "A"]),
            names(&["s1", "s2"]),
            vec![0.1, 0.1, 0.05, 0.2],
            Some("BS"),
            names(&["BS"]),
        )
        .unwrap();
        let wrong = WeightVector::new(vec![("s1".to_string(), 1.0)]).unwrap();
        assert!(score_table(&table, &wrong).is_err());
    }
}
