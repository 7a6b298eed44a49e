//! Design-matrix assembly for the named input configurations and the
//! sliding-window lag transform.
//!
//! The six `In1..In6` configurations pair raw (S, K) inputs against the
//! moneyness ratio S/K, progressively adding the GARCH sigma and delta;
//! `STANDARD` is the five-feature set (S/K, tau, r, sigma, q) shared by the
//! non-input experiments. The sliding window groups rows by contract,
//! orders them by trade date, and appends every base feature at lags
//! `1..=W`, dropping rows without enough history.

use crate::dataset::OptionRecord;
use crate::matrix::DenseMatrix;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::NaiveDate;
use thiserror::Error;

/// One column of the design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Spot,
    Strike,
    Moneyness,
    Tau,
    Rate,
    Sigma,
    Delta,
    DividendMonthly,
}

impl Feature {
    pub fn name(&self) -> &'static str {
        match self {
            Feature::Spot => "S",
            Feature::Strike => "K",
            Feature::Moneyness => "S/K",
            Feature::Tau => "tau",
            Feature::Rate => "r",
            Feature::Sigma => "sigma",
            Feature::Delta => "delta",
            Feature::DividendMonthly => "q",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Some(match name {
            "S" => Feature::Spot,
            "K" => Feature::Strike,
            "S/K" => Feature::Moneyness,
            "tau" => Feature::Tau,
            "r" => Feature::Rate,
            "sigma" => Feature::Sigma,
            "delta" => Feature::Delta,
            "q" => Feature::DividendMonthly,
            _ => return None,
        })
    }

    fn value(&self, rec: &OptionRecord) -> f64 {
        match self {
            Feature::Spot => rec.spot,
            Feature::Strike => rec.strike,
            Feature::Moneyness => rec.spot / rec.strike,
            Feature::Tau => rec.tau,
            Feature::Rate => rec.rate,
            Feature::Sigma => rec.sigma,
            Feature::Delta => rec.delta,
            Feature::DividendMonthly => rec.q_monthly,
        }
    }
}

/// The named feature sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputSet {
    In1,
    In2,
    In3,
    In4,
    In5,
    In6,
    Standard,
}

impl InputSet {
    pub const ALL_INPUT_EXPERIMENT: [InputSet; 6] = [
        InputSet::In1,
        InputSet::In2,
        InputSet::In3,
        InputSet::In4,
        InputSet::In5,
        InputSet::In6,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InputSet::In1 => "In1",
            InputSet::In2 => "In2",
            InputSet::In3 => "In3",
            InputSet::In4 => "In4",
            InputSet::In5 => "In5",
            InputSet::In6 => "In6",
            InputSet::Standard => "STANDARD",
        }
    }

    pub fn features(&self) -> &'static [Feature] {
        use Feature::*;
        match self {
            InputSet::In1 => &[Spot, Strike, Tau, Rate],
            InputSet::In2 => &[Moneyness, Tau, Rate],
            InputSet::In3 => &[Spot, Strike, Tau, Rate, Sigma],
            InputSet::In4 => &[Moneyness, Tau, Rate, Sigma],
            InputSet::In5 => &[Spot, Strike, Tau, Rate, Sigma, Delta],
            InputSet::In6 => &[Moneyness, Tau, Rate, Sigma, Delta],
            InputSet::Standard => &[Moneyness, Tau, Rate, Sigma, DividendMonthly],
        }
    }
}

/// A named, ordered column list.
#[derive(Debug, Clone, PartialEq)]
pub struct InputConfig {
    pub name: String,
    pub columns: Vec<Feature>,
}

impl InputConfig {
    pub fn named(set: InputSet) -> Self {
        Self {
            name: set.name().to_string(),
            columns: set.features().to_vec(),
        }
    }

    /// Builds a config from feature names; unknown names are rejected.
    pub fn from_names(name: &str, columns: &[&str]) -> Result<Self, FeatureError> {
        let mut cols = Vec::with_capacity(columns.len());
        for c in columns {
            cols.push(Feature::from_name(c).ok_or_else(|| FeatureError::UnknownFeature {
                name: (*c).to_string(),
            })?);
        }
        Ok(Self {
            name: name.to_string(),
            columns: cols,
        })
    }
}

/// Assembled design matrix: feature columns, target vector, and the
/// (contract, date) key of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub keys: Vec<(String, NaiveDate)>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn cols(&self) -> usize {
        self.x.cols()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("unknown feature name `{name}`")]
    UnknownFeature { name: String },
    #[error("window length must be at least 1")]
    ZeroWindow,
}

/// One matrix row per record, in record order; the target is the market
/// price.
pub fn assemble(records: &[OptionRecord], cfg: &InputConfig) -> Result<FeatureMatrix, FeatureError> {
    let cols = cfg.columns.len();
    let mut data = Vec::with_capacity(records.len() * cols);
    let mut y = Vec::with_capacity(records.len());
    let mut keys = Vec::with_capacity(records.len());
    for rec in records {
        for f in &cfg.columns {
            data.push(f.value(rec));
        }
        y.push(rec.price);
        keys.push((rec.contract_id.clone(), rec.trade_date));
    }
    Ok(FeatureMatrix {
        column_names: cfg.columns.iter().map(|f| f.name().to_string()).collect(),
        x: DenseMatrix::from_vec(data, records.len(), cols),
        y,
        keys,
    })
}

/// Appends all base features at lags `1..=window` within each contract's
/// date-ordered history and drops rows with fewer than `window`
/// predecessors. Column count becomes `k * (window + 1)`; surviving rows
/// keep their base features, targets, and keys unchanged.
pub fn sliding_window(matrix: &FeatureMatrix, window: usize) -> Result<FeatureMatrix, FeatureError> {
    if window == 0 {
        return Err(FeatureError::ZeroWindow);
    }
    let k = matrix.cols();

    // Group row indices by contract in order of first appearance.
    let mut group_of: BTreeMap<&str, usize> = BTreeMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, (contract, _)) in matrix.keys.iter().enumerate() {
        let g = *group_of.entry(contract.as_str()).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }

    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut keys = Vec::new();
    let mut rows = 0;
    for group in &mut groups {
        // Stable by date; equal dates keep input order.
        group.sort_by_key(|&i| matrix.keys[i].1);
        for pos in window..group.len() {
            let row = group[pos];
            data.extend_from_slice(matrix.x.row(row));
            for lag in 1..=window {
                data.extend_from_slice(matrix.x.row(group[pos - lag]));
            }
            y.push(matrix.y[row]);
            keys.push(matrix.keys[row].clone());
            rows += 1;
        }
    }

    let mut column_names = matrix.column_names.clone();
    for lag in 1..=window {
        for name in &matrix.column_names {
            column_names.push(format!("{name}_lag{lag}"));
        }
    }

    Ok(FeatureMatrix {
        column_names,
        x: DenseMatrix::from_vec(data, rows, k * (window + 1)),
        y,
        keys,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::OptionKind;
    use alloc::vec;

    fn record(contract: &str, day: u32, spot: f64) -> OptionRecord {
        OptionRecord {
            trade_date: NaiveDate::from_ymd_opt(2020, 1, day).unwrap(),
            contract_id: contract.to_string(),
            spot,
            strike: 80.0,
            tau: 0.5,
            rate: 0.03,
            q_monthly: 0.001,
            kind: OptionKind::Call,
            sigma: 0.2,
            delta: 0.6,
            price: 25.0,
        }
    }

    #[test]
    fn assemble_in2_maps_directly() {
        let rec = record("c1", 2, 100.0);
        let m = assemble(&[rec], &InputConfig::named(InputSet::In2)).unwrap();
        assert_eq!(m.column_names, vec!["S/K", "tau", "r"]);
        assert_eq!(m.x.row(0), &[1.25, 0.5, 0.03]);
        assert_eq!(m.y, vec![25.0]);
    }

    #[test]
    fn in3_adds_sigma_over_in1() {
        let recs = vec![record("c1", 2, 100.0), record("c1", 3, 101.0)];
        let m1 = assemble(&recs, &InputConfig::named(InputSet::In1)).unwrap();
        let m3 = assemble(&recs, &InputConfig::named(InputSet::In3)).unwrap();
        assert_eq!(m3.cols(), m1.cols() + 1);
        assert_eq!(m3.column_names.last().unwrap(), "sigma");
    }

    #[test]
    fn standard_ends_with_q() {
        let m = assemble(&[record("c1", 2, 100.0)], &InputConfig::named(InputSet::Standard))
            .unwrap();
        assert_eq!(m.cols(), 5);
        assert_eq!(m.column_names.last().unwrap(), "q");
    }

    #[test]
    fn unknown_feature_name_is_config_error() {
        assert!(matches!(
            InputConfig::from_names("custom", &["S", "bogus"]),
            Err(FeatureError::UnknownFeature { .. })
        ));
    }

    #[test]
    fn window_counts_and_columns() {
        let recs = vec![
            record("c1", 2, 100.0),
            record("c1", 3, 101.0),
            record("c1", 6, 102.0),
        ];
        let m = assemble(&recs, &InputConfig::named(InputSet::In2)).unwrap();
        let w = sliding_window(&m, 1).unwrap();
        assert_eq!(w.rows(), 2);
        assert_eq!(w.cols(), 6);
        // Base features of the surviving rows are unchanged.
        assert_eq!(&w.x.row(0)[..3], m.x.row(1));
        assert_eq!(&w.x.row(0)[3..], m.x.row(0));
        assert_eq!(w.y, vec![25.0, 25.0]);
    }

    #[test]
    fn contract_with_exactly_w_rows_vanishes() {
        let recs = vec![record("c1", 2, 100.0), record("c1", 3, 101.0)];
        let m = assemble(&recs, &InputConfig::named(InputSet::In2)).unwrap();
        let w = sliding_window(&m, 2).unwrap();
        assert_eq!(w.rows(), 0);
    }

    #[test]
    fn constant_contract_lags_equal_base() {
        let recs = vec![
            record("c1", 2, 100.0),
            record("c1", 3, 100.0),
            record("c1", 6, 100.0),
        ];
        let m = assemble(&recs, &InputConfig::named(InputSet::Standard)).unwrap();
        let w = sliding_window(&m, 2).unwrap();
        assert_eq!(w.rows(), 1);
        let row = w.x.row(0);
        assert_eq!(&row[5..10], &row[0..5]);
        assert_eq!(&row[10..15], &row[0..5]);
    }

    #[test]
    fn window_zero_rejected() {
        let m = assemble(&[record("c1", 2, 100.0)], &InputConfig::named(InputSet::In2)).unwrap();
        assert!(matches!(sliding_window(&m, 0), Err(FeatureError::ZeroWindow)));
    }

    #[test]
    fn windows_do_not_cross_contracts() {
        let recs = vec![
            record("a", 2, 100.0),
            record("b", 2, 50.0),
            record("a", 3, 101.0),
            record("b", 3, 51.0),
        ];
        let m = assemble(&recs, &InputConfig::named(InputSet::In2)).unwrap();
        let w = sliding_window(&m, 1).unwrap();
        // One surviving row per contract: sum over contracts of (n_c - W).
        assert_eq!(w.rows(), 2);
        assert_eq!(w.keys[0].0, "a");
        assert_eq!(w.keys[1].0, "b");
        // Lag of contract a's second row is contract a's first row.
        assert_eq!(w.x.row(0)[3], 100.0 / 80.0);
        assert_eq!(w.x.row(1)[3], 50.0 / 80.0);
    }
}
