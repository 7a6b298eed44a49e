//! Option-record model, seeded synthetic market generation, date splits,
//! and moneyness bucketing.
//!
//! A record carries the eight quote variables (spot, strike, tau, rate,
//! monthly dividend rate, option type, GARCH volatility, delta) plus the
//! observed market price. The synthetic generator drives a geometric
//! Brownian underlying through a weekday calendar, quotes a strike/expiry
//! grid on every date, fits GARCH(1,1) to the simulated returns for the
//! volatility feature, and prices each quote with the dividend-adjusted
//! closed form plus optional multiplicative Gaussian noise.

use crate::math;
use crate::pricing::{self, OptionKind, OptionTerms, PricingError};
use crate::volatility::{self, GarchParams, VolError};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

const MONTHS_PER_YEAR: f64 = 12.0;
const DAYS_PER_YEAR: f64 = 365.0;
const MIN_GARCH_OBS: usize = 100;

/// One observed option quote with every model feature populated.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionRecord {
    pub trade_date: NaiveDate,
    pub contract_id: String,
    pub spot: f64,
    pub strike: f64,
    pub tau: f64,
    pub rate: f64,
    pub q_monthly: f64,
    pub kind: OptionKind,
    pub sigma: f64,
    pub delta: f64,
    pub price: f64,
}

impl OptionRecord {
    pub fn validate(&self) -> Result<(), DataError> {
        let fields: [(&'static str, f64); 7] = [
            ("S", self.spot),
            ("K", self.strike),
            ("tau", self.tau),
            ("r", self.rate),
            ("q_monthly", self.q_monthly),
            ("sigma", self.sigma),
            ("delta", self.delta),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(DataError::InvalidField {
                    field: name,
                    value,
                    constraint: "finite",
                });
            }
        }
        if self.spot <= 0.0 {
            return Err(DataError::InvalidField {
                field: "S",
                value: self.spot,
                constraint: "S > 0",
            });
        }
        if self.strike <= 0.0 {
            return Err(DataError::InvalidField {
                field: "K",
                value: self.strike,
                constraint: "K > 0",
            });
        }
        if self.tau <= 0.0 {
            return Err(DataError::InvalidField {
                field: "tau",
                value: self.tau,
                constraint: "tau > 0",
            });
        }
        if !(self.price >= 0.0) || !self.price.is_finite() {
            return Err(DataError::InvalidField {
                field: "price",
                value: self.price,
                constraint: "price >= 0",
            });
        }
        Ok(())
    }

    /// Moneyness ratio S/K.
    pub fn moneyness(&self) -> f64 {
        self.spot / self.strike
    }

    /// Pricing inputs for this quote. The stored monthly dividend rate is
    /// annualized here (x12); the stored GARCH sigma is the volatility.
    pub fn pricing_terms(&self) -> OptionTerms {
        self.pricing_terms_with_vol(self.sigma)
    }

    /// Same as [`pricing_terms`](Self::pricing_terms) with an overridden
    /// volatility.
    pub fn pricing_terms_with_vol(&self, vol: f64) -> OptionTerms {
        OptionTerms {
            spot: self.spot,
            strike: self.strike,
            tau: self.tau,
            rate: self.rate,
            div_yield: self.q_monthly * MONTHS_PER_YEAR,
            vol,
            kind: self.kind,
        }
    }
}

/// Closed date interval; both endpoints are included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, DataError> {
        if start > end {
            return Err(DataError::BadDateRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        d >= self.start && d <= self.end
    }

    pub fn overlaps(&self, other: &DateRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// Date-routed dataset: primary training rows, test rows, the optional
/// low-noise augmentation rows, and the count of rows outside every range.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetSplit {
    pub train: Vec<OptionRecord>,
    pub test: Vec<OptionRecord>,
    pub denoised_extra: Vec<OptionRecord>,
    pub dropped: usize,
}

/// Moneyness class of a single quote by the ratio S/K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoneynessBucket {
    Itm,
    Atm,
    Otm,
}

impl MoneynessBucket {
    pub fn as_str(&self) -> &'static str {
        match self {
            MoneynessBucket::Itm => "ITM",
            MoneynessBucket::Atm => "ATM",
            MoneynessBucket::Otm => "OTM",
        }
    }
}

/// Which side of the S/K ratio is labelled in-the-money. The reference
/// benchmark tables label low ratios (S/K < 0.96) as ITM, inverting the
/// usual call-side convention; `LowRatio` reproduces that and is the
/// default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ItmSide {
    #[default]
    LowRatio,
    HighRatio,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("invalid {field} = {value} (requires {constraint})")]
    InvalidField {
        field: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("bad date range {start}..{end}")]
    BadDateRange { start: NaiveDate, end: NaiveDate },
    #[error("train range {train_start}..{train_end} overlaps test range")]
    OverlappingRanges {
        train_start: NaiveDate,
        train_end: NaiveDate,
    },
    #[error("empty {what}")]
    EmptyGrid { what: &'static str },
    #[error("generator needs at least 2 trading dates, got {got}")]
    TooFewDates { got: usize },
    #[error("pricing failed during generation: {0}")]
    Pricing(#[from] PricingError),
    #[error("volatility estimation failed during generation: {0}")]
    Vol(#[from] VolError),
}

/// Buckets a quote by S/K with the default (low-ratio ITM) labelling:
/// (0, 0.96) -> ITM, [0.96, 1.04] -> ATM, (1.04, inf) -> OTM.
pub fn moneyness_bucket(spot: f64, strike: f64) -> Result<MoneynessBucket, DataError> {
    moneyness_bucket_with(spot, strike, ItmSide::LowRatio)
}

/// Bucketing with an explicit ITM side.
pub fn moneyness_bucket_with(
    spot: f64,
    strike: f64,
    side: ItmSide,
) -> Result<MoneynessBucket, DataError> {
    if !(spot > 0.0) || !spot.is_finite() {
        return Err(DataError::InvalidField {
            field: "S",
            value: spot,
            constraint: "S > 0",
        });
    }
    if !(strike > 0.0) || !strike.is_finite() {
        return Err(DataError::InvalidField {
            field: "K",
            value: strike,
            constraint: "K > 0",
        });
    }
    let ratio = spot / strike;
    let bucket = if ratio < 0.96 {
        MoneynessBucket::Itm
    } else if ratio <= 1.04 {
        MoneynessBucket::Atm
    } else {
        MoneynessBucket::Otm
    };
    Ok(match (bucket, side) {
        (MoneynessBucket::Itm, ItmSide::HighRatio) => MoneynessBucket::Otm,
        (MoneynessBucket::Otm, ItmSide::HighRatio) => MoneynessBucket::Itm,
        (b, _) => b,
    })
}

/// Routes records by trade date: the first train range feeds `train`,
/// later train ranges feed `denoised_extra`, the test range feeds `test`;
/// anything outside every range is dropped and counted.
pub fn split_by_dates(
    records: Vec<OptionRecord>,
    train_ranges: &[DateRange],
    test_range: DateRange,
) -> Result<DatasetSplit, DataError> {
    if train_ranges.is_empty() {
        return Err(DataError::EmptyGrid {
            what: "train date ranges",
        });
    }
    for r in train_ranges {
        if r.overlaps(&test_range) {
            return Err(DataError::OverlappingRanges {
                train_start: r.start,
                train_end: r.end,
            });
        }
    }
    let mut split = DatasetSplit::default();
    for rec in records {
        let d = rec.trade_date;
        if train_ranges[0].contains(d) {
            split.train.push(rec);
        } else if train_ranges[1..].iter().any(|r| r.contains(d)) {
            split.denoised_extra.push(rec);
        } else if test_range.contains(d) {
            split.test.push(rec);
        } else {
            split.dropped += 1;
        }
    }
    Ok(split)
}

/// Training set for the noise experiment: primary training rows followed by
/// the low-noise augmentation rows.
pub fn build_denoised_train(split: &DatasetSplit) -> Vec<OptionRecord> {
    let mut out = Vec::with_capacity(split.train.len() + split.denoised_extra.len());
    out.extend_from_slice(&split.train);
    out.extend_from_slice(&split.denoised_extra);
    out
}

/// Deterministically thins `records` down to `cap` rows (0 = no cap) while
/// preserving order and date spread: row `j` of the output is input row
/// `floor(j * len / cap)`.
pub fn decimate(records: &[OptionRecord], cap: usize) -> Vec<OptionRecord> {
    if cap == 0 || cap >= records.len() {
        return records.to_vec();
    }
    (0..cap)
        .map(|j| records[j * records.len() / cap].clone())
        .collect()
}

/// Synthetic market configuration. `maturities` are expiry offsets in years
/// from `start`, converted to fixed expiry dates; every weekday in
/// `[start, end]` quotes the whole strike-by-expiry grid for each kind in
/// `kinds`.
///
/// The named feature sets carry no option-type column, so learnable
/// benchmark data should stick to a single kind (calls by default); mixed
/// generation stays available for ingestion and pricing tests.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub spot0: f64,
    pub gbm_mu: f64,
    pub gbm_sigma: f64,
    pub rate: f64,
    pub q_monthly: f64,
    pub strikes: Vec<f64>,
    pub maturities: Vec<f64>,
    pub kinds: Vec<OptionKind>,
    pub noise_eta: f64,
    pub periods_per_year: usize,
}

impl GeneratorConfig {
    fn validate(&self) -> Result<(), DataError> {
        if self.start > self.end {
            return Err(DataError::BadDateRange {
                start: self.start,
                end: self.end,
            });
        }
        if self.strikes.is_empty() {
            return Err(DataError::EmptyGrid { what: "strikes" });
        }
        if self.maturities.is_empty() {
            return Err(DataError::EmptyGrid { what: "maturities" });
        }
        if self.kinds.is_empty() {
            return Err(DataError::EmptyGrid { what: "kinds" });
        }
        let scalar_checks: [(&'static str, f64, bool); 4] = [
            ("spot0", self.spot0, self.spot0 > 0.0),
            ("gbm_sigma", self.gbm_sigma, self.gbm_sigma >= 0.0),
            ("noise_eta", self.noise_eta, self.noise_eta >= 0.0),
            ("q_monthly", self.q_monthly, self.q_monthly >= 0.0),
        ];
        for (field, value, ok) in scalar_checks {
            if !ok || !value.is_finite() {
                return Err(DataError::InvalidField {
                    field,
                    value,
                    constraint: "valid generator scalar",
                });
            }
        }
        for &k in &self.strikes {
            if !(k > 0.0) || !k.is_finite() {
                return Err(DataError::InvalidField {
                    field: "K",
                    value: k,
                    constraint: "K > 0",
                });
            }
        }
        for &m in &self.maturities {
            if !(m > 0.0) || !m.is_finite() {
                return Err(DataError::InvalidField {
                    field: "tau",
                    value: m,
                    constraint: "maturity > 0",
                });
            }
        }
        if self.periods_per_year == 0 {
            return Err(DataError::InvalidField {
                field: "periods_per_year",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        Ok(())
    }
}

/// Weekdays in the closed interval.
pub fn trading_days(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    let mut d = start;
    while d <= end {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Generates a seeded synthetic option market. Identical `(cfg, seed)`
/// inputs produce identical output.
///
/// Each record's price is the dividend-adjusted closed-form value at the
/// quote's own GARCH sigma, perturbed by Gaussian noise with standard
/// deviation `noise_eta * price` and truncated at zero; with
/// `noise_eta = 0` prices are exact. GARCH(1,1) is fitted to the simulated
/// returns when at least 100 are available, otherwise the constant
/// sample-variance parameters are used.
pub fn generate_synthetic(
    cfg: &GeneratorConfig,
    seed: u64,
) -> Result<Vec<OptionRecord>, DataError> {
    cfg.validate()?;
    let dates = trading_days(cfg.start, cfg.end);
    if dates.len() < 2 {
        return Err(DataError::TooFewDates { got: dates.len() });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // Underlying path.
    let dt = 1.0 / cfg.periods_per_year as f64;
    let drift = (cfg.gbm_mu - 0.5 * cfg.gbm_sigma * cfg.gbm_sigma) * dt;
    let step_vol = cfg.gbm_sigma * math::sqrt(dt);
    let mut path = Vec::with_capacity(dates.len());
    path.push(cfg.spot0);
    for _ in 1..dates.len() {
        let z = math::standard_normal(&mut rng);
        let prev = *path.last().expect("nonempty path");
        path.push(prev * math::exp(drift + step_vol * z));
    }

    // Volatility feature: one underlying-level GARCH fit, broadcast by date.
    let returns = volatility::log_returns(&path)?;
    let params = if returns.len() >= MIN_GARCH_OBS {
        volatility::garch_fit(&returns)?.params
    } else {
        let var = math::mean_square(&returns).max(1e-18);
        GarchParams {
            omega: var,
            alpha: 0.0,
            beta: 0.0,
            loglik: 0.0,
        }
    };
    let vols = volatility::vol_series(&params, &returns, cfg.periods_per_year)?;
    let seed_vol = math::sqrt(math::mean_square(&returns).max(1e-18) * cfg.periods_per_year as f64);
    let mut sigma_by_date = Vec::with_capacity(dates.len());
    sigma_by_date.push(seed_vol);
    sigma_by_date.extend_from_slice(&vols);

    let expiries: Vec<NaiveDate> = cfg
        .maturities
        .iter()
        .map(|m| cfg.start + Duration::days((m * DAYS_PER_YEAR) as i64))
        .collect();

    let q_annual = cfg.q_monthly * MONTHS_PER_YEAR;
    let mut records = Vec::new();
    for (di, &date) in dates.iter().enumerate() {
        let spot = path[di];
        let sigma = sigma_by_date[di];
        for &strike in &cfg.strikes {
            for (mi, &expiry) in expiries.iter().enumerate() {
                let tau = (expiry - date).num_days() as f64 / DAYS_PER_YEAR;
                if tau <= 0.0 {
                    continue;
                }
                for &kind in &cfg.kinds {
                    let terms = OptionTerms {
                        spot,
                        strike,
                        tau,
                        rate: cfg.rate,
                        div_yield: q_annual,
                        vol: sigma,
                        kind,
                    };
                    let fair = pricing::bsm_price(&terms)?.price;
                    let delta = pricing::bs_price(&terms)?.delta;
                    let price = if cfg.noise_eta > 0.0 {
                        let z = math::standard_normal(&mut rng);
                        (fair + cfg.noise_eta * fair * z).max(0.0)
                    } else {
                        fair
                    };
                    records.push(OptionRecord {
                        trade_date: date,
                        contract_id: format!(
                            "{}-{}-{}",
                            match kind {
                                OptionKind::Call => "C",
                                OptionKind::Put => "P",
                            },
                            strike,
                            expiries_label(mi, expiry)
                        ),
                        spot,
                        strike,
                        tau,
                        rate: cfg.rate,
                        q_monthly: cfg.q_monthly,
                        kind,
                        sigma,
                        delta,
                        price,
                    });
                }
            }
        }
    }
    Ok(records)
}

fn expiries_label(_index: usize, expiry: NaiveDate) -> String {
    format!("{}", expiry.format("%Y%m%d"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
    }

    fn small_cfg() -> GeneratorConfig {
        GeneratorConfig {
            start: date(2020, 1, 1),
            end: date(2020, 3, 31),
            spot0: 100.0,
            gbm_mu: 0.05,
            gbm_sigma: 0.2,
            rate: 0.03,
            q_monthly: 0.0015,
            strikes: vec![90.0, 100.0, 110.0],
            maturities: vec![1.0, 2.0],
            kinds: vec![OptionKind::Call, OptionKind::Put],
            noise_eta: 0.0,
            periods_per_year: 252,
        }
    }

    #[test]
    fn bucket_boundaries() {
        assert_eq!(moneyness_bucket(100.0, 100.0).unwrap(), MoneynessBucket::Atm);
        assert_eq!(moneyness_bucket(95.0, 100.0).unwrap(), MoneynessBucket::Itm);
        assert_eq!(moneyness_bucket(96.0, 100.0).unwrap(), MoneynessBucket::Atm);
        assert_eq!(moneyness_bucket(104.0, 100.0).unwrap(), MoneynessBucket::Atm);
        assert_eq!(moneyness_bucket(104.1, 100.0).unwrap(), MoneynessBucket::Otm);
        assert!(moneyness_bucket(-1.0, 100.0).is_err());
        assert!(moneyness_bucket(100.0, 0.0).is_err());
    }

    #[test]
    fn bucket_side_swap() {
        assert_eq!(
            moneyness_bucket_with(95.0, 100.0, ItmSide::HighRatio).unwrap(),
            MoneynessBucket::Otm
        );
        assert_eq!(
            moneyness_bucket_with(110.0, 100.0, ItmSide::HighRatio).unwrap(),
            MoneynessBucket::Itm
        );
        assert_eq!(
            moneyness_bucket_with(100.0, 100.0, ItmSide::HighRatio).unwrap(),
            MoneynessBucket::Atm
        );
    }

    #[test]
    fn generator_noiseless_prices_are_exact() {
        let records = generate_synthetic(&small_cfg(), 7).unwrap();
        assert!(!records.is_empty());
        for rec in &records {
            rec.validate().unwrap();
            let fair = pricing::bsm_price(&rec.pricing_terms()).unwrap().price;
            assert_eq!(rec.price, fair);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_synthetic(&small_cfg(), 42).unwrap();
        let b = generate_synthetic(&small_cfg(), 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&small_cfg(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generator_rejects_empty_grids() {
        let mut cfg = small_cfg();
        cfg.strikes.clear();
        assert!(matches!(
            generate_synthetic(&cfg, 1),
            Err(DataError::EmptyGrid { what: "strikes" })
        ));
    }

    #[test]
    fn split_routes_three_ways_and_counts_drops() {
        let mut cfg = small_cfg();
        cfg.end = date(2020, 6, 30);
        let records = generate_synthetic(&cfg, 5).unwrap();
        let n = records.len();
        let train = DateRange::new(date(2020, 1, 1), date(2020, 2, 29)).unwrap();
        let extra = DateRange::new(date(2020, 5, 1), date(2020, 5, 31)).unwrap();
        let test = DateRange::new(date(2020, 3, 1), date(2020, 4, 30)).unwrap();
        let split = split_by_dates(records, &[train, extra], test).unwrap();
        assert!(!split.train.is_empty());
        assert!(!split.test.is_empty());
        assert!(!split.denoised_extra.is_empty());
        assert!(split.dropped > 0, "June rows should be dropped");
        assert_eq!(
            split.train.len() + split.test.len() + split.denoised_extra.len() + split.dropped,
            n
        );
        assert!(split.train.iter().all(|r| train.contains(r.trade_date)));
        assert!(split.test.iter().all(|r| test.contains(r.trade_date)));
        assert!(split
            .denoised_extra
            .iter()
            .all(|r| extra.contains(r.trade_date)));
    }

    #[test]
    fn split_boundary_dates_are_inclusive() {
        let records = generate_synthetic(&small_cfg(), 5).unwrap();
        let boundary = records[0].trade_date;
        let train = DateRange::new(boundary, boundary).unwrap();
        let test = DateRange::new(date(2021, 1, 1), date(2021, 1, 31)).unwrap();
        let split = split_by_dates(records, &[train], test).unwrap();
        assert!(!split.train.is_empty());
        assert!(split.test.is_empty());
    }

    #[test]
    fn split_rejects_overlap() {
        let train = DateRange::new(date(2020, 1, 1), date(2020, 8, 31)).unwrap();
        let test = DateRange::new(date(2020, 8, 31), date(2020, 12, 31)).unwrap();
        assert!(matches!(
            split_by_dates(Vec::new(), &[train], test),
            Err(DataError::OverlappingRanges { .. })
        ));
    }

    #[test]
    fn denoised_train_concatenates_in_order() {
        let records = generate_synthetic(&small_cfg(), 9).unwrap();
        let split = DatasetSplit {
            train: records[..100].to_vec(),
            test: Vec::new(),
            denoised_extra: records[100..150].to_vec(),
            dropped: 0,
        };
        let merged = build_denoised_train(&split);
        assert_eq!(merged.len(), 150);
        assert_eq!(&merged[..100], &split.train[..]);
        assert_eq!(&merged[100..], &split.denoised_extra[..]);

        let empty_extra = DatasetSplit {
            denoised_extra: Vec::new(),
            ..split.clone()
        };
        assert_eq!(build_denoised_train(&empty_extra), split.train);
    }

    #[test]
    fn decimate_caps_and_preserves_order() {
        let records = generate_synthetic(&small_cfg(), 3).unwrap();
        let thinned = decimate(&records, 10);
        assert_eq!(thinned.len(), 10);
        let mut last = thinned[0].trade_date;
        for r in &thinned[1..] {
            assert!(r.trade_date >= last);
            last = r.trade_date;
        }
        assert_eq!(decimate(&records, 0).len(), records.len());
        assert_eq!(decimate(&records, records.len() + 5).len(), records.len());
    }
}
