//! Seeded property sweeps over the dataset, feature, and evaluation
//! invariants.

use optbench_core::dataset::{self, DateRange, GeneratorConfig, MoneynessBucket};
use optbench_core::evaluation::{
    mse, rmse, score_rate_bs, score_rate_ml, score_table, ErrorTable, WeightVector,
};
use optbench_core::features::{assemble, sliding_window, InputConfig, InputSet};
use optbench_core::pricing::{bsm_price, OptionKind};
use optbench_testkit::rng::OracleRng;

fn desk_cfg(noise_eta: f64) -> GeneratorConfig {
    GeneratorConfig {
        start: chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
        end: chrono::NaiveDate::from_ymd_opt(2020, 6, 30).unwrap(),
        spot0: 100.0,
        gbm_mu: 0.04,
        gbm_sigma: 0.2,
        rate: 0.03,
        q_monthly: 0.0015,
        strikes: vec![85.0, 95.0, 100.0, 105.0, 115.0],
        maturities: vec![1.0, 2.0],
        kinds: vec![OptionKind::Call, OptionKind::Put],
        noise_eta,
        periods_per_year: 252,
    }
}

#[test]
fn bucketing_partitions_every_positive_ratio() {
    let mut rng = OracleRng::new(3);
    let mut seen = [0usize; 3];
    for _ in 0..5_000 {
        let spot = rng.range(1e-3, 500.0);
        let strike = rng.range(1e-3, 500.0);
        let bucket = dataset::moneyness_bucket(spot, strike).unwrap();
        // Exactly one bucket per ratio, by construction of the match below.
        let idx = match bucket {
            MoneynessBucket::Itm => 0,
            MoneynessBucket::Atm => 1,
            MoneynessBucket::Otm => 2,
        };
        seen[idx] += 1;
        let ratio = spot / strike;
        match bucket {
            MoneynessBucket::Itm => assert!(ratio < 0.96),
            MoneynessBucket::Atm => assert!((0.96..=1.04).contains(&ratio)),
            MoneynessBucket::Otm => assert!(ratio > 1.04),
        }
    }
    assert!(seen.iter().all(|&c| c > 0), "all buckets exercised: {seen:?}");
}

#[test]
fn bucket_populations_sum_to_all() {
    let records = dataset::generate_synthetic(&desk_cfg(0.0), 12).unwrap();
    let counts = records.iter().fold([0usize; 3], |mut acc, r| {
        match dataset::moneyness_bucket(r.spot, r.strike).unwrap() {
            MoneynessBucket::Itm => acc[0] += 1,
            MoneynessBucket::Atm => acc[1] += 1,
            MoneynessBucket::Otm => acc[2] += 1,
        }
        acc
    });
    assert_eq!(counts.iter().sum::<usize>(), records.len());
}

#[test]
fn noise_calibration_matches_eta() {
    // With eta = 0.05 the relative deviation (price - fair) / fair should
    // have standard deviation close to eta.
    let mut cfg = desk_cfg(0.05);
    cfg.end = chrono::NaiveDate::from_ymd_opt(2020, 12, 31).unwrap();
    cfg.strikes = vec![
        80.0, 85.0, 90.0, 95.0, 100.0, 105.0, 110.0, 115.0, 120.0, 125.0,
    ];
    let records = dataset::generate_synthetic(&cfg, 99).unwrap();
    assert!(records.len() >= 10_000, "want 10k records, got {}", records.len());
    let mut devs = Vec::with_capacity(records.len());
    for rec in &records {
        let fair = bsm_price(&rec.pricing_terms()).unwrap().price;
        if fair > 1e-3 {
            devs.push((rec.price - fair) / fair);
        }
    }
    let n = devs.len() as f64;
    let mean = devs.iter().sum::<f64>() / n;
    let sd = (devs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n).sqrt();
    assert!(
        (sd - 0.05).abs() / 0.05 < 0.10,
        "relative deviation sd {sd} vs eta 0.05"
    );
}

#[test]
fn split_is_lossless_over_ranges() {
    let records = dataset::generate_synthetic(&desk_cfg(0.01), 5).unwrap();
    let n = records.len();
    let train = DateRange::new(
        chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
        chrono::NaiveDate::from_ymd_opt(2020, 3, 31).unwrap(),
    )
    .unwrap();
    let test = DateRange::new(
        chrono::NaiveDate::from_ymd_opt(2020, 4, 1).unwrap(),
        chrono::NaiveDate::from_ymd_opt(2020, 5, 15).unwrap(),
    )
    .unwrap();
    let split = dataset::split_by_dates(records, &[train], test).unwrap();
    assert_eq!(
        split.train.len() + split.test.len() + split.denoised_extra.len() + split.dropped,
        n
    );
}

#[test]
fn window_preserves_survivor_rows_and_counts() {
    let records = dataset::generate_synthetic(&desk_cfg(0.02), 8).unwrap();
    let m = assemble(&records, &InputConfig::named(InputSet::Standard)).unwrap();
    for window in [1usize, 3, 5] {
        let w = sliding_window(&m, window).unwrap();
        // Survivor count: sum over contracts of max(n_c - W, 0).
        let mut per_contract: std::collections::BTreeMap<String, usize> = Default::default();
        for (c, _) in &m.keys {
            *per_contract.entry(c.clone()).or_insert(0) += 1;
        }
        let expected: usize = per_contract
            .values()
            .map(|&n| n.saturating_sub(window))
            .sum();
        assert_eq!(w.rows(), expected, "window {window}");
        assert_eq!(w.cols(), m.cols() * (window + 1));
        // Surviving rows keep their base features and targets: spot-check
        // by key lookup.
        for i in (0..w.rows()).step_by(97) {
            let key = &w.keys[i];
            let orig = m.keys.iter().position(|k| k == key).unwrap();
            assert_eq!(&w.x.row(i)[..m.cols()], m.x.row(orig));
            assert_eq!(w.y[i], m.y[orig]);
        }
    }
}

#[test]
fn rmse_matches_direct_summation_oracle() {
    let mut rng = OracleRng::new(77);
    for _ in 0..50 {
        let n = 1 + rng.below(200);
        let pred: Vec<f64> = (0..n).map(|_| rng.range(-10.0, 10.0)).collect();
        let actual: Vec<f64> = (0..n).map(|_| rng.range(-10.0, 10.0)).collect();
        let mut acc = 0.0;
        for i in 0..n {
            let d = pred[i] - actual[i];
            acc += d * d;
        }
        let want = (acc / n as f64).sqrt();
        let got = rmse(&pred, &actual).unwrap();
        assert!((got - want).abs() < 1e-12);
        let m = mse(&pred, &actual).unwrap();
        assert!((got * got - m).abs() < 1e-12);
    }
}

#[test]
fn score_rates_strictly_decrease_in_own_error() {
    let mut rng = OracleRng::new(31);
    for _ in 0..200 {
        let e_ref = rng.range(0.01, 2.0);
        let a = rng.range(0.0, 2.0);
        let b = a + rng.range(1e-6, 0.5);
        assert!(score_rate_bs(a, e_ref).unwrap() > score_rate_bs(b, e_ref).unwrap());
        assert!(score_rate_ml(a, e_ref).unwrap() > score_rate_ml(b, e_ref).unwrap());
    }
}

#[test]
fn ml_rate_nonnegative_for_included_models() {
    let mut rng = OracleRng::new(32);
    for _ in 0..50 {
        let models: Vec<String> = (0..5).map(|i| format!("M{i}")).collect();
        let mut all = vec!["BS".to_string()];
        all.extend(models.clone());
        let subs = vec!["s1".to_string(), "s2".to_string()];
        let cells: Vec<f64> = (0..all.len() * subs.len())
            .map(|_| rng.range(0.01, 1.0))
            .collect();
        let table = ErrorTable::new(
            all,
            subs.clone(),
            cells,
            Some("BS"),
            vec!["BS".to_string()],
        )
        .unwrap();
        let report = score_table(&table, &WeightVector::equal(&subs)).unwrap();
        for entry in &report.entries {
            assert!(
                entry.score_ml >= 0.0,
                "included model {} got negative ml rate {}",
                entry.model,
                entry.score_ml
            );
            assert!(entry.score_ml <= 100.0 && entry.score_bs <= 100.0);
        }
    }
}
