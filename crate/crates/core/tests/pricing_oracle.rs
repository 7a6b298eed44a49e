//! Pricing checked against the independent quadrature oracle, plus the
//! closed-form invariants: parity, bounds, monotonicity, and
//! delta-vs-finite-difference agreement.

use optbench_core::pricing::{bs_price, bsm_price, norm_cdf, parity_gap, OptionKind, OptionTerms};
use optbench_testkit::quadrature;
use optbench_testkit::rng::OracleRng;

/// Realistic quote universe: moneyness and vol ranges where f64 pricing is
/// well conditioned.
fn seeded_terms(rng: &mut OracleRng, kind: OptionKind) -> OptionTerms {
    let spot = rng.range(60.0, 160.0);
    let moneyness = rng.range(0.82, 1.22);
    OptionTerms {
        spot,
        strike: spot / moneyness,
        tau: rng.range(0.05, 2.5),
        rate: rng.range(0.0, 0.08),
        div_yield: rng.range(0.0, 0.04),
        vol: rng.range(0.1, 0.6),
        kind,
    }
}

fn kind_of(i: usize) -> OptionKind {
    if i % 2 == 0 {
        OptionKind::Call
    } else {
        OptionKind::Put
    }
}

#[test]
fn norm_cdf_matches_quadrature_below_1e12() {
    let mut x = -8.0;
    while x <= 8.0 {
        let got = norm_cdf(x).unwrap();
        let want = quadrature::norm_cdf(x);
        assert!(
            (got - want).abs() < 1e-12,
            "norm_cdf({x}): {got} vs oracle {want}"
        );
        x += 0.037;
    }
}

#[test]
fn norm_cdf_monotone() {
    let mut prev = norm_cdf(-20.0).unwrap();
    let mut x = -20.0;
    while x <= 20.0 {
        let v = norm_cdf(x).unwrap();
        assert!(v >= prev, "decreased at {x}");
        assert!((0.0..=1.0).contains(&v));
        prev = v;
        x += 0.01;
    }
}

#[test]
fn atm_call_matches_frozen_quadrature_value() {
    // Frozen from the oracle; re-derived here to keep the constant honest.
    let frozen = 10.450_583_572_185_565;
    let oracle = quadrature::option_price(100.0, 100.0, 1.0, 0.05, 0.0, 0.2, true);
    assert!((oracle - frozen).abs() < 1e-7, "oracle drifted: {oracle}");
    let got = bs_price(&OptionTerms {
        spot: 100.0,
        strike: 100.0,
        tau: 1.0,
        rate: 0.05,
        div_yield: 0.0,
        vol: 0.2,
        kind: OptionKind::Call,
    })
    .unwrap();
    assert!((got.price - frozen).abs() < 1e-9, "price {}", got.price);
}

#[test]
fn bsm_matches_quadrature_on_seeded_grid() {
    let mut rng = OracleRng::new(0x5eed);
    for i in 0..400 {
        let terms = seeded_terms(&mut rng, kind_of(i));
        let got = bsm_price(&terms).unwrap().price;
        let want = quadrature::option_price(
            terms.spot,
            terms.strike,
            terms.tau,
            terms.rate,
            terms.div_yield,
            terms.vol,
            terms.kind == OptionKind::Call,
        );
        let tol = 1e-6 * want.abs().max(1e-4);
        assert!(
            (got - want).abs() < tol,
            "{terms:?}: {got} vs oracle {want}"
        );
    }
}

#[test]
fn bsm_with_dividend_yield_matches_quadrature() {
    let terms = OptionTerms {
        spot: 100.0,
        strike: 100.0,
        tau: 1.0,
        rate: 0.05,
        div_yield: 0.02,
        vol: 0.2,
        kind: OptionKind::Call,
    };
    let got = bsm_price(&terms).unwrap().price;
    let want = quadrature::option_price(100.0, 100.0, 1.0, 0.05, 0.02, 0.2, true);
    assert!((got - want).abs() / want < 1e-6, "{got} vs {want}");
}

#[test]
fn parity_sweep_1000_draws() {
    let mut rng = OracleRng::new(77);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let terms = seeded_terms(&mut rng, kind_of(i));
        let gap = parity_gap(&terms).unwrap().abs();
        worst = worst.max(gap);
    }
    assert!(worst < 1e-9, "max parity gap {worst}");
}

#[test]
fn delta_matches_central_difference() {
    let mut rng = OracleRng::new(1234);
    for i in 0..300 {
        let terms = seeded_terms(&mut rng, kind_of(i));
        let h = 1e-4 * terms.spot;
        let up = bsm_price(&OptionTerms {
            spot: terms.spot + h,
            ..terms
        })
        .unwrap()
        .price;
        let down = bsm_price(&OptionTerms {
            spot: terms.spot - h,
            ..terms
        })
        .unwrap()
        .price;
        let fd = (up - down) / (2.0 * h);
        let delta = bsm_price(&terms).unwrap().delta;
        assert!(
            (delta - fd).abs() < 1e-5,
            "{terms:?}: delta {delta} vs fd {fd}"
        );
    }
}

#[test]
fn call_price_monotone_in_spot_and_vol() {
    let mut rng = OracleRng::new(42);
    for _ in 0..100 {
        let base = seeded_terms(&mut rng, OptionKind::Call);
        let mut prev = f64::NEG_INFINITY;
        for step in 0..20 {
            let spot = 50.0 + step as f64 * 6.0;
            let p = bsm_price(&OptionTerms { spot, ..base }).unwrap().price;
            assert!(p >= prev - 1e-12, "not monotone in S at {spot}");
            prev = p;
        }
        prev = f64::NEG_INFINITY;
        for step in 0..20 {
            let vol = 0.02 + step as f64 * 0.05;
            let p = bsm_price(&OptionTerms { vol, ..base }).unwrap().price;
            assert!(p >= prev - 1e-12, "not monotone in vol at {vol}");
            prev = p;
        }
    }
}

#[test]
fn call_price_within_forward_bounds() {
    let mut rng = OracleRng::new(9);
    for _ in 0..500 {
        let terms = seeded_terms(&mut rng, OptionKind::Call);
        let p = bsm_price(&terms).unwrap().price;
        let df_q = (-terms.div_yield * terms.tau).exp();
        let df_r = (-terms.rate * terms.tau).exp();
        let lower = (terms.spot * df_q - terms.strike * df_r).max(0.0);
        let upper = terms.spot * df_q;
        assert!(p >= lower - 1e-10 && p <= upper + 1e-10, "{terms:?}: {p}");
    }
}

#[test]
fn bs_equals_bsm_at_zero_yield_everywhere() {
    let mut rng = OracleRng::new(31);
    for i in 0..500 {
        let mut terms = seeded_terms(&mut rng, kind_of(i));
        terms.div_yield = 0.0;
        let a = bs_price(&terms).unwrap();
        let b = bsm_price(&terms).unwrap();
        assert_eq!(a.price.to_bits(), b.price.to_bits());
        assert_eq!(a.delta.to_bits(), b.delta.to_bits());
    }
}

#[test]
fn delta_ranges_by_kind() {
    let mut rng = OracleRng::new(88);
    for i in 0..300 {
        let terms = seeded_terms(&mut rng, kind_of(i));
        let delta = bsm_price(&terms).unwrap().delta;
        match terms.kind {
            OptionKind::Call => assert!((0.0..=1.0).contains(&delta)),
            OptionKind::Put => assert!((-1.0..=0.0).contains(&delta)),
        }
    }
}
