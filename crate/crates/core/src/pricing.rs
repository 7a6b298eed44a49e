//! Closed-form Black-Scholes and Black-Scholes-Merton pricing.
//!
//! Prices and deltas for European calls and puts:
//!
//!   call = S e^{-q tau} N(d1) - K e^{-r tau} N(d2)
//!   d1 = (ln(S/K) + (r - q + sigma^2/2) tau) / (sigma sqrt(tau))
//!   d2 = d1 - sigma sqrt(tau)
//!
//! `bs_price` is the q = 0 special case and agrees with `bsm_price`
//! bit-for-bit when the dividend yield is zero. Expiry (tau = 0) and
//! zero-volatility inputs collapse to intrinsic / deterministic-forward
//! values instead of dividing by zero.

use crate::math;
use thiserror::Error;

/// Call or put.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        }
    }
}

/// Inputs of the closed-form pricers. Rates and yields are annualized,
/// continuously compounded decimals; `tau` is in years.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionTerms {
    pub spot: f64,
    pub strike: f64,
    pub tau: f64,
    pub rate: f64,
    pub div_yield: f64,
    pub vol: f64,
    pub kind: OptionKind,
}

/// Price plus first-order spot sensitivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceResult {
    pub price: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("non-finite input {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("invalid terms: {name} = {value} violates {constraint}")]
    InvalidTerms {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

impl OptionTerms {
    /// Checks the domain invariants: S > 0, K > 0, tau >= 0, sigma >= 0,
    /// q >= 0, and everything finite.
    pub fn validate(&self) -> Result<(), PricingError> {
        let checks: [(&'static str, f64); 6] = [
            ("spot", self.spot),
            ("strike", self.strike),
            ("tau", self.tau),
            ("rate", self.rate),
            ("div_yield", self.div_yield),
            ("vol", self.vol),
        ];
        for (name, value) in checks {
            if !value.is_finite() {
                return Err(PricingError::NonFinite { name, value });
            }
        }
        if self.spot <= 0.0 {
            return Err(PricingError::InvalidTerms {
                name: "spot",
                value: self.spot,
                constraint: "spot > 0",
            });
        }
        if self.strike <= 0.0 {
            return Err(PricingError::InvalidTerms {
                name: "strike",
                value: self.strike,
                constraint: "strike > 0",
            });
        }
        if self.tau < 0.0 {
            return Err(PricingError::InvalidTerms {
                name: "tau",
                value: self.tau,
                constraint: "tau >= 0",
            });
        }
        if self.vol < 0.0 {
            return Err(PricingError::InvalidTerms {
                name: "vol",
                value: self.vol,
                constraint: "vol >= 0",
            });
        }
        if self.div_yield < 0.0 {
            return Err(PricingError::InvalidTerms {
                name: "div_yield",
                value: self.div_yield,
                constraint: "div_yield >= 0",
            });
        }
        Ok(())
    }
}

/// Standard normal CDF.
///
/// Backed by Cody's rational-Chebyshev erfc approximation; absolute error
/// is below 1e-15 over the real line.
pub fn norm_cdf(x: f64) -> Result<f64, PricingError> {
    if !x.is_finite() {
        return Err(PricingError::NonFinite { name: "x", value: x });
    }
    Ok(ncdf(x))
}

pub(crate) fn ncdf(x: f64) -> f64 {
    0.5 * erfc_cody(-x * core::f64::consts::FRAC_1_SQRT_2)
}

// Rational-Chebyshev erfc after W. J. Cody (SPECFUN `calerf`).
fn erfc_cody(x: f64) -> f64 {
    const A: [f64; 5] = [
        3.16112374387056560e0,
        1.13864154151050156e2,
        3.77485237685302021e2,
        3.20937758913846947e3,
        1.85777706184603153e-1,
    ];
    const B: [f64; 4] = [
        2.36012909523441209e1,
        2.44024637934444173e2,
        1.28261652607737228e3,
        2.84423683343917062e3,
    ];
    const C: [f64; 9] = [
        5.64188496988670089e-1,
        8.88314979438837594e0,
        6.61191906371416295e1,
        2.98635138197400131e2,
        8.81952221241769090e2,
        1.71204761263407058e3,
        2.05107837782607147e3,
        1.23033935479799725e3,
        2.15311535474403846e-8,
    ];
    const D: [f64; 8] = [
        1.57449261107098347e1,
        1.17693950891312499e2,
        5.37181101862009858e2,
        1.62138957456669019e3,
        3.29079923573345963e3,
        4.36261909014324716e3,
        3.43936767414372164e3,
        1.23033935480374942e3,
    ];
    const P: [f64; 6] = [
        3.05326634961232344e-1,
        3.60344899949804439e-1,
        1.25781726111229246e-1,
        1.60837851487422766e-2,
        6.58749161529837803e-4,
        1.63153871373020978e-2,
    ];
    const Q: [f64; 5] = [
        2.56852019228982242e0,
        1.87295284992346047e0,
        5.27905102951428412e-1,
        6.05183413124413191e-2,
        2.33520497626869185e-3,
    ];
    const SQRPI: f64 = 5.6418958354775628695e-1;
    const THRESH: f64 = 0.46875;
    const XBIG: f64 = 26.543;

    let y = math::abs(x);
    if y <= THRESH {
        // erfc via erf on the central interval.
        let z = y * y;
        let mut xnum = A[4] * z;
        let mut xden = z;
        for i in 0..3 {
            xnum = (xnum + A[i]) * z;
            xden = (xden + B[i]) * z;
        }
        let erf = x * (xnum + A[3]) / (xden + B[3]);
        return 1.0 - erf;
    }

    let result = if y <= 4.0 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        scaled_by_exp(y, (xnum + C[7]) / (xden + D[7]))
    } else if y < XBIG {
        let z = 1.0 / (y * y);
        let mut xnum = P[5] * z;
        let mut xden = z;
        for i in 0..4 {
            xnum = (xnum + P[i]) * z;
            xden = (xden + Q[i]) * z;
        }
        let r = z * (xnum + P[4]) / (xden + Q[4]);
        scaled_by_exp(y, (SQRPI - r) / y)
    } else {
        0.0
    };

    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

// Multiplies by exp(-y^2) split into a truncated square plus remainder,
// Cody's trick to avoid the rounding error of a single large argument.
fn scaled_by_exp(y: f64, r: f64) -> f64 {
    let ysq = math::trunc(y * 16.0) / 16.0;
    let del = (y - ysq) * (y + ysq);
    math::exp(-ysq * ysq) * math::exp(-del) * r
}

/// Black-Scholes price and delta: `bsm_price` with the dividend yield
/// forced to zero.
pub fn bs_price(terms: &OptionTerms) -> Result<PriceResult, PricingError> {
    terms.validate()?;
    let mut t = *terms;
    t.div_yield = 0.0;
    Ok(bsm_unchecked(&t))
}

/// Black-Scholes-Merton price and delta with continuous dividend yield.
pub fn bsm_price(terms: &OptionTerms) -> Result<PriceResult, PricingError> {
    terms.validate()?;
    Ok(bsm_unchecked(terms))
}

fn bsm_unchecked(t: &OptionTerms) -> PriceResult {
    let s = t.spot;
    let k = t.strike;

    if t.tau == 0.0 {
        // Expired: intrinsic value, delta snaps to the payoff slope.
        return match t.kind {
            OptionKind::Call => PriceResult {
                price: if s > k { s - k } else { 0.0 },
                delta: if s > k { 1.0 } else { 0.0 },
            },
            OptionKind::Put => PriceResult {
                price: if k > s { k - s } else { 0.0 },
                delta: if s < k { -1.0 } else { 0.0 },
            },
        };
    }

    let df_r = math::exp(-t.rate * t.tau);
    let df_q = math::exp(-t.div_yield * t.tau);
    let vol_sqrt_tau = t.vol * math::sqrt(t.tau);

    if vol_sqrt_tau == 0.0 {
        // Deterministic forward.
        let fwd_gap = s * df_q - k * df_r;
        return match t.kind {
            OptionKind::Call => PriceResult {
                price: if fwd_gap > 0.0 { fwd_gap } else { 0.0 },
                delta: if fwd_gap > 0.0 { df_q } else { 0.0 },
            },
            OptionKind::Put => PriceResult {
                price: if fwd_gap < 0.0 { -fwd_gap } else { 0.0 },
                delta: if fwd_gap < 0.0 { -df_q } else { 0.0 },
            },
        };
    }

    let d1 = (math::ln(s / k) + (t.rate - t.div_yield + 0.5 * t.vol * t.vol) * t.tau)
        / vol_sqrt_tau;
    let d2 = d1 - vol_sqrt_tau;

    match t.kind {
        OptionKind::Call => PriceResult {
            price: s * df_q * ncdf(d1) - k * df_r * ncdf(d2),
            delta: df_q * ncdf(d1),
        },
        OptionKind::Put => PriceResult {
            price: k * df_r * ncdf(-d2) - s * df_q * ncdf(-d1),
            delta: df_q * (ncdf(d1) - 1.0),
        },
    }
}

/// Put-call parity residual `C - P - (S e^{-q tau} - K e^{-r tau})` with
/// both legs priced by `bsm_price`. Near zero for any valid terms.
pub fn parity_gap(terms: &OptionTerms) -> Result<f64, PricingError> {
    terms.validate()?;
    if terms.tau <= 0.0 {
        return Err(PricingError::InvalidTerms {
            name: "tau",
            value: terms.tau,
            constraint: "tau > 0",
        });
    }
    let call = bsm_unchecked(&OptionTerms {
        kind: OptionKind::Call,
        ..*terms
    });
    let put = bsm_unchecked(&OptionTerms {
        kind: OptionKind::Put,
        ..*terms
    });
    let df_r = math::exp(-terms.rate * terms.tau);
    let df_q = math::exp(-terms.div_yield * terms.tau);
    Ok(call.price - put.price - (terms.spot * df_q - terms.strike * df_r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call_terms(spot: f64, strike: f64, tau: f64, rate: f64, q: f64, vol: f64) -> OptionTerms {
        OptionTerms {
            spot,
            strike,
            tau,
            rate,
            div_yield: q,
            vol,
            kind: OptionKind::Call,
        }
    }

    #[test]
    fn norm_cdf_symmetry_and_tails() {
        assert_eq!(norm_cdf(0.0).unwrap(), 0.5);
        assert!((norm_cdf(10.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(norm_cdf(-10.0).unwrap() < 1e-12);
        // Frozen from an adaptive-quadrature evaluation of the normal density.
        assert!((norm_cdf(1.0).unwrap() - 0.841_344_746_068_542_9).abs() < 1e-13);
    }

    #[test]
    fn norm_cdf_rejects_non_finite() {
        assert!(norm_cdf(f64::NAN).is_err());
        assert!(norm_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn bs_intrinsic_at_expiry() {
        let r = bs_price(&call_terms(100.0, 100.0, 0.0, 0.05, 0.0, 0.2)).unwrap();
        assert_eq!(r.price, 0.0);
        assert_eq!(r.delta, 0.0);
        let itm = bs_price(&call_terms(120.0, 100.0, 0.0, 0.05, 0.0, 0.2)).unwrap();
        assert_eq!(itm.price, 20.0);
        assert_eq!(itm.delta, 1.0);
    }

    #[test]
    fn bs_atm_one_year() {
        // Frozen from the lognormal-quadrature oracle (see tests/pricing_oracle.rs).
        let r = bs_price(&call_terms(100.0, 100.0, 1.0, 0.05, 0.0, 0.2)).unwrap();
        assert!((r.price - 10.450_583_572_185_565).abs() < 1e-9, "price {}", r.price);
    }

    #[test]
    fn bs_zero_vol_is_discounted_forward() {
        let r = bs_price(&call_terms(100.0, 100.0, 1.0, 0.05, 0.0, 0.0)).unwrap();
        let expected = 100.0 - 100.0 * (-0.05f64).exp();
        assert!((r.price - expected).abs() < 1e-12);
        assert!((expected - 4.877_058).abs() < 1e-6);
    }

    #[test]
    fn bsm_reduces_to_bs_when_q_zero() {
        let t = call_terms(104.0, 97.0, 0.73, 0.031, 0.0, 0.27);
        assert_eq!(bs_price(&t).unwrap(), bsm_price(&t).unwrap());
    }

    #[test]
    fn bsm_deep_itm_delta_approaches_discounted_one() {
        let r = bsm_price(&call_terms(200.0, 100.0, 0.5, 0.05, 0.01, 0.2)).unwrap();
        let df_q = (-0.01f64 * 0.5).exp();
        assert!((r.delta - df_q).abs() < 1e-4, "delta {}", r.delta);
    }

    #[test]
    fn put_delta_sign() {
        let mut t = call_terms(90.0, 100.0, 1.0, 0.02, 0.01, 0.3);
        t.kind = OptionKind::Put;
        let r = bsm_price(&t).unwrap();
        assert!(r.delta > -1.0 && r.delta < 0.0);
        assert!(r.price > 0.0);
    }

    #[test]
    fn parity_holds() {
        let t = call_terms(113.0, 104.0, 1.3, 0.042, 0.017, 0.33);
        assert!(parity_gap(&t).unwrap().abs() < 1e-10);
        let q0 = call_terms(88.0, 104.0, 0.4, 0.01, 0.0, 0.5);
        assert!(parity_gap(&q0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn parity_requires_positive_tau() {
        let t = call_terms(100.0, 100.0, 0.0, 0.05, 0.0, 0.2);
        assert!(parity_gap(&t).is_err());
    }

    #[test]
    fn validate_rejects_bad_terms() {
        let mut t = call_terms(100.0, 100.0, 1.0, 0.05, 0.0, 0.2);
        t.spot = -1.0;
        assert!(matches!(
            bs_price(&t),
            Err(PricingError::InvalidTerms { name: "spot", .. })
        ));
        t.spot = 100.0;
        t.vol = f64::NAN;
        assert!(matches!(bs_price(&t), Err(PricingError::NonFinite { .. })));
    }
}
