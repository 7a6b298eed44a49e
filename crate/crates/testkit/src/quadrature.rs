//! Risk-neutral pricing by numeric quadrature over the lognormal terminal
//! density, plus a quadrature normal CDF. Reference-quality, not fast.

const Z_MAX: f64 = 16.0;
const SIMPSON_STEPS: usize = 20_000;

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * core::f64::consts::PI).sqrt()
}

/// Composite Simpson on [a, b] with an even number of steps.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    assert!(steps % 2 == 0 && steps >= 2);
    let h = (b - a) / steps as f64;
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Standard normal CDF by quadrature; absolute error far below 1e-12.
pub fn norm_cdf(x: f64) -> f64 {
    if x <= -Z_MAX {
        return 0.0;
    }
    if x >= Z_MAX {
        return 1.0;
    }
    let tail = simpson(phi, 0.0, x.abs(), 8_000);
    if x >= 0.0 {
        0.5 + tail
    } else {
        0.5 - tail
    }
}

/// European option price as the discounted expected payoff under the
/// risk-neutral lognormal terminal distribution, integrating only over the
/// in-the-money region so the integrand stays smooth.
pub fn option_price(
    spot: f64,
    strike: f64,
    tau: f64,
    rate: f64,
    div_yield: f64,
    vol: f64,
    is_call: bool,
) -> f64 {
    if tau == 0.0 {
        return if is_call {
            (spot - strike).max(0.0)
        } else {
            (strike - spot).max(0.0)
        };
    }
    let v = vol * tau.sqrt();
    let m = (rate - div_yield - 0.5 * vol * vol) * tau;
    let df = (-rate * tau).exp();
    if v == 0.0 {
        let terminal = spot * m.exp();
        return if is_call {
            df * (terminal - strike).max(0.0)
        } else {
            df * (strike - terminal).max(0.0)
        };
    }
    // Kink location: terminal(z_k) == strike.
    let z_k = ((strike / spot).ln() - m) / v;
    let terminal = |z: f64| spot * (m + v * z).exp();
    if is_call {
        if z_k >= Z_MAX {
            return 0.0;
        }
        let lo = z_k.max(-Z_MAX);
        df * simpson(|z| (terminal(z) - strike) * phi(z), lo, Z_MAX, SIMPSON_STEPS)
    } else {
        if z_k <= -Z_MAX {
            return 0.0;
        }
        let hi = z_k.min(Z_MAX);
        df * simpson(|z| (strike - terminal(z)) * phi(z), -Z_MAX, hi, SIMPSON_STEPS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_points() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        // Abramowitz & Stegun 26.2: Phi(1) = 0.8413447460685429.
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-13);
        assert!((norm_cdf(-1.96) - 0.024_997_895_148_220_43).abs() < 1e-12);
    }

    #[test]
    fn parity_of_quadrature_prices() {
        let (s, k, tau, r, q, vol) = (103.0, 96.0, 0.8, 0.04, 0.015, 0.3);
        let c = option_price(s, k, tau, r, q, vol, true);
        let p = option_price(s, k, tau, r, q, vol, false);
        let forward = s * (-q * tau as f64).exp() - k * (-r * tau as f64).exp();
        assert!((c - p - forward).abs() < 1e-9, "gap {}", c - p - forward);
    }

    #[test]
    fn zero_vol_is_discounted_forward_payoff() {
        let c = option_price(100.0, 90.0, 1.0, 0.05, 0.0, 0.0, true);
        let expected = 100.0 - 90.0 * (-0.05f64).exp();
        assert!((c - expected).abs() < 1e-12);
    }
}
