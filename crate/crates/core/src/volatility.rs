//! GARCH(1,1) volatility estimation on log returns.
//!
//! Zero-mean Gaussian GARCH(1,1):
//!
//!   sigma2[t+1] = omega + alpha * r[t]^2 + beta * sigma2[t]
//!
//! seeded with the sample variance. Fitting maximizes the Gaussian
//! log-likelihood with a derivative-free simplex search over
//! (ln omega, logit persistence, logit share), multi-started from three
//! fixed points, followed by a coordinate probe polish so the returned
//! optimum is locally stable. A fit that cannot beat the constant-variance
//! baseline is reported as degenerate and carries the baseline parameters.

use crate::math;
use alloc::vec::Vec;
use thiserror::Error;

/// Hard cap on alpha + beta, keeping fits inside the stationarity region.
pub const MAX_PERSISTENCE: f64 = 0.999;

/// Trading-day convention used by the callers that annualize variances.
pub const TRADING_DAYS_PER_YEAR: usize = 252;

const MIN_FIT_LEN: usize = 100;
const VAR_FLOOR: f64 = 1e-18;
const LL_TOL: f64 = 1e-8;
const NLL_PENALTY: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub loglik: f64,
}

impl GarchParams {
    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    /// omega / (1 - alpha - beta), the long-run variance.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }

    pub fn is_valid(&self) -> bool {
        self.omega > 0.0 && self.alpha >= 0.0 && self.beta >= 0.0 && self.persistence() < 1.0
    }
}

/// Fit outcome; `degenerate` marks a fall-back to the constant-variance
/// baseline (zero sample variance, or an optimizer that failed to improve
/// on it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchFit {
    pub params: GarchParams,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VolError {
    #[error("series too short: {len} observations, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("non-positive price at index {index}: {value}")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("non-finite value at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },
    #[error("invalid GARCH parameters: omega {omega}, alpha {alpha}, beta {beta}")]
    InvalidParams { omega: f64, alpha: f64, beta: f64 },
}

/// Log returns `ln(p[i+1] / p[i])` of a positive price series.
pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>, VolError> {
    if prices.len() < 2 {
        return Err(VolError::SeriesTooShort {
            len: prices.len(),
            min: 2,
        });
    }
    for (i, &p) in prices.iter().enumerate() {
        if !p.is_finite() {
            return Err(VolError::NonFinite { index: i, value: p });
        }
        if p <= 0.0 {
            return Err(VolError::NonPositivePrice { index: i, value: p });
        }
    }
    Ok(prices
        .windows(2)
        .map(|w| math::ln(w[1] / w[0]))
        .collect())
}

/// Gaussian log-likelihood of a zero-mean GARCH(1,1) on `returns`, with the
/// variance recursion seeded at the sample variance.
pub fn garch_log_likelihood(omega: f64, alpha: f64, beta: f64, returns: &[f64]) -> f64 {
    if !(omega > 0.0) || alpha < 0.0 || beta < 0.0 || alpha + beta >= 1.0 {
        return -NLL_PENALTY;
    }
    let mut sigma2 = math::mean_square(returns).max(VAR_FLOOR);
    let half_ln_2pi = 0.5 * math::ln(2.0 * core::f64::consts::PI);
    let mut ll = 0.0;
    for &r in returns {
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return -NLL_PENALTY;
        }
        ll -= half_ln_2pi + 0.5 * math::ln(sigma2) + 0.5 * r * r / sigma2;
        sigma2 = omega + alpha * r * r + beta * sigma2;
    }
    if ll.is_finite() {
        ll
    } else {
        -NLL_PENALTY
    }
}

/// Fits GARCH(1,1) by maximum likelihood. Requires at least 100 returns.
pub fn garch_fit(returns: &[f64]) -> Result<GarchFit, VolError> {
    if returns.len() < MIN_FIT_LEN {
        return Err(VolError::SeriesTooShort {
            len: returns.len(),
            min: MIN_FIT_LEN,
        });
    }
    for (i, &r) in returns.iter().enumerate() {
        if !r.is_finite() {
            return Err(VolError::NonFinite { index: i, value: r });
        }
    }

    let sample_var = math::mean_square(returns);
    let baseline_omega = sample_var.max(VAR_FLOOR);
    let baseline = GarchParams {
        omega: baseline_omega,
        alpha: 0.0,
        beta: 0.0,
        loglik: garch_log_likelihood(baseline_omega, 0.0, 0.0, returns),
    };

    if sample_var <= VAR_FLOOR {
        // Zero sample variance: nothing to fit.
        return Ok(GarchFit {
            params: baseline,
            degenerate: true,
        });
    }

    let nll = |x: &[f64; 3]| -> f64 {
        let (omega, alpha, beta) = decode(x);
        -garch_log_likelihood(omega, alpha, beta, returns)
    };

    // Fixed multi-start points as (alpha, beta) pairs.
    let starts = [(0.05, 0.90), (0.10, 0.60), (0.02, 0.30)];
    let mut best: Option<([f64; 3], f64)> = None;
    for (alpha0, beta0) in starts {
        let p0 = alpha0 + beta0;
        let x0 = [
            math::ln(sample_var * (1.0 - p0)),
            logit(p0 / MAX_PERSISTENCE),
            logit(alpha0 / p0),
        ];
        let (x, f) = nelder_mead(&nll, x0);
        if best.map_or(true, |(_, fb)| f < fb) {
            best = Some((x, f));
        }
    }
    let (mut x, mut f) = best.expect("at least one start");

    // Coordinate probe polish: no +-1e-3 single-coordinate move may improve
    // the likelihood at the returned point.
    const PROBE: f64 = 1e-3;
    for _ in 0..2000 {
        let mut improved = false;
        for dim in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut cand = x;
                cand[dim] += sign * PROBE;
                let fc = nll(&cand);
                if fc < f {
                    x = cand;
                    f = fc;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }

    let (omega, alpha, beta) = decode(&x);
    let loglik = garch_log_likelihood(omega, alpha, beta, returns);
    if loglik >= baseline.loglik - 1e-6 {
        Ok(GarchFit {
            params: GarchParams {
                omega,
                alpha,
                beta,
                loglik,
            },
            degenerate: false,
        })
    } else {
        Ok(GarchFit {
            params: baseline,
            degenerate: true,
        })
    }
}

/// Annualized conditional-volatility series. Entry `i` is the one-step
/// volatility implied after observing `returns[i]`, annualized by
/// `sqrt(periods_per_year)`; the recursion is seeded at the sample variance.
pub fn vol_series(
    params: &GarchParams,
    returns: &[f64],
    periods_per_year: usize,
) -> Result<Vec<f64>, VolError> {
    if !params.is_valid() {
        return Err(VolError::InvalidParams {
            omega: params.omega,
            alpha: params.alpha,
            beta: params.beta,
        });
    }
    if returns.is_empty() {
        return Err(VolError::SeriesTooShort { len: 0, min: 1 });
    }
    let ppy = periods_per_year as f64;
    let mut sigma2 = math::mean_square(returns).max(VAR_FLOOR);
    let mut out = Vec::with_capacity(returns.len());
    for &r in returns {
        sigma2 = params.omega + params.alpha * r * r + params.beta * sigma2;
        out.push(math::sqrt(sigma2 * ppy));
    }
    Ok(out)
}

// Unconstrained coordinates -> (omega, alpha, beta).
// x = (ln omega, logit(persistence / MAX_PERSISTENCE), logit(alpha share)).
fn decode(x: &[f64; 3]) -> (f64, f64, f64) {
    let omega = math::exp(x[0]);
    let p = MAX_PERSISTENCE * sigmoid(x[1]);
    let share = sigmoid(x[2]);
    (omega, p * share, p * (1.0 - share))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    math::ln(p / (1.0 - p))
}

// Standard Nelder-Mead on a 3-simplex; converges when the function spread
// falls below LL_TOL (relative).
fn nelder_mead(f: &dyn Fn(&[f64; 3]) -> f64, x0: [f64; 3]) -> ([f64; 3], f64) {
    const REFLECK: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    const INIT_STEP: f64 = 0.5;
    const MAX_ITER: usize = 600;

    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((x0, f(&x0)));
    for dim in 0..3 {
        let mut x = x0;
        x[dim] += INIT_STEP;
        simplex.push((x, f(&x)));
    }

    for _ in 0..MAX_ITER {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[3].1;
        if (worst - best).abs() <= LL_TOL * (1.0 + best.abs()) {
            break;
        }

        let mut centroid = [0.0; 3];
        for (x, _) in &simplex[..3] {
            for d in 0..3 {
                centroid[d] += x[d] / 3.0;
            }
        }
        let point = |coef: f64| -> [f64; 3] {
            let mut x = [0.0; 3];
            for d in 0..3 {
                x[d] = centroid[d] + coef * (centroid[d] - simplex[3].0[d]);
            }
            x
        };

        let xr = point(REFLECK);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = point(EXPAND);
            let fe = f(&xe);
            simplex[3] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (xr, fr);
        } else {
            let xc = if fr < simplex[3].1 {
                point(CONTRACT)
            } else {
                point(-CONTRACT)
            };
            let fc = f(&xc);
            if fc < simplex[3].1.min(fr) {
                simplex[3] = (xc, fc);
            } else {
                let x0best = simplex[0].0;
                for i in 1..4 {
                    for d in 0..3 {
                        simplex[i].0[d] = x0best[d] + SHRINK * (simplex[i].0[d] - x0best[d]);
                    }
                    simplex[i].1 = f(&simplex[i].0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
    simplex[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn log_returns_definition() {
        assert_eq!(log_returns(&[1.0, 1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        let r = log_returns(&[1.0, core::f64::consts::E]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_returns_rejects_nonpositive() {
        assert!(matches!(
            log_returns(&[1.0, -2.0]),
            Err(VolError::NonPositivePrice { index: 1, .. })
        ));
        assert!(log_returns(&[1.0]).is_err());
    }

    #[test]
    fn constant_returns_degenerate() {
        let fit = garch_fit(&[0.001; 200]).unwrap();
        // Zero-mean model: constant nonzero returns still carry variance, so
        // force the truly flat case too.
        assert!(fit.params.is_valid());
        let flat = garch_fit(&[0.0; 200]).unwrap();
        assert!(flat.degenerate);
        assert!(flat.params.is_valid());
        assert_eq!(flat.params.alpha, 0.0);
        assert_eq!(flat.params.beta, 0.0);
    }

    #[test]
    fn vol_series_constant_variance_reduction() {
        let params = GarchParams {
            omega: 4e-4,
            alpha: 0.0,
            beta: 0.0,
            loglik: 0.0,
        };
        let returns = vec![0.01, -0.02, 0.0, 0.005];
        let out = vol_series(&params, &returns, 252).unwrap();
        let expected = (4e-4f64 * 252.0).sqrt();
        for v in out {
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn vol_series_shock_monotonicity() {
        let params = GarchParams {
            omega: 1e-5,
            alpha: 0.1,
            beta: 0.8,
            loglik: 0.0,
        };
        let mut shocked = vec![0.0; 50];
        shocked[20] = 0.05;
        let calm = vec![0.0; 50];
        let vs = vol_series(&params, &shocked, 252).unwrap();
        let vc = vol_series(&params, &calm, 252).unwrap();
        assert!(vs[20] > vc[20]);
        assert!(vs[21] > vc[21]);
    }

    #[test]
    fn vol_series_positive_everywhere() {
        let params = GarchParams {
            omega: 1e-6,
            alpha: 0.05,
            beta: 0.9,
            loglik: 0.0,
        };
        let out = vol_series(&params, &[0.0; 10], 252).unwrap();
        assert_eq!(out.len(), 10);
        assert!(out.iter().all(|v| *v > 0.0));
    }
}
