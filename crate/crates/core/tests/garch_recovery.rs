//! GARCH fitting checked on simulated data: unconditional-variance
//! identity, parameter recovery, local optimality of the returned fit, and
//! forecast quality against the constant-variance baseline.

use optbench_core::volatility::{
    garch_fit, garch_log_likelihood, log_returns, vol_series, MAX_PERSISTENCE,
};
use optbench_testkit::garchsim;
use optbench_testkit::rng::OracleRng;

#[test]
fn iid_gaussian_unconditional_variance_recovered() {
    let mut rng = OracleRng::new(11);
    let target_var: f64 = 2.5e-4;
    let sd = target_var.sqrt();
    let returns: Vec<f64> = (0..10_000).map(|_| sd * rng.normal()).collect();
    let fit = garch_fit(&returns).unwrap();
    assert!(fit.params.is_valid());
    let uncond = fit.params.unconditional_variance();
    assert!(
        (uncond - target_var).abs() / target_var < 0.20,
        "unconditional variance {uncond} vs {target_var}"
    );
}

#[test]
fn recovers_persistence_of_simulated_path() {
    let path = garchsim::simulate(1e-6, 0.05, 0.90, 10_000, 7);
    let fit = garch_fit(&path.returns).unwrap();
    assert!(!fit.degenerate);
    let persistence = fit.params.persistence();
    assert!(
        (persistence - 0.95).abs() <= 0.05,
        "alpha + beta = {persistence}"
    );
    // MLE must beat the constant-variance baseline on its own data.
    let n = path.returns.len() as f64;
    let sample_var = path.returns.iter().map(|r| r * r).sum::<f64>() / n;
    let baseline = garch_log_likelihood(sample_var, 0.0, 0.0, &path.returns);
    assert!(
        fit.params.loglik > baseline,
        "fit {} vs baseline {}",
        fit.params.loglik,
        baseline
    );
}

#[test]
fn returned_optimum_is_locally_stable() {
    // Probe the optimizer's own coordinates: (ln omega, logit persistence,
    // logit share). No single +-1e-3 move may improve the likelihood.
    let path = garchsim::simulate(2e-6, 0.08, 0.85, 4_000, 21);
    let fit = garch_fit(&path.returns).unwrap();
    assert!(!fit.degenerate);
    let p = fit.params.persistence();
    let share = fit.params.alpha / p;
    let logit = |v: f64| (v / (1.0 - v)).ln();
    let x = [fit.params.omega.ln(), logit(p / MAX_PERSISTENCE), logit(share)];
    let eval = |x: &[f64; 3]| {
        let sigmoid = |t: f64| 1.0 / (1.0 + (-t).exp());
        let omega = x[0].exp();
        let pp = MAX_PERSISTENCE * sigmoid(x[1]);
        let sh = sigmoid(x[2]);
        garch_log_likelihood(omega, pp * sh, pp * (1.0 - sh), &path.returns)
    };
    let at_opt = eval(&x);
    assert!((at_opt - fit.params.loglik).abs() < 1e-6);
    for dim in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut probe = x;
            probe[dim] += sign * 1e-3;
            let ll = eval(&probe);
            assert!(
                ll <= at_opt + 1e-9,
                "probe dim {dim} sign {sign} improved: {ll} > {at_opt}"
            );
        }
    }
}

#[test]
fn forecasts_beat_constant_variance_on_garch_path() {
    let (omega, alpha, beta) = (1e-6, 0.12, 0.82);
    let path = garchsim::simulate(omega, alpha, beta, 8_000, 33);
    let fit = garch_fit(&path.returns).unwrap();
    // vol_series[i] forecasts the variance of step i+1; compare against the
    // simulator's true sigma2.
    let ppy = 252;
    let vols = vol_series(&fit.params, &path.returns, ppy).unwrap();
    let sample_var = path.returns.iter().map(|r| r * r).sum::<f64>() / path.returns.len() as f64;
    let mut fit_err = 0.0;
    let mut const_err = 0.0;
    let mut n = 0.0;
    for i in 0..path.returns.len() - 1 {
        let predicted_var = vols[i] * vols[i] / ppy as f64;
        let true_var = path.sigma2[i + 1];
        fit_err += (predicted_var - true_var) * (predicted_var - true_var);
        const_err += (sample_var - true_var) * (sample_var - true_var);
        n += 1.0;
    }
    fit_err /= n;
    const_err /= n;
    assert!(
        fit_err < const_err,
        "fitted forecast MSE {fit_err} vs constant {const_err}"
    );
}

#[test]
fn gbm_log_returns_mean_within_three_standard_errors() {
    // Zero-drift GBM: log returns are N(-v/2 dt, v dt); with sigma = 0.2,
    // dt = 1/252 the mean correction is ~-7.9e-5, far inside the check band.
    let mut rng = OracleRng::new(5);
    let sigma = 0.2;
    let dt: f64 = 1.0 / 252.0;
    let mut price = 100.0;
    let mut prices = vec![price];
    for _ in 0..500 {
        price *= ((-0.5 * sigma * sigma) * dt + sigma * dt.sqrt() * rng.normal()).exp();
        prices.push(price);
    }
    let returns = log_returns(&prices).unwrap();
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let se = (var / n).sqrt();
    assert!(mean.abs() < 3.0 * se, "mean {mean} vs 3 se {}", 3.0 * se);
}

#[test]
fn fits_are_stationary_across_seeds() {
    for seed in 0..5 {
        let path = garchsim::simulate(5e-7, 0.10, 0.85, 2_000, 100 + seed);
        let fit = garch_fit(&path.returns).unwrap();
        assert!(fit.params.is_valid());
        assert!(fit.params.persistence() < 1.0);
        assert!(fit.params.omega > 0.0);
    }
}
