//! Reference GARCH(1,1) path simulation from the textbook recursion.

use crate::rng::OracleRng;

/// A simulated zero-mean GARCH(1,1) path: returns and the true conditional
/// variance that generated each return (`sigma2[t]` belongs to
/// `returns[t]`).
pub struct GarchPath {
    pub returns: Vec<f64>,
    pub sigma2: Vec<f64>,
}

/// Simulates `n` steps starting from the stationary variance
/// `omega / (1 - alpha - beta)`.
pub fn simulate(omega: f64, alpha: f64, beta: f64, n: usize, seed: u64) -> GarchPath {
    assert!(omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0);
    let mut rng = OracleRng::new(seed);
    let mut sigma2 = omega / (1.0 - alpha - beta);
    let mut returns = Vec::with_capacity(n);
    let mut variances = Vec::with_capacity(n);
    for _ in 0..n {
        let eps = sigma2.sqrt() * rng.normal();
        variances.push(sigma2);
        returns.push(eps);
        sigma2 = omega + alpha * eps * eps + beta * sigma2;
    }
    GarchPath {
        returns,
        sigma2: variances,
    }
}
