//! Gaussian natural-gradient boosting.
//!
//! Each row carries a predictive Normal distribution parameterized as
//! theta = (mu, log sigma). Rounds fit one regression tree per parameter to
//! the natural gradient of the negative log-likelihood, i.e. the plain
//! gradient preconditioned by the inverse Fisher information, which for the
//! Gaussian in these coordinates is diag(1/sigma^2, 2):
//!
//!   natgrad_mu        = mu - y
//!   natgrad_log_sigma = (1 - (y - mu)^2 / sigma^2) / 2
//!
//! A halving line search on the training likelihood picks each round's step
//! scale, so the mean NLL never increases.

use super::tree::{grow_tree, RegressionTree, VarianceObjective};
use super::{BoostParams, ModelError};
use crate::math;
use crate::matrix::DenseMatrix;
use alloc::vec;
use alloc::vec::Vec;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;
const MIN_LINE_SEARCH_SCALE: f64 = 1e-6;

/// Predictive Normal distribution for one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrediction {
    pub mu: f64,
    pub log_sigma: f64,
}

impl GaussianPrediction {
    pub fn sigma(&self) -> f64 {
        math::exp(self.log_sigma)
    }

    /// Negative log-likelihood of `y` under this distribution.
    pub fn nll(&self, y: f64) -> f64 {
        let z = (y - self.mu) / self.sigma();
        HALF_LN_2PI + self.log_sigma + 0.5 * z * z
    }
}

/// Natural gradient of the per-sample NLL at `pred`, in (mu, log sigma)
/// coordinates: the Fisher-preconditioned gradient.
pub fn natural_gradient(y: f64, pred: &GaussianPrediction) -> (f64, f64) {
    let sigma2 = math::exp(2.0 * pred.log_sigma);
    let diff = y - pred.mu;
    (pred.mu - y, 0.5 * (1.0 - diff * diff / sigma2))
}

#[derive(Debug, Clone, PartialEq)]
struct Stage {
    scale: f64,
    mu_tree: RegressionTree,
    log_sigma_tree: RegressionTree,
}

/// Fitted model: theta(x) = theta0 - learning_rate * sum(scale_m * trees_m(x)).
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalGradientBoost {
    mu0: f64,
    log_sigma0: f64,
    learning_rate: f64,
    stages: Vec<Stage>,
}

impl NaturalGradientBoost {
    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn log_sigma0(&self) -> f64 {
        self.log_sigma0
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn predict_dist_row(&self, row: &[f64]) -> GaussianPrediction {
        let mut mu = self.mu0;
        let mut log_sigma = self.log_sigma0;
        for stage in &self.stages {
            let step = self.learning_rate * stage.scale;
            mu -= step * stage.mu_tree.predict_row(row);
            log_sigma -= step * stage.log_sigma_tree.predict_row(row);
        }
        GaussianPrediction { mu, log_sigma }
    }

    /// Point prediction: the predictive mean.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_dist_row(row).mu
    }

    pub fn predict(&self, x: &DenseMatrix) -> Vec<f64> {
        x.row_iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn predict_dist(&self, x: &DenseMatrix) -> Vec<GaussianPrediction> {
        x.row_iter().map(|r| self.predict_dist_row(r)).collect()
    }

    /// Mean NLL of `(x, y)` under the predictive distributions.
    pub fn mean_nll(&self, x: &DenseMatrix, y: &[f64]) -> f64 {
        let total: f64 = x
            .row_iter()
            .zip(y)
            .map(|(row, &t)| self.predict_dist_row(row).nll(t))
            .sum();
        total / y.len() as f64
    }

    pub(crate) fn from_parts(
        mu0: f64,
        log_sigma0: f64,
        learning_rate: f64,
        stages: Vec<(f64, RegressionTree, RegressionTree)>,
    ) -> Self {
        Self {
            mu0,
            log_sigma0,
            learning_rate,
            stages: stages
                .into_iter()
                .map(|(scale, mu_tree, log_sigma_tree)| Stage {
                    scale,
                    mu_tree,
                    log_sigma_tree,
                })
                .collect(),
        }
    }

    pub(crate) fn parts(&self) -> (f64, f64, f64, Vec<(f64, &RegressionTree, &RegressionTree)>) {
        (
            self.mu0,
            self.log_sigma0,
            self.learning_rate,
            self.stages
                .iter()
                .map(|s| (s.scale, &s.mu_tree, &s.log_sigma_tree))
                .collect(),
        )
    }
}

fn mean_nll_of(mu: &[f64], log_sigma: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..y.len() {
        let p = GaussianPrediction {
            mu: mu[i],
            log_sigma: log_sigma[i],
        };
        total += p.nll(y[i]);
    }
    total / y.len() as f64
}

/// Fits Gaussian NGBoost. Both parameters start at the unconditional MLE;
/// a zero-variance target cannot seed `log sigma` and is rejected.
pub fn fit_ngb_gaussian(
    x: &DenseMatrix,
    y: &[f64],
    params: &BoostParams,
) -> Result<NaturalGradientBoost, ModelError> {
    params.validate()?;
    if x.rows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            rows: x.rows(),
            targets: y.len(),
        });
    }
    if x.rows() < 2 * params.tree.min_samples_leaf {
        return Err(ModelError::TooFewRows {
            rows: x.rows(),
            needed: 2 * params.tree.min_samples_leaf,
        });
    }
    let n = x.rows();
    let mu0 = math::mean(y);
    let var0 = math::population_variance(y);
    if var0 <= 0.0 {
        return Err(ModelError::ZeroVarianceTarget);
    }
    let log_sigma0 = 0.5 * math::ln(var0);

    let indices: Vec<usize> = (0..n).collect();
    let mut mu = vec![mu0; n];
    let mut log_sigma = vec![log_sigma0; n];
    let mut grad_mu = vec![0.0; n];
    let mut grad_ls = vec![0.0; n];
    let mut stages = Vec::with_capacity(params.n_rounds);
    let mut current_nll = mean_nll_of(&mu, &log_sigma, y);

    for _ in 0..params.n_rounds {
        for i in 0..n {
            let pred = GaussianPrediction {
                mu: mu[i],
                log_sigma: log_sigma[i],
            };
            let (gm, gs) = natural_gradient(y[i], &pred);
            grad_mu[i] = gm;
            grad_ls[i] = gs;
        }

        let mu_tree = grow_tree(
            x,
            &indices,
            &VarianceObjective {
                y: &grad_mu,
                weights: None,
            },
            &params.tree,
            None,
        );
        let ls_tree = grow_tree(
            x,
            &indices,
            &VarianceObjective {
                y: &grad_ls,
                weights: None,
            },
            &params.tree,
            None,
        );

        let step_mu: Vec<f64> = (0..n).map(|i| mu_tree.predict_row(x.row(i))).collect();
        let step_ls: Vec<f64> = (0..n).map(|i| ls_tree.predict_row(x.row(i))).collect();

        // Halving line search on the training NLL; scale 0 skips the round.
        let mut scale = 1.0;
        let mut accepted = 0.0;
        let mut accepted_nll = current_nll;
        while scale >= MIN_LINE_SEARCH_SCALE {
            let cand_mu: Vec<f64> = (0..n)
                .map(|i| mu[i] - params.learning_rate * scale * step_mu[i])
                .collect();
            let cand_ls: Vec<f64> = (0..n)
                .map(|i| log_sigma[i] - params.learning_rate * scale * step_ls[i])
                .collect();
            let cand_nll = mean_nll_of(&cand_mu, &cand_ls, y);
            if cand_nll <= current_nll {
                accepted = scale;
                accepted_nll = cand_nll;
                mu = cand_mu;
                log_sigma = cand_ls;
                break;
            }
            scale *= 0.5;
        }
        current_nll = accepted_nll;
        stages.push((accepted, mu_tree, ls_tree));
    }

    Ok(NaturalGradientBoost::from_parts(
        mu0,
        log_sigma0,
        params.learning_rate,
        stages,
    ))
}
