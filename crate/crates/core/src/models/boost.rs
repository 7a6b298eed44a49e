//! Gradient boosting under squared loss.
//!
//! The first-order variant fits each round's tree to the current residuals
//! by variance reduction. The second-order variant scores splits with the
//! regularized gain
//!
//!   1/2 [ GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda) ] - gamma
//!
//! and sets leaf weights to -G/(H+lambda). With lambda = gamma = 0 and
//! squared loss the two coincide round for round.

use super::tree::{grow_tree, GradHessObjective, RegressionTree, VarianceObjective};
use super::{BoostParams, GradPair, ModelError};
use crate::math;
use crate::matrix::DenseMatrix;
use alloc::vec::Vec;

/// Additive tree model: prediction = base + learning_rate * sum(trees).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoost {
    base: f64,
    learning_rate: f64,
    trees: Vec<RegressionTree>,
}

impl GradientBoost {
    pub(crate) fn from_parts(base: f64, learning_rate: f64, trees: Vec<RegressionTree>) -> Self {
        Self {
            base,
            learning_rate,
            trees,
        }
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.base
            + self.learning_rate
                * self
                    .trees
                    .iter()
                    .map(|t| t.predict_row(row))
                    .sum::<f64>()
    }

    pub fn predict(&self, x: &DenseMatrix) -> Vec<f64> {
        x.row_iter().map(|r| self.predict_row(r)).collect()
    }

    /// Predictions truncated after `rounds` trees; handy for monitoring
    /// training curves.
    pub fn predict_at_round(&self, x: &DenseMatrix, rounds: usize) -> Vec<f64> {
        x.row_iter()
            .map(|row| {
                self.base
                    + self.learning_rate
                        * self.trees[..rounds.min(self.trees.len())]
                            .iter()
                            .map(|t| t.predict_row(row))
                            .sum::<f64>()
            })
            .collect()
    }
}

/// Squared-loss derivative pairs: g = prediction - target, h = 1.
pub fn squared_loss_pairs(predictions: &[f64], targets: &[f64]) -> Vec<GradPair> {
    predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| GradPair { g: p - y, h: 1.0 })
        .collect()
}

fn check_inputs(x: &DenseMatrix, y: &[f64], params: &BoostParams) -> Result<(), ModelError> {
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
    Ok(())
}

/// First-order boosting: round m fits a tree to the residuals
/// `y - F_{m-1}(x)` and steps `F_m = F_{m-1} + learning_rate * tree`.
pub fn fit_gb_first_order(
    x: &DenseMatrix,
    y: &[f64],
    params: &BoostParams,
) -> Result<GradientBoost, ModelError> {
    check_inputs(x, y, params)?;
    let n = x.rows();
    let base = math::mean(y);
    let indices: Vec<usize> = (0..n).collect();

    let mut current: Vec<f64> = alloc::vec![base; n];
    let mut residuals: Vec<f64> = alloc::vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for i in 0..n {
            residuals[i] = y[i] - current[i];
        }
        let objective = VarianceObjective {
            y: &residuals,
            weights: None,
        };
        let tree = grow_tree(x, &indices, &objective, &params.tree, None);
        for i in 0..n {
            current[i] += params.learning_rate * tree.predict_row(x.row(i));
        }
        trees.push(tree);
    }
    Ok(GradientBoost::from_parts(base, params.learning_rate, trees))
}

/// Second-order boosting with the regularized gain and closed-form leaf
/// weights.
pub fn fit_gb_second_order(
    x: &DenseMatrix,
    y: &[f64],
    params: &BoostParams,
) -> Result<GradientBoost, ModelError> {
    check_inputs(x, y, params)?;
    let n = x.rows();
    let base = math::mean(y);
    let indices: Vec<usize> = (0..n).collect();

    let mut current: Vec<f64> = alloc::vec![base; n];
    let mut grad: Vec<f64> = alloc::vec![0.0; n];
    let hess: Vec<f64> = alloc::vec![1.0; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for i in 0..n {
            grad[i] = current[i] - y[i];
        }
        let objective = GradHessObjective {
            grad: &grad,
            hess: &hess,
            lambda: params.lambda,
            gamma: params.gamma,
        };
        let tree = grow_tree(x, &indices, &objective, &params.tree, None);
        for i in 0..n {
            current[i] += params.learning_rate * tree.predict_row(x.row(i));
        }
        trees.push(tree);
    }
    Ok(GradientBoost::from_parts(base, params.learning_rate, trees))
}
