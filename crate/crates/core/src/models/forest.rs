//! Random forest regression: bagged CART trees with k-of-d feature
//! subsampling at every node.

use super::tree::{grow_tree, RegressionTree, TreeParams, VarianceObjective};
use super::ModelError;
use crate::math;
use crate::matrix::DenseMatrix;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features drawn per node (k of d); `None` searches every feature.
    pub feature_subset: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            feature_subset: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<RegressionTree>,
}

impl RandomForest {
    pub(crate) fn from_trees(trees: Vec<RegressionTree>) -> Self {
        Self { trees }
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict(&self, x: &DenseMatrix) -> Vec<f64> {
        x.row_iter().map(|r| self.predict_row(r)).collect()
    }
}

/// Fits `n_trees` trees, each on a seeded bootstrap resample (when enabled)
/// with `feature_subset` candidate features per node. Prediction is the
/// tree mean.
pub fn fit_random_forest(
    x: &DenseMatrix,
    y: &[f64],
    params: &ForestParams,
    tree: &TreeParams,
) -> Result<RandomForest, ModelError> {
    tree.validate()?;
    if x.rows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            rows: x.rows(),
            targets: y.len(),
        });
    }
    if params.n_trees < 1 {
        return Err(ModelError::Config("n_trees must be >= 1"));
    }
    let d = x.cols();
    let k = params.feature_subset.unwrap_or(d);
    if k < 1 || k > d {
        return Err(ModelError::Config("feature_subset must satisfy 1 <= k <= d"));
    }
    let n = x.rows();
    if n < 2 * tree.min_samples_leaf {
        return Err(ModelError::TooFewRows {
            rows: n,
            needed: 2 * tree.min_samples_leaf,
        });
    }

    let objective = VarianceObjective { y, weights: None };
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        // One independent stream per tree, so results do not depend on
        // fitting order.
        let mut rng = ChaCha12Rng::seed_from_u64(math::mix_seed(
            params.seed,
            "forest-tree",
            t as u64,
        ));
        let indices: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let sampler = if k < d { Some((&mut rng, k)) } else { None };
        trees.push(grow_tree(x, &indices, &objective, tree, sampler));
    }
    Ok(RandomForest::from_trees(trees))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fit_tree;

    fn toy() -> (DenseMatrix, Vec<f64>) {
        let mut data = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let v = i as f64 / 4.0;
            data.extend_from_slice(&[v, (i % 5) as f64]);
            y.push(3.0 * v + (i % 5) as f64);
        }
        (DenseMatrix::from_vec(data, 40, 2), y)
    }

    #[test]
    fn degenerates_to_cart() {
        let (x, y) = toy();
        let params = ForestParams {
            n_trees: 1,
            feature_subset: Some(2),
            bootstrap: false,
            seed: 9,
        };
        let forest = fit_random_forest(&x, &y, &params, &TreeParams::default()).unwrap();
        let cart = fit_tree(&x, &y, &TreeParams::default(), None).unwrap();
        assert_eq!(forest.trees()[0], cart);
    }

    #[test]
    fn same_seed_same_predictions() {
        let (x, y) = toy();
        let params = ForestParams {
            n_trees: 10,
            feature_subset: Some(1),
            bootstrap: true,
            seed: 42,
        };
        let a = fit_random_forest(&x, &y, &params, &TreeParams::default()).unwrap();
        let b = fit_random_forest(&x, &y, &params, &TreeParams::default()).unwrap();
        assert_eq!(a.predict(&x), b.predict(&x));
        let c = fit_random_forest(
            &x,
            &y,
            &ForestParams { seed: 43, ..params },
            &TreeParams::default(),
        )
        .unwrap();
        assert_ne!(a.predict(&x), c.predict(&x));
    }

    #[test]
    fn rejects_bad_feature_subset() {
        let (x, y) = toy();
        let params = ForestParams {
            n_trees: 2,
            feature_subset: Some(3),
            bootstrap: true,
            seed: 0,
        };
        assert!(matches!(
            fit_random_forest(&x, &y, &params, &TreeParams::default()),
            Err(ModelError::Config(_))
        ));
    }
}
