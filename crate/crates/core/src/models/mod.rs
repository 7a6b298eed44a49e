//! From-scratch regression learners: CART, random forest, first- and
//! second-order gradient boosting (exact or histogram splits), Gaussian
//! natural-gradient boosting, and grid tuning with a chronological
//! validation split.
//!
//! Every fit is a pure function of (features, targets, params, seed).

mod boost;
mod forest;
mod ngboost;
mod text;
mod tree;
mod tune;

pub use boost::{fit_gb_first_order, fit_gb_second_order, squared_loss_pairs, GradientBoost};
pub use forest::{fit_random_forest, ForestParams, RandomForest};
pub use ngboost::{fit_ngb_gaussian, natural_gradient, GaussianPrediction, NaturalGradientBoost};
pub use tree::{fit_tree, Node, RegressionTree, SplitMode, TreeParams};
pub use tune::{tune, TuneOutcome};

use crate::matrix::DenseMatrix;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("dimension mismatch: {rows} rows vs {targets} targets")]
    DimensionMismatch { rows: usize, targets: usize },
    #[error("too few rows: {rows}, need at least {needed}")]
    TooFewRows { rows: usize, needed: usize },
    #[error("target has zero variance; cannot initialize a Gaussian fit")]
    ZeroVarianceTarget,
    #[error("model dump parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// First- and second-order loss derivatives of one sample. Under squared
/// loss `g = prediction - target` and `h = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradPair {
    pub g: f64,
    pub h: f64,
}

/// Whether a boosting round uses residual targets or the second-order
/// gain/leaf-weight closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoostOrder {
    First,
    Second,
}

/// Boosting controls shared by the gradient and natural-gradient learners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf weights (second order only).
    pub lambda: f64,
    /// Per-split penalty (second order only).
    pub gamma: f64,
    pub tree: TreeParams,
    pub order: BoostOrder,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            n_rounds: 100,
            learning_rate: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            tree: TreeParams {
                max_depth: 3,
                ..TreeParams::default()
            },
            order: BoostOrder::Second,
        }
    }
}

impl BoostParams {
    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if self.n_rounds < 1 {
            return Err(ModelError::Config("n_rounds must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(ModelError::Config("learning_rate must be in (0, 1]"));
        }
        if self.lambda < 0.0 {
            return Err(ModelError::Config("lambda must be >= 0"));
        }
        if self.gamma < 0.0 {
            return Err(ModelError::Config("gamma must be >= 0"));
        }
        self.tree.validate()
    }
}

/// A fully specified learner; fitting one of these is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Cart(TreeParams),
    RandomForest { forest: ForestParams, tree: TreeParams },
    GbFirstOrder(BoostParams),
    GbSecondOrder(BoostParams),
    NgbGaussian(BoostParams),
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Cart(_) => "cart",
            ModelSpec::RandomForest { .. } => "random-forest",
            ModelSpec::GbFirstOrder(_) => "gb-first-order",
            ModelSpec::GbSecondOrder(_) => "gb-second-order",
            ModelSpec::NgbGaussian(_) => "ngb-gaussian",
        }
    }

    /// Canonical one-line parameter string, used for provenance records and
    /// strategy-invariant checks.
    pub fn describe(&self) -> String {
        fn tree(t: &TreeParams) -> String {
            let mode = match t.split_mode {
                SplitMode::Exact => String::from("exact"),
                SplitMode::Histogram => format!("histogram(n_bins={})", t.n_bins),
            };
            format!(
                "max_depth={} min_samples_leaf={} split={}",
                t.max_depth, t.min_samples_leaf, mode
            )
        }
        fn boost(b: &BoostParams) -> String {
            format!(
                "n_rounds={} learning_rate={} lambda={} gamma={} {}",
                b.n_rounds,
                b.learning_rate,
                b.lambda,
                b.gamma,
                tree(&b.tree)
            )
        }
        match self {
            ModelSpec::Cart(t) => format!("cart {}", tree(t)),
            ModelSpec::RandomForest { forest, tree: t } => {
                let k = forest
                    .feature_subset
                    .map_or(String::from("all"), |k| format!("{k}"));
                format!(
                    "random-forest n_trees={} feature_subset={} bootstrap={} seed={} {}",
                    forest.n_trees, k, forest.bootstrap, forest.seed, tree(t)
                )
            }
            ModelSpec::GbFirstOrder(b) => format!("gb-first-order {}", boost(b)),
            ModelSpec::GbSecondOrder(b) => format!("gb-second-order {}", boost(b)),
            ModelSpec::NgbGaussian(b) => format!("ngb-gaussian {}", boost(b)),
        }
    }

    /// Returns the spec with any internal RNG seed replaced, leaving the
    /// remaining hyperparameters untouched.
    pub fn with_seed(&self, seed: u64) -> ModelSpec {
        match self {
            ModelSpec::RandomForest { forest, tree } => ModelSpec::RandomForest {
                forest: ForestParams { seed, ..*forest },
                tree: *tree,
            },
            other => other.clone(),
        }
    }
}

/// A trained model of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Cart(RegressionTree),
    RandomForest(RandomForest),
    GradientBoost(GradientBoost),
    NgbGaussian(NaturalGradientBoost),
}

impl FittedModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            FittedModel::Cart(t) => t.predict_row(row),
            FittedModel::RandomForest(f) => f.predict_row(row),
            FittedModel::GradientBoost(g) => g.predict_row(row),
            FittedModel::NgbGaussian(n) => n.predict_row(row),
        }
    }

    pub fn predict(&self, x: &DenseMatrix) -> Vec<f64> {
        x.row_iter().map(|r| self.predict_row(r)).collect()
    }

    /// Versioned plain-text dump; see [`FittedModel::from_text`].
    pub fn to_text(&self) -> String {
        text::to_text(self)
    }

    /// Parses a dump produced by [`FittedModel::to_text`].
    pub fn from_text(s: &str) -> Result<FittedModel, ModelError> {
        text::from_text(s)
    }
}

/// Fits `spec` on `(x, y)`.
pub fn fit_model(spec: &ModelSpec, x: &DenseMatrix, y: &[f64]) -> Result<FittedModel, ModelError> {
    Ok(match spec {
        ModelSpec::Cart(params) => FittedModel::Cart(fit_tree(x, y, params, None)?),
        ModelSpec::RandomForest { forest, tree } => {
            FittedModel::RandomForest(fit_random_forest(x, y, forest, tree)?)
        }
        ModelSpec::GbFirstOrder(params) => {
            FittedModel::GradientBoost(fit_gb_first_order(x, y, params)?)
        }
        ModelSpec::GbSecondOrder(params) => {
            FittedModel::GradientBoost(fit_gb_second_order(x, y, params)?)
        }
        ModelSpec::NgbGaussian(params) => {
            FittedModel::NgbGaussian(fit_ngb_gaussian(x, y, params)?)
        }
    })
}

/// Fits `spec` with its internal RNG seed (if any) replaced by `seed`.
pub fn fit_model_with_seed(
    spec: &ModelSpec,
    x: &DenseMatrix,
    y: &[f64],
    seed: u64,
) -> Result<FittedModel, ModelError> {
    fit_model(&spec.with_seed(seed), x, y)
}
