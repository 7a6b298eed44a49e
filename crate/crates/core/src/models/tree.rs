//! Regression trees: greedy level-wise growth under a pluggable split
//! objective, with exact or equal-frequency-histogram split finding.
//!
//! Tie-breaking is fixed everywhere: candidate features ascend, candidate
//! thresholds ascend, and only a strictly larger gain replaces the
//! incumbent, so the first maximizer wins and fits are schedule-independent.

use super::ModelError;
use crate::matrix::DenseMatrix;
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Shared tree-shape controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub split_mode: SplitMode,
    /// Bin count for histogram split finding; ignored in exact mode.
    pub n_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    Exact,
    Histogram,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 6,
            min_samples_leaf: 1,
            split_mode: SplitMode::Exact,
            n_bins: 64,
        }
    }
}

impl TreeParams {
    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if self.max_depth < 1 {
            return Err(ModelError::Config("max_depth must be >= 1"));
        }
        if self.min_samples_leaf < 1 {
            return Err(ModelError::Config("min_samples_leaf must be >= 1"));
        }
        if self.split_mode == SplitMode::Histogram && self.n_bins < 2 {
            return Err(ModelError::Config("n_bins must be >= 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Branch {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A fitted regression tree; rows with `x[feature] <= threshold` descend
/// left.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub(crate) fn from_nodes(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Branch {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn predict(&self, x: &DenseMatrix) -> Vec<f64> {
        x.row_iter().map(|r| self.predict_row(r)).collect()
    }
}

/// Split objective: per-node statistics, leaf values, and split gains.
pub(crate) trait SplitObjective {
    type Agg: Clone + Default;
    fn accumulate(&self, agg: &mut Self::Agg, row: usize);
    fn merge(agg: &mut Self::Agg, other: &Self::Agg);
    fn count(agg: &Self::Agg) -> usize;
    fn leaf_value(&self, agg: &Self::Agg) -> f64;
    /// Must be > 0 for a split to be taken.
    fn split_gain(&self, parent: &Self::Agg, left: &Self::Agg, right: &Self::Agg) -> f64;
}

/// Weighted variance reduction (CART): gain is the drop in weighted SSE.
pub(crate) struct VarianceObjective<'a> {
    pub y: &'a [f64],
    pub weights: Option<&'a [f64]>,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct VarianceAgg {
    n: usize,
    sum_w: f64,
    sum_wy: f64,
    sum_wy2: f64,
}

impl VarianceAgg {
    fn sse(&self) -> f64 {
        if self.sum_w <= 0.0 {
            return 0.0;
        }
        self.sum_wy2 - self.sum_wy * self.sum_wy / self.sum_w
    }
}

impl SplitObjective for VarianceObjective<'_> {
    type Agg = VarianceAgg;

    fn accumulate(&self, agg: &mut VarianceAgg, row: usize) {
        let w = self.weights.map_or(1.0, |w| w[row]);
        let y = self.y[row];
        agg.n += 1;
        agg.sum_w += w;
        agg.sum_wy += w * y;
        agg.sum_wy2 += w * y * y;
    }

    fn merge(agg: &mut VarianceAgg, other: &VarianceAgg) {
        agg.n += other.n;
        agg.sum_w += other.sum_w;
        agg.sum_wy += other.sum_wy;
        agg.sum_wy2 += other.sum_wy2;
    }

    fn count(agg: &VarianceAgg) -> usize {
        agg.n
    }

    fn leaf_value(&self, agg: &VarianceAgg) -> f64 {
        if agg.sum_w > 0.0 {
            agg.sum_wy / agg.sum_w
        } else {
            0.0
        }
    }

    fn split_gain(&self, parent: &VarianceAgg, left: &VarianceAgg, right: &VarianceAgg) -> f64 {
        parent.sse() - left.sse() - right.sse()
    }
}

/// Second-order gain with L2 leaf regularization and a split penalty:
/// gain = 1/2 [GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)] - gamma,
/// leaf weight = -G/(H+lambda).
pub(crate) struct GradHessObjective<'a> {
    pub grad: &'a [f64],
    pub hess: &'a [f64],
    pub lambda: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct GradHessAgg {
    n: usize,
    g: f64,
    h: f64,
}

impl GradHessObjective<'_> {
    fn score(&self, agg: &GradHessAgg) -> f64 {
        agg.g * agg.g / (agg.h + self.lambda)
    }
}

impl SplitObjective for GradHessObjective<'_> {
    type Agg = GradHessAgg;

    fn accumulate(&self, agg: &mut GradHessAgg, row: usize) {
        agg.n += 1;
        agg.g += self.grad[row];
        agg.h += self.hess[row];
    }

    fn merge(agg: &mut GradHessAgg, other: &GradHessAgg) {
        agg.n += other.n;
        agg.g += other.g;
        agg.h += other.h;
    }

    fn count(agg: &GradHessAgg) -> usize {
        agg.n
    }

    fn leaf_value(&self, agg: &GradHessAgg) -> f64 {
        -agg.g / (agg.h + self.lambda)
    }

    fn split_gain(&self, parent: &GradHessAgg, left: &GradHessAgg, right: &GradHessAgg) -> f64 {
        0.5 * (self.score(left) + self.score(right) - self.score(parent)) - self.gamma
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Per-feature histogram layout: `edges` are candidate thresholds and
/// `bin_of_row` maps every matrix row to its bin (edges.len() + 1 bins).
/// When the distinct values already fit in the bin budget the binning is
/// lossless and split search falls back to the exact path.
struct FeatureBins {
    edges: Vec<f64>,
    bin_of_row: Vec<u32>,
    lossless: bool,
}

/// Midpoint that is guaranteed to separate a < b under `x <= t`.
fn separating_threshold(a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    if mid < b {
        mid
    } else {
        a
    }
}

fn build_bins(x: &DenseMatrix, indices: &[usize], feature: usize, n_bins: usize) -> FeatureBins {
    let mut vals: Vec<f64> = indices.iter().map(|&i| x.get(i, feature)).collect();
    vals.sort_unstable_by(f64::total_cmp);

    let mut distinct: Vec<f64> = Vec::new();
    for &v in &vals {
        if distinct.last().map_or(true, |&d| d < v) {
            distinct.push(v);
        }
    }

    let lossless = distinct.len() <= n_bins;
    let mut edges: Vec<f64> = Vec::new();
    if lossless {
        // One bin per distinct value.
        for pair in distinct.windows(2) {
            edges.push(separating_threshold(pair[0], pair[1]));
        }
    } else {
        // Equal-frequency cuts, merging cuts that land inside a run of
        // duplicates.
        let n = vals.len();
        for j in 1..n_bins {
            let pos = j * n / n_bins;
            if pos == 0 || pos >= n {
                continue;
            }
            let (a, b) = (vals[pos - 1], vals[pos]);
            if a < b {
                let e = separating_threshold(a, b);
                if edges.last().map_or(true, |&last| last < e) {
                    edges.push(e);
                }
            }
        }
    }

    let mut bin_of_row = vec![0u32; x.rows()];
    for &i in indices {
        let v = x.get(i, feature);
        let bin = edges.partition_point(|&e| v > e);
        bin_of_row[i] = bin as u32;
    }
    FeatureBins {
        edges,
        bin_of_row,
        lossless,
    }
}

/// Reusable buffers for the exact split search; avoids per-node-per-feature
/// allocation in the hot path.
struct ExactScratch<A> {
    order: Vec<usize>,
    suffix: Vec<A>,
}

impl<A: Clone + Default> ExactScratch<A> {
    fn new() -> Self {
        Self {
            order: Vec::new(),
            suffix: Vec::new(),
        }
    }
}

/// Scans a (value, index)-sorted order for the best threshold. The parent
/// statistics come from the suffix scan itself, so every split-search path
/// that sees the same sorted order computes bit-identical gains.
fn best_split_from_sorted<O: SplitObjective>(
    x: &DenseMatrix,
    order: &[usize],
    feature: usize,
    objective: &O,
    min_leaf: usize,
    suffix: &mut Vec<O::Agg>,
) -> Option<BestSplit> {
    let n = order.len();
    if n < 2 {
        return None;
    }
    // Suffix aggregates keep the right-side statistics exact instead of
    // subtracting from the parent.
    suffix.clear();
    suffix.resize(n + 1, O::Agg::default());
    for i in (0..n).rev() {
        let mut agg = suffix[i + 1].clone();
        objective.accumulate(&mut agg, order[i]);
        suffix[i] = agg;
    }
    let parent = suffix[0].clone();

    let mut left = O::Agg::default();
    let mut best: Option<BestSplit> = None;
    for i in 0..n - 1 {
        objective.accumulate(&mut left, order[i]);
        let (a, b) = (x.get(order[i], feature), x.get(order[i + 1], feature));
        if a >= b {
            continue;
        }
        let left_n = O::count(&left);
        let right_n = n - left_n;
        if left_n < min_leaf || right_n < min_leaf {
            continue;
        }
        let gain = objective.split_gain(&parent, &left, &suffix[i + 1]);
        if best.as_ref().map_or(true, |bst| gain > bst.gain) {
            best = Some(BestSplit {
                feature,
                threshold: separating_threshold(a, b),
                gain,
            });
        }
    }
    best
}

fn sort_by_feature(x: &DenseMatrix, indices: &[usize], feature: usize, out: &mut Vec<usize>) {
    out.clear();
    out.extend_from_slice(indices);
    out.sort_unstable_by(|&a, &b| {
        x.get(a, feature)
            .total_cmp(&x.get(b, feature))
            .then(a.cmp(&b))
    });
}

fn best_split_exact<O: SplitObjective>(
    x: &DenseMatrix,
    indices: &[usize],
    feature: usize,
    objective: &O,
    min_leaf: usize,
    scratch: &mut ExactScratch<O::Agg>,
) -> Option<BestSplit> {
    let mut order = core::mem::take(&mut scratch.order);
    sort_by_feature(x, indices, feature, &mut order);
    let best = best_split_from_sorted(x, &order, feature, objective, min_leaf, &mut scratch.suffix);
    scratch.order = order;
    best
}

fn best_split_binned<O: SplitObjective>(
    indices: &[usize],
    feature: usize,
    bins: &FeatureBins,
    objective: &O,
    min_leaf: usize,
) -> Option<BestSplit> {
    let n_bins = bins.edges.len() + 1;
    if n_bins < 2 {
        return None;
    }
    let mut per_bin: Vec<O::Agg> = vec![O::Agg::default(); n_bins];
    for &i in indices {
        objective.accumulate(&mut per_bin[bins.bin_of_row[i] as usize], i);
    }

    let mut suffix: Vec<O::Agg> = vec![O::Agg::default(); n_bins + 1];
    for b in (0..n_bins).rev() {
        let mut agg = suffix[b + 1].clone();
        O::merge(&mut agg, &per_bin[b]);
        suffix[b] = agg;
    }
    let parent = suffix[0].clone();

    let total = indices.len();
    let mut left = O::Agg::default();
    let mut best: Option<BestSplit> = None;
    for b in 0..n_bins - 1 {
        O::merge(&mut left, &per_bin[b]);
        let left_n = O::count(&left);
        let right_n = total - left_n;
        if left_n == 0 || right_n == 0 {
            continue;
        }
        if left_n < min_leaf || right_n < min_leaf {
            continue;
        }
        let gain = objective.split_gain(&parent, &left, &suffix[b + 1]);
        if best.as_ref().map_or(true, |bst| gain > bst.gain) {
            best = Some(BestSplit {
                feature,
                threshold: bins.edges[b],
                gain,
            });
        }
    }
    best
}

/// Grows a tree breadth-first over `indices` (duplicates allowed, as under
/// bootstrap). `feature_sampler` draws `k` of the `d` features per node for
/// forests; `None` searches every feature.
///
/// Exact mode presorts each feature once and partitions the sorted lists
/// down the tree, so no node-level sorting happens. Stable partitioning
/// keeps each list in (value, index) order, which makes the arithmetic
/// identical to sorting the node's rows directly.
pub(crate) fn grow_tree<O: SplitObjective>(
    x: &DenseMatrix,
    indices: &[usize],
    objective: &O,
    params: &TreeParams,
    mut feature_sampler: Option<(&mut ChaCha12Rng, usize)>,
) -> RegressionTree {
    let d = x.cols();
    let bins: Option<Vec<FeatureBins>> = match params.split_mode {
        SplitMode::Exact => None,
        SplitMode::Histogram => Some(
            (0..d)
                .map(|f| build_bins(x, indices, f, params.n_bins))
                .collect(),
        ),
    };
    let root_sorted: Option<Vec<Vec<usize>>> = match params.split_mode {
        SplitMode::Exact => Some(
            (0..d)
                .map(|f| {
                    let mut order = Vec::new();
                    sort_by_feature(x, indices, f, &mut order);
                    order
                })
                .collect(),
        ),
        SplitMode::Histogram => None,
    };

    struct Pending {
        slot: usize,
        original: Vec<usize>,
        by_feature: Option<Vec<Vec<usize>>>,
        depth: usize,
    }

    let mut nodes: Vec<Node> = vec![Node::Leaf { value: 0.0 }];
    let mut queue: VecDeque<Pending> = VecDeque::new();
    queue.push_back(Pending {
        slot: 0,
        original: indices.to_vec(),
        by_feature: root_sorted,
        depth: 0,
    });

    let mut scratch_features: Vec<usize> = (0..d).collect();
    let mut scratch = ExactScratch::<O::Agg>::new();

    while let Some(node) = queue.pop_front() {
        let mut node_agg = O::Agg::default();
        for &i in &node.original {
            objective.accumulate(&mut node_agg, i);
        }
        let leaf_value = objective.leaf_value(&node_agg);

        if node.depth >= params.max_depth || node.original.len() < 2 * params.min_samples_leaf {
            nodes[node.slot] = Node::Leaf { value: leaf_value };
            continue;
        }

        // Candidate features, always searched in ascending order.
        let candidates: Vec<usize> = match &mut feature_sampler {
            Some((rng, k)) if *k < d => {
                for i in 0..d {
                    scratch_features[i] = i;
                }
                for i in 0..*k {
                    let j = rng.gen_range(i..d);
                    scratch_features.swap(i, j);
                }
                let mut chosen = scratch_features[..*k].to_vec();
                chosen.sort_unstable();
                chosen
            }
            _ => (0..d).collect(),
        };

        let mut best: Option<BestSplit> = None;
        for &f in &candidates {
            let split = match (&bins, &node.by_feature) {
                (None, Some(by_feature)) => best_split_from_sorted(
                    x,
                    &by_feature[f],
                    f,
                    objective,
                    params.min_samples_leaf,
                    &mut scratch.suffix,
                ),
                (Some(all_bins), _) if !all_bins[f].lossless => best_split_binned(
                    &node.original,
                    f,
                    &all_bins[f],
                    objective,
                    params.min_samples_leaf,
                ),
                _ => best_split_exact(
                    x,
                    &node.original,
                    f,
                    objective,
                    params.min_samples_leaf,
                    &mut scratch,
                ),
            };
            if let Some(s) = split {
                if best.as_ref().map_or(true, |b| s.gain > b.gain) {
                    best = Some(s);
                }
            }
        }

        match best {
            Some(split) if split.gain > 0.0 => {
                let goes_left = |i: usize| x.get(i, split.feature) <= split.threshold;
                let (left_orig, right_orig): (Vec<usize>, Vec<usize>) =
                    node.original.iter().partition(|&&i| goes_left(i));
                let (left_sorted, right_sorted) = match &node.by_feature {
                    Some(by_feature) => {
                        let mut ls = Vec::with_capacity(d);
                        let mut rs = Vec::with_capacity(d);
                        for list in by_feature {
                            let (l, r): (Vec<usize>, Vec<usize>) =
                                list.iter().partition(|&&i| goes_left(i));
                            ls.push(l);
                            rs.push(r);
                        }
                        (Some(ls), Some(rs))
                    }
                    None => (None, None),
                };
                let left_slot = nodes.len();
                nodes.push(Node::Leaf { value: 0.0 });
                let right_slot = nodes.len();
                nodes.push(Node::Leaf { value: 0.0 });
                nodes[node.slot] = Node::Branch {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: left_slot,
                    right: right_slot,
                };
                queue.push_back(Pending {
                    slot: left_slot,
                    original: left_orig,
                    by_feature: left_sorted,
                    depth: node.depth + 1,
                });
                queue.push_back(Pending {
                    slot: right_slot,
                    original: right_orig,
                    by_feature: right_sorted,
                    depth: node.depth + 1,
                });
            }
            _ => {
                nodes[node.slot] = Node::Leaf { value: leaf_value };
            }
        }
    }

    RegressionTree::from_nodes(nodes)
}

/// Fits a CART regression tree by greedy (weighted) variance reduction.
/// Requires at least `2 * min_samples_leaf` rows; a constant target yields
/// a single leaf.
pub fn fit_tree(
    x: &DenseMatrix,
    y: &[f64],
    params: &TreeParams,
    sample_weights: Option<&[f64]>,
) -> Result<RegressionTree, ModelError> {
    params.validate()?;
    if x.rows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            rows: x.rows(),
            targets: y.len(),
        });
    }
    if let Some(w) = sample_weights {
        if w.len() != y.len() {
            return Err(ModelError::DimensionMismatch {
                rows: w.len(),
                targets: y.len(),
            });
        }
    }
    if x.rows() < 2 * params.min_samples_leaf {
        return Err(ModelError::TooFewRows {
            rows: x.rows(),
            needed: 2 * params.min_samples_leaf,
        });
    }
    let objective = VarianceObjective {
        y,
        weights: sample_weights,
    };
    let indices: Vec<usize> = (0..x.rows()).collect();
    Ok(grow_tree(x, &indices, &objective, params, None))
}
