//! Exhaustive split-search oracles.
//!
//! Gains are recomputed naively per candidate partition (two full passes,
//! no prefix sums), so the arithmetic path is independent of any tree
//! implementation being checked.

/// Weighted sum of squared errors around the weighted mean of the subset.
fn weighted_sse(rows: &[usize], y: &[f64], w: Option<&[f64]>) -> f64 {
    let weight = |i: usize| w.map_or(1.0, |w| w[i]);
    let total_w: f64 = rows.iter().map(|&i| weight(i)).sum();
    if total_w <= 0.0 {
        return 0.0;
    }
    let mean: f64 = rows.iter().map(|&i| weight(i) * y[i]).sum::<f64>() / total_w;
    rows.iter()
        .map(|&i| weight(i) * (y[i] - mean) * (y[i] - mean))
        .sum()
}

fn partition(x: &[Vec<f64>], rows: &[usize], feature: usize, threshold: f64) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &i in rows {
        if x[i][feature] <= threshold {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    (left, right)
}

/// All midpoint thresholds between adjacent distinct values of a feature.
fn candidate_thresholds(x: &[Vec<f64>], rows: &[usize], feature: usize) -> Vec<f64> {
    let mut vals: Vec<f64> = rows.iter().map(|&i| x[i][feature]).collect();
    vals.sort_unstable_by(f64::total_cmp);
    vals.dedup();
    vals.windows(2)
        .map(|p| {
            let mid = 0.5 * (p[0] + p[1]);
            if mid < p[1] {
                mid
            } else {
                p[0]
            }
        })
        .collect()
}

/// Variance-reduction gain of one concrete split; `None` if a side violates
/// `min_leaf`.
pub fn variance_gain_of(
    x: &[Vec<f64>],
    y: &[f64],
    w: Option<&[f64]>,
    rows: &[usize],
    feature: usize,
    threshold: f64,
    min_leaf: usize,
) -> Option<f64> {
    let (left, right) = partition(x, rows, feature, threshold);
    if left.len() < min_leaf || right.len() < min_leaf {
        return None;
    }
    Some(weighted_sse(rows, y, w) - weighted_sse(&left, y, w) - weighted_sse(&right, y, w))
}

/// Exhaustive maximum variance-reduction gain over every feature and every
/// adjacent-midpoint threshold; `None` when no legal split exists.
pub fn max_variance_gain(
    x: &[Vec<f64>],
    y: &[f64],
    w: Option<&[f64]>,
    rows: &[usize],
    min_leaf: usize,
) -> Option<f64> {
    let d = x[0].len();
    let mut best: Option<f64> = None;
    for feature in 0..d {
        for threshold in candidate_thresholds(x, rows, feature) {
            if let Some(gain) = variance_gain_of(x, y, w, rows, feature, threshold, min_leaf) {
                if best.map_or(true, |b| gain > b) {
                    best = Some(gain);
                }
            }
        }
    }
    best
}

fn grad_hess_score(rows: &[usize], g: &[f64], h: &[f64], lambda: f64) -> f64 {
    let gs: f64 = rows.iter().map(|&i| g[i]).sum();
    let hs: f64 = rows.iter().map(|&i| h[i]).sum();
    gs * gs / (hs + lambda)
}

/// Second-order gain of one concrete split:
/// `1/2 [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma`.
#[allow(clippy::too_many_arguments)]
pub fn second_order_gain_of(
    x: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    lambda: f64,
    gamma: f64,
    rows: &[usize],
    feature: usize,
    threshold: f64,
    min_leaf: usize,
) -> Option<f64> {
    let (left, right) = partition(x, rows, feature, threshold);
    if left.len() < min_leaf || right.len() < min_leaf {
        return None;
    }
    Some(
        0.5 * (grad_hess_score(&left, g, h, lambda) + grad_hess_score(&right, g, h, lambda)
            - grad_hess_score(rows, g, h, lambda))
            - gamma,
    )
}

/// Exhaustive maximum of the second-order gain.
#[allow(clippy::too_many_arguments)]
pub fn max_second_order_gain(
    x: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    lambda: f64,
    gamma: f64,
    rows: &[usize],
    min_leaf: usize,
) -> Option<f64> {
    let d = x[0].len();
    let mut best: Option<f64> = None;
    for feature in 0..d {
        for threshold in candidate_thresholds(x, rows, feature) {
            if let Some(gain) =
                second_order_gain_of(x, g, h, lambda, gamma, rows, feature, threshold, min_leaf)
            {
                if best.map_or(true, |b| gain > b) {
                    best = Some(gain);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_data_max_gain_is_full_sse() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let y = vec![0.0, 0.0, 10.0, 10.0];
        let rows = [0, 1, 2, 3];
        let best = max_variance_gain(&x, &y, None, &rows, 1).unwrap();
        // Splitting at 2.5 removes all variance: SSE drops by 100.
        assert!((best - 100.0).abs() < 1e-12);
        let at_mid = variance_gain_of(&x, &y, None, &rows, 0, 2.5, 1).unwrap();
        assert!((at_mid - best).abs() < 1e-12);
    }

    #[test]
    fn min_leaf_excludes_edges() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let y = vec![0.0, 1.0, 2.0, 30.0];
        let rows = [0, 1, 2, 3];
        assert!(variance_gain_of(&x, &y, None, &rows, 0, 3.5, 2).is_none());
        assert!(variance_gain_of(&x, &y, None, &rows, 0, 2.5, 2).is_some());
    }
}
