//! CART regression trees for predicting optimal depth and swap count.
//!
//! A split on feature `f` at threshold `s` sends rows with `x[f] <= s` left.
//! Its loss is the size-weighted mean of the children's label variances,
//! `G = (n_l * L_l + n_r * L_r) / n`, and the tree greedily picks the
//! minimum-`G` split among midpoints of consecutive distinct feature values.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::augment::{AugmentError, Dataset, Target};
use crate::features::{FeatureVector, FEATURE_NAMES};

pub const NUM_FEATURES: usize = 6;

/// Relative slack under which two losses count as equal for tie-breaking.
pub const TIE_EPS: f64 = 1e-12;

pub type Row = [f64; NUM_FEATURES];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("cannot fit a tree to an empty dataset")]
    Empty,
    #[error("rows and labels differ in length ({rows} vs {labels})")]
    Length { rows: usize, labels: usize },
    #[error(transparent)]
    Unlabeled(#[from] AugmentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    /// Weighted child variance `G`.
    pub loss: f64,
    pub n_left: usize,
    pub n_right: usize,
    pub left_loss: f64,
    pub right_loss: f64,
}

impl SplitCandidate {
    /// Total order used everywhere a split is chosen: lower loss, then lower
    /// feature index, then lower threshold.
    pub fn better_than(&self, other: &SplitCandidate) -> bool {
        let slack = TIE_EPS * other.loss.abs().max(1.0);
        if self.loss < other.loss - slack {
            return true;
        }
        if self.loss > other.loss + slack {
            return false;
        }
        (self.feature, self.threshold) < (other.feature, other.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        prediction: f64,
        samples: usize,
        mse: f64,
    },
    Split {
        split: SplitCandidate,
        samples: usize,
        mse: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn samples(&self) -> usize {
        match self {
            TreeNode::Leaf { samples, .. } | TreeNode::Split { samples, .. } => *samples,
        }
    }

    pub fn mse(&self) -> f64 {
        match self {
            TreeNode::Leaf { mse, .. } | TreeNode::Split { mse, .. } => *mse,
        }
    }

    /// Number of split levels below this node.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode)) {
        f(self);
        if let TreeNode::Split { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub target: Target,
    pub max_depth: usize,
    pub feature_names: Vec<String>,
    pub root: TreeNode,
}

fn mean_and_mse(labels: &[f64], idx: &[usize]) -> (f64, f64) {
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&i| labels[i]).sum::<f64>() / n;
    let mse = idx
        .iter()
        .map(|&i| {
            let d = labels[i] - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    (mean, mse)
}

/// Best threshold on one feature over the rows in `idx`, or `None` when the
/// feature is constant there.
fn sq(x: f64) -> f64 {
    x * x
}

pub fn best_split(
    rows: &[Row],
    labels: &[f64],
    idx: &[usize],
    feature: usize,
) -> Option<SplitCandidate> {
    if idx.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| rows[a][feature].total_cmp(&rows[b][feature]).then(a.cmp(&b)));
    // shift labels by the node mean so the running sums stay small
    let shift = idx.iter().map(|&i| labels[i]).sum::<f64>() / idx.len() as f64;
    let total: f64 = order.iter().map(|&i| labels[i] - shift).sum();
    let total_sq: f64 = order.iter().map(|&i| (labels[i] - shift) * (labels[i] - shift)).sum();
    let n = order.len();
    let (mut sum_l, mut sq_l) = (0.0, 0.0);
    let mut best: Option<SplitCandidate> = None;
    for k in 0..n - 1 {
        let y = labels[order[k]] - shift;
        sum_l += y;
        sq_l += y * y;
        let (lo, hi) = (rows[order[k]][feature], rows[order[k + 1]][feature]);
        if lo >= hi {
            continue;
        }
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            threshold = lo;
        }
        let n_l = k + 1;
        let n_r = n - n_l;
        let left_loss = (sq_l / n_l as f64 - sq(sum_l / n_l as f64)).max(0.0);
        let sum_r = total - sum_l;
        let right_loss = ((total_sq - sq_l) / n_r as f64 - sq(sum_r / n_r as f64)).max(0.0);
        let loss = (n_l as f64 * left_loss + n_r as f64 * right_loss) / n as f64;
        let cand = SplitCandidate {
            feature,
            threshold,
            loss,
            n_left: n_l,
            n_right: n_r,
            left_loss,
            right_loss,
        };
        if best.as_ref().is_none_or(|b| cand.better_than(b)) {
            best = Some(cand);
        }
    }
    best
}

fn build(rows: &[Row], labels: &[f64], idx: Vec<usize>, depth_left: usize) -> TreeNode {
    let (mean, mse) = mean_and_mse(labels, &idx);
    let leaf = TreeNode::Leaf {
        prediction: mean,
        samples: idx.len(),
        mse,
    };
    if depth_left == 0 || idx.len() < 2 || mse <= 0.0 {
        return leaf;
    }
    let mut best: Option<SplitCandidate> = None;
    for f in 0..NUM_FEATURES {
        if let Some(c) = best_split(rows, labels, &idx, f) {
            if best.as_ref().is_none_or(|b| c.better_than(b)) {
                best = Some(c);
            }
        }
    }
    let Some(split) = best else {
        return leaf;
    };
    let (l, r): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| rows[i][split.feature] <= split.threshold);
    TreeNode::Split {
        split,
        samples: idx.len(),
        mse,
        left: Box::new(build(rows, labels, l, depth_left - 1)),
        right: Box::new(build(rows, labels, r, depth_left - 1)),
    }
}

impl RegressionTree {
    pub fn fit_rows(
        rows: &[Row],
        labels: &[f64],
        target: Target,
        max_depth: usize,
    ) -> Result<Self, FitError> {
        if rows.len() != labels.len() {
            return Err(FitError::Length {
                rows: rows.len(),
                labels: labels.len(),
            });
        }
        if rows.is_empty() {
            return Err(FitError::Empty);
        }
        Ok(RegressionTree {
            target,
            max_depth,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            root: build(rows, labels, (0..rows.len()).collect(), max_depth),
        })
    }

    pub fn fit(d: &Dataset, max_depth: usize) -> Result<Self, FitError> {
        let labels: Vec<f64> = d.labels()?.into_iter().map(|l| l as f64).collect();
        let rows: Vec<Row> = d.samples.iter().map(|s| s.features.as_array()).collect();
        Self::fit_rows(&rows, &labels, d.target, max_depth)
    }

    /// Mean label of the leaf `row` lands in.
    pub fn predict_value(&self, row: &Row) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { prediction, .. } => return *prediction,
                TreeNode::Split {
                    split, left, right, ..
                } => {
                    node = if row[split.feature] <= split.threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Leaf mean rounded to the nearest integer, never negative.
    pub fn predict(&self, f: &FeatureVector) -> u64 {
        libm::round(self.predict_value(&f.as_array())).max(0.0) as u64
    }

    /// Per-feature total variance reduction, normalized to sum to one.
    /// All zeros for a single-leaf tree.
    pub fn feature_importance(&self) -> [f64; NUM_FEATURES] {
        let mut w = [0.0; NUM_FEATURES];
        self.root.visit(&mut |node| {
            if let TreeNode::Split {
                split,
                samples,
                mse,
                left,
                right,
            } = node
            {
                let n = *samples as f64;
                w[split.feature] += mse
                    - (left.samples() as f64 / n) * left.mse()
                    - (right.samples() as f64 / n) * right.mse();
            }
        });
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            for x in w.iter_mut() {
                *x /= total;
            }
        }
        w
    }

    /// All internal nodes in pre-order.
    pub fn splits(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |n| {
            if matches!(n, TreeNode::Split { .. }) {
                out.push(n);
            }
        });
        out
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn one_feature(values: &[f64]) -> Vec<Row> {
        values.iter().map(|&v| [v, 0.0, 0.0, 0.0, 0.0, 0.0]).collect()
    }

    #[test]
    fn midpoint_split_with_zero_loss() {
        let rows = one_feature(&[1.0, 2.0, 10.0, 11.0]);
        let labels = [1.0, 1.0, 5.0, 5.0];
        let s = best_split(&rows, &labels, &[0, 1, 2, 3], 0).unwrap();
        assert_eq!(s.threshold, 6.0);
        assert_eq!(s.loss, 0.0);
        assert_eq!((s.n_left, s.n_right), (2, 2));
    }

    #[test]
    fn constant_feature_has_no_split() {
        let rows = one_feature(&[3.0, 3.0, 3.0]);
        assert!(best_split(&rows, &[1.0, 2.0, 3.0], &[0, 1, 2], 0).is_none());
        assert!(best_split(&rows, &[1.0, 2.0, 3.0], &[0, 1, 2], 4).is_none());
    }

    #[test]
    fn equal_labels_pick_lowest_threshold() {
        let rows = one_feature(&[4.0, 1.0, 2.0, 8.0]);
        let s = best_split(&rows, &[7.0; 4], &[0, 1, 2, 3], 0).unwrap();
        assert_eq!((s.threshold, s.loss), (1.5, 0.0));
    }

    #[test]
    fn single_sample_is_a_leaf() {
        let t = RegressionTree::fit_rows(&one_feature(&[2.0]), &[9.0], Target::Depth, 5).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict_value(&[0.0; 6]), 9.0);
        assert_eq!(t.feature_importance(), [0.0; 6]);
    }

    #[test]
    fn two_clusters_give_one_split() {
        let mut rows = one_feature(&[1.0, 1.5, 2.0, 20.0, 21.0]);
        for r in rows.iter_mut() {
            r[3] = 0.5;
        }
        let labels = [3.0, 4.0, 5.0, 12.0, 13.0];
        let t = RegressionTree::fit_rows(&rows, &labels, Target::Swaps, 1).unwrap();
        assert_eq!(t.depth(), 1);
        let TreeNode::Split { split, left, right, .. } = &t.root else {
            panic!("expected split");
        };
        assert_eq!((split.feature, split.threshold), (0, 11.0));
        assert_eq!(right.samples(), 2);
        assert_eq!(left.samples(), 3);
        assert_eq!(t.predict_value(&rows[0]), 4.0);
        assert_eq!(t.predict_value(&rows[4]), 12.5);
        assert_eq!(t.feature_importance(), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn threshold_boundary_goes_left_and_rounds() {
        let rows = one_feature(&[0.0, 2.0]);
        let t = RegressionTree::fit_rows(&rows, &[1.0, 8.0], Target::Depth, 3).unwrap();
        let at = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(t.predict_value(&at), 1.0);
        let f = FeatureVector::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.predict(&f), 1);
        let leaf = RegressionTree {
            target: Target::Depth,
            max_depth: 5,
            feature_names: vec![],
            root: TreeNode::Leaf {
                prediction: 6.5,
                samples: 2,
                mse: 0.25,
            },
        };
        assert_eq!(leaf.predict(&f), 7);
    }

    #[test]
    fn json_round_trip() {
        let rows: Vec<Row> = (0..12)
            .map(|i| [i as f64, (i % 3) as f64, 1.0, 0.1 * i as f64, 2.0, 0.0])
            .collect();
        let labels: Vec<f64> = (0..12).map(|i| ((i * 7) % 5) as f64).collect();
        let t = RegressionTree::fit_rows(&rows, &labels, Target::Depth, 5).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"max_depth\":5"));
        let back: RegressionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn errors() {
        assert_eq!(
            RegressionTree::fit_rows(&[], &[], Target::Depth, 5),
            Err(FitError::Empty)
        );
        assert!(matches!(
            RegressionTree::fit_rows(&one_feature(&[1.0]), &[], Target::Depth, 5),
            Err(FitError::Length { .. })
        ));
    }
}
