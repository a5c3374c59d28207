//! Random forest of Gini-split CART trees over bootstrap samples with
//! per-split feature subsampling (sqrt(m) by default). Trees train in
//! parallel, each from its own derived seed, and vote by majority with
//! ties negative.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec;
use crate::linalg::Mat;
use crate::seeds;

use super::{Prediction, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: bool,
        pos_frac: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn best_split(x: &Mat, y: &[bool], idx: &[usize], features: &[usize]) -> Option<SplitChoice> {
    let total = idx.len();
    let total_pos = idx.iter().filter(|&&i| y[i]).count();
    let parent = gini(total_pos, total);
    let mut best: Option<SplitChoice> = None;
    for &feature in features {
        let mut values: Vec<(f64, bool)> = idx.iter().map(|&i| (x[(i, feature)], y[i])).collect();
        values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_n = 0usize;
        let mut left_pos = 0usize;
        for w in 0..total - 1 {
            left_n += 1;
            if values[w].1 {
                left_pos += 1;
            }
            if values[w].0 == values[w + 1].0 {
                continue;
            }
            let right_n = total - left_n;
            let right_pos = total_pos - left_pos;
            let weighted = (left_n as f64 * gini(left_pos, left_n)
                + right_n as f64 * gini(right_pos, right_n))
                / total as f64;
            let gain = parent - weighted;
            let threshold = 0.5 * (values[w].0 + values[w + 1].0);
            // Strict improvement keeps the first (lowest feature index,
            // lowest threshold) winner on ties.
            if gain > best.as_ref().map(|b| b.gain).unwrap_or(1e-12) {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn build_node(
    x: &Mat,
    y: &[bool],
    idx: &[usize],
    depth: usize,
    max_depth: usize,
    n_features: usize,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let pos = idx.iter().filter(|&&i| y[i]).count();
    let pos_frac = pos as f64 / idx.len() as f64;
    let leaf = TreeNode::Leaf {
        label: 2 * pos > idx.len(),
        pos_frac,
    };
    if depth >= max_depth || pos == 0 || pos == idx.len() || idx.len() < 2 {
        return leaf;
    }
    // Sample the feature subset for this split, then scan in index order.
    let m = x.cols();
    let mut features: Vec<usize> = (0..m).collect();
    for pick in 0..n_features.min(m) {
        let swap = rng.random_range(pick..m);
        features.swap(pick, swap);
    }
    features.truncate(n_features.min(m));
    features.sort_unstable();

    match best_split(x, y, idx, &features) {
        None => leaf,
        Some(split) => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| x[(i, split.feature)] <= split.threshold);
            if left_idx.is_empty() || right_idx.is_empty() {
                return leaf;
            }
            let left = build_node(x, y, &left_idx, depth + 1, max_depth, n_features, rng);
            let right = build_node(x, y, &right_idx, depth + 1, max_depth, n_features, rng);
            TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}

pub(super) fn build_tree(x: &Mat, y: &[bool], cfg: &TrainConfig, tree_seed: u64) -> TreeNode {
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
    let n = x.rows();
    let idx: Vec<usize> = if cfg.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let n_features = cfg
        .feature_subsample
        .unwrap_or_else(|| (x.cols() as f64).sqrt().ceil() as usize)
        .max(1);
    build_node(x, y, &idx, 0, cfg.max_depth, n_features, &mut rng)
}

pub(super) fn fit(x: &Mat, y: &[bool], cfg: &TrainConfig) -> ForestModel {
    let trees = exec::ordered_map_range(cfg.tree_count, |t| {
        build_tree(x, y, cfg, seeds::derive(cfg.seed, 0xF0_0000 + t as u64))
    });
    ForestModel { trees }
}

fn tree_label(node: &TreeNode, row: &[f64]) -> bool {
    match node {
        TreeNode::Leaf { label, .. } => *label,
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if row[*feature] <= *threshold {
                tree_label(left, row)
            } else {
                tree_label(right, row)
            }
        }
    }
}

pub(super) fn predict(model: &ForestModel, x: &Mat) -> Vec<Prediction> {
    exec::ordered_map_range(x.rows(), |i| {
        let row = x.row(i);
        let votes = model
            .trees
            .iter()
            .filter(|tree| tree_label(tree, row))
            .count();
        Prediction {
            label: 2 * votes > model.trees.len(),
            score: votes as f64 / model.trees.len() as f64,
        }
    })
}
