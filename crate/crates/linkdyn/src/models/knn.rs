//! k-nearest-neighbor classification with Euclidean distance. Distance
//! ties break toward the lower training-row index, vote ties toward
//! Negative.

use serde::{Deserialize, Serialize};

use crate::exec;
use crate::linalg::{squared_distance, Mat};

use super::{Prediction, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub x: Mat,
    pub y: Vec<bool>,
    pub k: usize,
}

pub(super) fn fit(x: &Mat, y: &[bool], cfg: &TrainConfig) -> KnnModel {
    KnnModel {
        x: x.clone(),
        y: y.to_vec(),
        k: cfg.k_neighbors,
    }
}

pub(super) fn predict(model: &KnnModel, x: &Mat) -> Vec<Prediction> {
    let k = model.k.min(model.x.rows());
    exec::ordered_map_range(x.rows(), |i| {
        let query = x.row(i);
        let mut dists: Vec<(f64, usize)> = (0..model.x.rows())
            .map(|j| (squared_distance(query, model.x.row(j)), j))
            .collect();
        dists.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let votes = dists[..k].iter().filter(|&&(_, j)| model.y[j]).count();
        Prediction {
            label: 2 * votes > k,
            score: votes as f64 / k as f64,
        }
    })
}
