//! RBF-kernel SVM trained by the kernelized Pegasos stochastic
//! subgradient scheme: at step t a uniformly drawn example joins the
//! support set when its current margin is below one, and the predictor is
//! the 1/(lambda*T)-scaled kernel expansion over the support.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec;
use crate::linalg::{squared_distance, Mat};
use crate::seeds;

use super::{Prediction, TrainConfig};

/// Support-vector expansion of the decision function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfModel {
    pub support: Mat,
    /// alpha_j * y_j per support vector.
    pub coeffs: Vec<f64>,
    pub gamma: f64,
    /// 1 / (lambda * T), the Pegasos output scale.
    pub scale: f64,
}

/// Step budget: a full epochs*n schedule is pointless for Pegasos, whose
/// convergence depends on 1/(lambda*epsilon), so cap the walk.
const MAX_STEPS: usize = 200_000;

fn kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

pub(super) fn fit(x: &Mat, y: &[bool], cfg: &TrainConfig) -> RbfModel {
    let n = x.rows();
    let gamma = cfg.rbf_gamma.unwrap_or(1.0 / x.cols() as f64);
    let lambda = cfg.regularization;
    let ys: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let steps = (cfg.epochs * n).min(MAX_STEPS).max(n);
    let mut alpha = vec![0u32; n];
    let mut support: Vec<usize> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, 0x5B_F00D));
    for t in 1..=steps {
        let i = rng.random_range(0..n);
        let mut sum = 0.0;
        for &j in &support {
            sum += alpha[j] as f64 * ys[j] * kernel(x.row(i), x.row(j), gamma);
        }
        let margin = ys[i] * sum / (lambda * t as f64);
        if margin < 1.0 {
            if alpha[i] == 0 {
                support.push(i);
            }
            alpha[i] += 1;
        }
    }
    support.sort_unstable();
    let rows: Vec<Vec<f64>> = support.iter().map(|&j| x.row(j).to_vec()).collect();
    let coeffs: Vec<f64> = support
        .iter()
        .map(|&j| alpha[j] as f64 * ys[j])
        .collect();
    RbfModel {
        support: Mat::from_rows(&rows).expect("support rows are rectangular"),
        coeffs,
        gamma,
        scale: 1.0 / (lambda * steps as f64),
    }
}

pub(super) fn predict(model: &RbfModel, x: &Mat) -> Vec<Prediction> {
    exec::ordered_map_range(x.rows(), |i| {
        let row = x.row(i);
        let mut sum = 0.0;
        for (j, coeff) in model.coeffs.iter().enumerate() {
            sum += coeff * kernel(row, model.support.row(j), model.gamma);
        }
        let margin = model.scale * sum;
        Prediction {
            label: margin > 0.0,
            score: margin,
        }
    })
}
