//! Logistic regression and linear SVM, both trained by full-batch
//! (sub)gradient descent with a 1/sqrt(t) step decay, L2 on the weights,
//! and an unregularized intercept.

use serde::{Deserialize, Serialize};

use crate::linalg::Mat;

use super::{Prediction, TrainConfig};

/// Weights, intercept, and whether scores are probabilities (logistic) or
/// margins (SVM).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub probabilistic: bool,
}

fn signed(y: &[bool]) -> Vec<f64> {
    y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect()
}

/// log(1 + exp(t)) without overflow.
fn ln1p_exp(t: f64) -> f64 {
    if t > 35.0 {
        t
    } else if t < -35.0 {
        t.exp()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// L2-regularized mean log-loss and its gradient at (w, b).
///
/// Labels are +/-1; the intercept is not regularized. Exposed so the
/// gradient can be checked against finite differences.
pub fn logistic_loss_and_grad(
    w: &[f64],
    b: f64,
    x: &Mat,
    y_signed: &[f64],
    lambda: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.rows();
    let m = x.cols();
    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; m];
    let mut grad_b = 0.0;
    for (i, &yi) in y_signed.iter().enumerate() {
        let row = x.row(i);
        let z: f64 = crate::linalg::dot(row, w) + b;
        let yz = yi * z;
        loss += ln1p_exp(-yz);
        // d/dz of ln(1+exp(-yz)) = -y * sigmoid(-yz)
        let coeff = -yi * sigmoid(-yz);
        for (g, &xij) in grad_w.iter_mut().zip(row) {
            *g += coeff * xij;
        }
        grad_b += coeff;
    }
    loss *= inv_n;
    grad_b *= inv_n;
    for (g, &wj) in grad_w.iter_mut().zip(w) {
        *g = *g * inv_n + lambda * wj;
    }
    loss += 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad_w, grad_b)
}

const GRAD_TOL: f64 = 1e-6;

pub(super) fn fit_logistic(x: &Mat, y: &[bool], cfg: &TrainConfig) -> LinearModel {
    let ys = signed(y);
    let mut w = vec![0.0; x.cols()];
    let mut b = 0.0;
    for t in 1..=cfg.epochs {
        let (_, grad_w, grad_b) = logistic_loss_and_grad(&w, b, x, &ys, cfg.regularization);
        let norm =
            (grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
        if norm <= GRAD_TOL {
            break;
        }
        let lr = cfg.learning_rate / (t as f64).sqrt();
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj -= lr * g;
        }
        b -= lr * grad_b;
    }
    LinearModel {
        weights: w,
        intercept: b,
        probabilistic: true,
    }
}

/// Mean hinge loss plus L2; subgradient uses the margin < 1 active set.
fn hinge_loss_and_subgrad(
    w: &[f64],
    b: f64,
    x: &Mat,
    y_signed: &[f64],
    lambda: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.rows();
    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; x.cols()];
    let mut grad_b = 0.0;
    for (i, &yi) in y_signed.iter().enumerate() {
        let row = x.row(i);
        let z: f64 = crate::linalg::dot(row, w) + b;
        let margin = yi * z;
        if margin < 1.0 {
            loss += 1.0 - margin;
            for (g, &xij) in grad_w.iter_mut().zip(row) {
                *g -= yi * xij;
            }
            grad_b -= yi;
        }
    }
    loss *= inv_n;
    grad_b *= inv_n;
    for (g, &wj) in grad_w.iter_mut().zip(w) {
        *g = *g * inv_n + lambda * wj;
    }
    loss += 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad_w, grad_b)
}

pub(super) fn fit_linear_svm(x: &Mat, y: &[bool], cfg: &TrainConfig) -> LinearModel {
    let ys = signed(y);
    let mut w = vec![0.0; x.cols()];
    let mut b = 0.0;
    for t in 1..=cfg.epochs {
        let (_, grad_w, grad_b) = hinge_loss_and_subgrad(&w, b, x, &ys, cfg.regularization);
        let norm =
            (grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
        if norm <= GRAD_TOL {
            break;
        }
        let lr = cfg.learning_rate / (t as f64).sqrt();
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj -= lr * g;
        }
        b -= lr * grad_b;
    }
    LinearModel {
        weights: w,
        intercept: b,
        probabilistic: false,
    }
}

pub(super) fn predict(model: &LinearModel, x: &Mat) -> Vec<Prediction> {
    (0..x.rows())
        .map(|i| {
            let z = crate::linalg::dot(x.row(i), &model.weights) + model.intercept;
            if model.probabilistic {
                let p = sigmoid(z);
                Prediction {
                    label: p > 0.5,
                    score: p,
                }
            } else {
                Prediction {
                    label: z > 0.0,
                    score: z,
                }
            }
        })
        .collect()
}
