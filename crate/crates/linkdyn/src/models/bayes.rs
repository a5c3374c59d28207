//! Gaussian naive Bayes: one Gaussian per class per feature with a
//! variance floor, class priors from the label counts.

use serde::{Deserialize, Serialize};

use crate::linalg::Mat;

use super::Prediction;

const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDensity {
    pub log_prior: f64,
    pub means: Vec<f64>,
    pub vars: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    pub positive: ClassDensity,
    pub negative: ClassDensity,
}

fn density_for(x: &Mat, rows: &[usize], prior: f64) -> ClassDensity {
    let m = x.cols();
    let n = rows.len() as f64;
    let mut means = vec![0.0; m];
    let mut vars = vec![0.0; m];
    for &i in rows {
        for j in 0..m {
            means[j] += x[(i, j)];
        }
    }
    for mean in means.iter_mut() {
        *mean /= n;
    }
    for &i in rows {
        for j in 0..m {
            let d = x[(i, j)] - means[j];
            vars[j] += d * d;
        }
    }
    for var in vars.iter_mut() {
        *var = (*var / n).max(VAR_FLOOR);
    }
    ClassDensity {
        log_prior: prior.ln(),
        means,
        vars,
    }
}

pub(super) fn fit(x: &Mat, y: &[bool]) -> GaussianNbModel {
    let pos_rows: Vec<usize> = (0..x.rows()).filter(|&i| y[i]).collect();
    let neg_rows: Vec<usize> = (0..x.rows()).filter(|&i| !y[i]).collect();
    let n = x.rows() as f64;
    GaussianNbModel {
        positive: density_for(x, &pos_rows, pos_rows.len() as f64 / n),
        negative: density_for(x, &neg_rows, neg_rows.len() as f64 / n),
    }
}

fn log_likelihood(d: &ClassDensity, row: &[f64]) -> f64 {
    let mut ll = d.log_prior;
    for (j, &v) in row.iter().enumerate() {
        let var = d.vars[j];
        let diff = v - d.means[j];
        ll += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - diff * diff / (2.0 * var);
    }
    ll
}

pub(super) fn predict(model: &GaussianNbModel, x: &Mat) -> Vec<Prediction> {
    (0..x.rows())
        .map(|i| {
            let row = x.row(i);
            let lp = log_likelihood(&model.positive, row);
            let ln = log_likelihood(&model.negative, row);
            // P(pos | x) via a stable two-way softmax.
            let max = lp.max(ln);
            let ep = (lp - max).exp();
            let en = (ln - max).exp();
            let score = ep / (ep + en);
            Prediction {
                label: score > 0.5,
                score,
            }
        })
        .collect()
}
