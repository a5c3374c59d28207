//! Singular value decomposition, eigenfeature projection, and feature
//! ranking.
//!
//! The SVD is a one-sided Jacobi iteration written here rather than taken
//! from a linear-algebra crate: the feature matrices are tall and narrow
//! (at most a few thousand rows by 29 columns), where Jacobi is simple,
//! accurate to near machine precision, and easy to make deterministic.
//! Sign ambiguity is resolved by forcing the largest-magnitude entry of
//! each right singular vector to be non-negative.
//!
//! Feature ranking back-projects a linear classifier's weight vector `w`
//! (trained on the top-k projection) onto the original features as
//! `(V ∘ V) · w`: squared right-singular-vector loadings times classifier
//! weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Column means and deviations fitted on a training matrix, applied
/// unchanged to held-out rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Deviations below this are floored so constant columns stay finite.
pub const STD_FLOOR: f64 = 1e-9;

impl Standardization {
    pub fn fit(data: &Mat) -> Self {
        let n = data.rows().max(1) as f64;
        let mut means = vec![0.0; data.cols()];
        let mut stds = vec![0.0; data.cols()];
        for j in 0..data.cols() {
            let mean = (0..data.rows()).map(|i| data[(i, j)]).sum::<f64>() / n;
            let var = (0..data.rows())
                .map(|i| {
                    let d = data[(i, j)] - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            means[j] = mean;
            stds[j] = var.sqrt().max(STD_FLOOR);
        }
        Standardization { means, stds }
    }

    pub fn apply(&self, data: &Mat) -> Result<Mat> {
        if data.cols() != self.means.len() {
            return Err(Error::Dimension {
                context: "Standardization::apply".into(),
                expected: self.means.len(),
                got: data.cols(),
            });
        }
        let mut out = data.clone();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                out[(i, j)] = (out[(i, j)] - self.means[j]) / self.stds[j];
            }
        }
        Ok(out)
    }
}

/// A finite feature matrix, optionally carrying the standardization that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Mat,
    standardization: Option<Standardization>,
}

impl FeatureMatrix {
    pub fn new(data: Mat) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::EmptyInput("feature matrix has no entries".into()));
        }
        if !data.is_finite() {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        Ok(FeatureMatrix {
            data,
            standardization: None,
        })
    }

    pub fn data(&self) -> &Mat {
        &self.data
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardization.is_some()
    }

    /// Z-score the columns, remembering the transform for held-out rows.
    pub fn standardized(&self) -> FeatureMatrix {
        let std = Standardization::fit(&self.data);
        let data = std.apply(&self.data).expect("dimensions match");
        FeatureMatrix {
            data,
            standardization: Some(std),
        }
    }
}

/// Thin SVD factors: `A = U · diag(S) · Vᵀ` with `r = min(rows, cols)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdFactors {
    /// rows × r, orthonormal columns.
    pub u: Mat,
    /// Non-increasing, non-negative singular values, length r.
    pub s: Vec<f64>,
    /// cols × r, orthonormal columns of right singular vectors.
    pub v: Mat,
}

impl SvdFactors {
    pub fn rank_dim(&self) -> usize {
        self.s.len()
    }

    /// `U · diag(S) · Vᵀ`.
    pub fn reconstruct(&self) -> Mat {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for j in 0..us.cols() {
                us[(i, j)] *= self.s[j];
            }
        }
        us.matmul(&self.v.transpose()).expect("factor dims agree")
    }
}

const JACOBI_EPS: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

/// One-sided Jacobi on a tall matrix (rows >= cols). Returns (U, S, V).
fn jacobi_tall(a: &Mat) -> Result<(Mat, Vec<f64>, Mat)> {
    let n = a.rows();
    let m = a.cols();
    debug_assert!(n >= m);
    let mut b = a.clone();
    let mut v = Mat::identity(m);

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..n {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    alpha += bp * bp;
                    beta += bq * bq;
                    gamma += bp * bq;
                }
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = c * bp - s * bq;
                    b[(i, q)] = s * bp + c * bq;
                }
                for i in 0..m {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            return Ok(finish_jacobi(b, v));
        }
    }
    Err(Error::NoConvergence(format!(
        "one-sided Jacobi did not settle in {MAX_SWEEPS} sweeps"
    )))
}

/// Column norms become singular values; columns are normalized into U,
/// sorted by descending singular value (ties keep original order), and
/// numerically-zero columns get an orthonormal completion.
fn finish_jacobi(b: Mat, v: Mat) -> (Mat, Vec<f64>, Mat) {
    let n = b.rows();
    let m = b.cols();
    let norms: Vec<f64> = (0..m)
        .map(|j| (0..n).map(|i| b[(i, j)] * b[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let scale = norms.iter().cloned().fold(0.0f64, f64::max);
    let zero_tol = scale * 1e-13;

    let mut u = Mat::zeros(n, m);
    let mut s = vec![0.0; m];
    let mut v_sorted = Mat::zeros(v.rows(), m);
    let mut zero_cols = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = norms[src];
        for i in 0..v.rows() {
            v_sorted[(i, dst)] = v[(i, src)];
        }
        if norms[src] > zero_tol && norms[src] > 0.0 {
            for i in 0..n {
                u[(i, dst)] = b[(i, src)] / norms[src];
            }
        } else {
            zero_cols.push(dst);
        }
    }

    // Gram-Schmidt standard basis vectors against the existing U columns
    // to fill the slots whose singular value vanished.
    let mut next_basis = 0usize;
    let filled: Vec<usize> = (0..m).filter(|j| !zero_cols.contains(j)).collect();
    let mut completed: Vec<usize> = Vec::new();
    for &col in &zero_cols {
        loop {
            assert!(next_basis < n, "ran out of basis vectors completing U");
            let mut cand = vec![0.0; n];
            cand[next_basis] = 1.0;
            next_basis += 1;
            for &j in filled.iter().chain(completed.iter()) {
                let proj: f64 = (0..n).map(|i| cand[i] * u[(i, j)]).sum();
                if proj != 0.0 {
                    for (i, c) in cand.iter_mut().enumerate() {
                        *c -= proj * u[(i, j)];
                    }
                }
            }
            let norm: f64 = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.5 {
                for (i, &c) in cand.iter().enumerate() {
                    u[(i, col)] = c / norm;
                }
                completed.push(col);
                break;
            }
        }
    }

    (u, s, v_sorted)
}

/// Flip factor columns so the largest-magnitude entry of each V column is
/// non-negative (ties broken by the lowest row index).
fn fix_signs(u: &mut Mat, v: &mut Mat) {
    for j in 0..v.cols() {
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for i in 0..v.rows() {
            let a = v[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if v[(best, j)] < 0.0 {
            for i in 0..v.rows() {
                v[(i, j)] = -v[(i, j)];
            }
            for i in 0..u.rows() {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
}

/// Compute the thin SVD of a feature matrix.
pub fn svd(a: &FeatureMatrix) -> Result<SvdFactors> {
    let data = a.data();
    if !data.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    let (mut u, s, mut v) = if data.rows() >= data.cols() {
        jacobi_tall(data)?
    } else {
        // Wide case: factor the transpose and swap the roles of U and V.
        let (ut, s, vt) = jacobi_tall(&data.transpose())?;
        (vt, s, ut)
    };
    fix_signs(&mut u, &mut v);
    Ok(SvdFactors { u, s, v })
}

/// Project rows of `a` onto the top-k right singular vectors: `A · V_k`.
/// `a` must live in the same (standardized) space the factors were
/// computed in; apply the training [`Standardization`] to held-out rows
/// first.
pub fn project(a: &Mat, factors: &SvdFactors, k: usize) -> Result<Mat> {
    if k == 0 || k > factors.rank_dim() {
        return Err(Error::InvalidArgument(format!(
            "projection rank k={k} outside 1..={}",
            factors.rank_dim()
        )));
    }
    if a.cols() != factors.v.rows() {
        return Err(Error::Dimension {
            context: "project".into(),
            expected: factors.v.rows(),
            got: a.cols(),
        });
    }
    a.matmul(&factors.v.truncate_cols(k))
}

/// Per-original-feature scores with their descending-order permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// `(V ∘ V) · w`, one score per original feature.
    pub scores: Vec<f64>,
    /// Feature indices sorted by descending score, ties by index.
    pub order: Vec<usize>,
}

impl FeatureRanking {
    /// Rank position (0-based) of a feature index.
    pub fn position_of(&self, feature: usize) -> Option<usize> {
        self.order.iter().position(|&f| f == feature)
    }
}

/// Back-project classifier weights `w` (length k) through the squared
/// right singular vectors: `scores = (V_k ∘ V_k) · w`.
pub fn rank_features(factors: &SvdFactors, w: &[f64]) -> Result<FeatureRanking> {
    let k = w.len();
    if k == 0 || k > factors.rank_dim() {
        return Err(Error::Dimension {
            context: "rank_features weight vector".into(),
            expected: factors.rank_dim(),
            got: k,
        });
    }
    let m = factors.v.rows();
    let mut scores = vec![0.0; m];
    for (i, score) in scores.iter_mut().enumerate() {
        *score = (0..k)
            .map(|j| {
                let vij = factors.v[(i, j)];
                vij * vij * w[j]
            })
            .sum();
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("feature ranking scores".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));
    Ok(FeatureRanking { scores, order })
}

/// Fraction of total spectral energy captured by the top-k singular
/// values.
pub fn variance_captured(factors: &SvdFactors, k: usize) -> f64 {
    let total: f64 = factors.s.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0.0;
    }
    factors.s.iter().take(k).map(|s| s * s).sum::<f64>() / total
}
