//! The classifier suite behind a single fit/predict contract.
//!
//! Logistic regression, linear SVM, k-NN, Gaussian naive Bayes, random
//! forest, RBF-kernel SVM (Pegasos-style), and a majority-vote ensemble
//! over all six. Everything is deterministic for a fixed seed; no
//! classifier reweights classes, so any imbalance handling happens in the
//! dataset construction.
//!
//! Models serialize to versioned JSON that reloads to bit-identical
//! predictions.

mod bayes;
mod forest;
mod knn;
mod linear;
mod rbf;

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::Mat;

pub use linear::logistic_loss_and_grad;

/// Which classifier to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Logistic,
    LinearSvm,
    Knn,
    NaiveBayes,
    RandomForest,
    RbfSvm,
    Ensemble,
}

impl ClassifierKind {
    /// The six base classifiers (everything except the ensemble).
    pub fn base_kinds() -> [ClassifierKind; 6] {
        [
            ClassifierKind::Logistic,
            ClassifierKind::LinearSvm,
            ClassifierKind::Knn,
            ClassifierKind::NaiveBayes,
            ClassifierKind::RandomForest,
            ClassifierKind::RbfSvm,
        ]
    }

    pub fn all() -> [ClassifierKind; 7] {
        [
            ClassifierKind::Logistic,
            ClassifierKind::LinearSvm,
            ClassifierKind::Knn,
            ClassifierKind::NaiveBayes,
            ClassifierKind::RandomForest,
            ClassifierKind::RbfSvm,
            ClassifierKind::Ensemble,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::Knn => "knn",
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::RbfSvm => "rbf_svm",
            ClassifierKind::Ensemble => "ensemble",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(ClassifierKind::Logistic),
            "linear_svm" => Ok(ClassifierKind::LinearSvm),
            "knn" => Ok(ClassifierKind::Knn),
            "naive_bayes" => Ok(ClassifierKind::NaiveBayes),
            "random_forest" => Ok(ClassifierKind::RandomForest),
            "rbf_svm" => Ok(ClassifierKind::RbfSvm),
            "ensemble" => Ok(ClassifierKind::Ensemble),
            other => Err(Error::InvalidArgument(format!(
                "unknown classifier {other:?} (expected one of logistic, linear_svm, knn, naive_bayes, random_forest, rbf_svm, ensemble)"
            ))),
        }
    }
}

/// Hyperparameters shared by the suite. Fields irrelevant to a given
/// classifier are ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Base step size; decays as 1/sqrt(t) per epoch.
    pub learning_rate: f64,
    /// Epoch cap for the gradient-descent models.
    pub epochs: usize,
    /// L2 strength for the linear models, lambda for Pegasos.
    pub regularization: f64,
    pub k_neighbors: usize,
    pub tree_count: usize,
    pub max_depth: usize,
    /// Random forest: draw each tree's sample with replacement.
    pub bootstrap: bool,
    /// Random forest: features examined per split; None means sqrt(m).
    pub feature_subsample: Option<usize>,
    /// RBF kernel width; None means 1/m.
    pub rbf_gamma: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 500,
            regularization: 1e-3,
            k_neighbors: 5,
            tree_count: 100,
            max_depth: 10,
            bootstrap: true,
            feature_subsample: None,
            rbf_gamma: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("regularization", self.regularization),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.epochs == 0 || self.k_neighbors == 0 || self.tree_count == 0 || self.max_depth == 0
        {
            return Err(Error::InvalidArgument(
                "epochs, k_neighbors, tree_count, and max_depth must be positive".into(),
            ));
        }
        if let Some(g) = self.rbf_gamma {
            if !g.is_finite() || g <= 0.0 {
                return Err(Error::InvalidArgument("rbf_gamma must be positive".into()));
            }
        }
        if let Some(f) = self.feature_subsample {
            if f == 0 {
                return Err(Error::InvalidArgument(
                    "feature_subsample must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One prediction: a positive/negative label plus the raw score behind it
/// (a probability for the probabilistic models, a signed margin for the
/// SVMs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: bool,
    pub score: f64,
}

/// Fitted state per classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Linear(linear::LinearModel),
    Knn(knn::KnnModel),
    Gaussian(bayes::GaussianNbModel),
    Forest(forest::ForestModel),
    Rbf(rbf::RbfModel),
    Ensemble(Vec<TrainedModel>),
}

/// A trained classifier ready to predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    kind: ClassifierKind,
    dim: usize,
    params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    /// Training feature dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weight vector and intercept, present for the linear models.
    pub fn linear_weights(&self) -> Option<(&[f64], f64)> {
        match &self.params {
            ModelParams::Linear(m) => Some((&m.weights, m.intercept)),
            _ => None,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let saved = SavedModel {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        let text = serde_json::to_string_pretty(&saved)
            .map_err(|e| Error::Config(format!("model serialization failed: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let saved: SavedModel = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("model parse failed: {e}")))?;
        if saved.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format version {}",
                saved.format_version
            )));
        }
        Ok(saved.model)
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SavedModel {
    format_version: u32,
    model: TrainedModel,
}

fn validate_training_input(
    kind: ClassifierKind,
    x: &Mat,
    y: &[bool],
    cfg: &TrainConfig,
) -> Result<()> {
    cfg.validate()?;
    if x.rows() != y.len() {
        return Err(Error::Dimension {
            context: "fit labels".into(),
            expected: x.rows(),
            got: y.len(),
        });
    }
    if x.rows() < 2 {
        return Err(Error::Degenerate(format!(
            "training needs at least 2 rows, got {}",
            x.rows()
        )));
    }
    if x.cols() == 0 {
        return Err(Error::Degenerate("training matrix has no columns".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("training matrix".into()));
    }
    let pos = y.iter().filter(|&&l| l).count();
    if kind != ClassifierKind::Knn && (pos == 0 || pos == y.len()) {
        return Err(Error::Degenerate(format!(
            "{kind} needs both classes present (got {pos} positives of {})",
            y.len()
        )));
    }
    Ok(())
}

/// Train a classifier. Deterministic for a fixed `cfg.seed`.
pub fn fit(kind: ClassifierKind, x: &Mat, y: &[bool], cfg: &TrainConfig) -> Result<TrainedModel> {
    validate_training_input(kind, x, y, cfg)?;
    let params = match kind {
        ClassifierKind::Logistic => ModelParams::Linear(linear::fit_logistic(x, y, cfg)),
        ClassifierKind::LinearSvm => ModelParams::Linear(linear::fit_linear_svm(x, y, cfg)),
        ClassifierKind::Knn => ModelParams::Knn(knn::fit(x, y, cfg)),
        ClassifierKind::NaiveBayes => ModelParams::Gaussian(bayes::fit(x, y)),
        ClassifierKind::RandomForest => ModelParams::Forest(forest::fit(x, y, cfg)),
        ClassifierKind::RbfSvm => ModelParams::Rbf(rbf::fit(x, y, cfg)),
        ClassifierKind::Ensemble => {
            let members = exec::ordered_map(&ClassifierKind::base_kinds(), |&member| {
                fit(member, x, y, cfg)
            });
            let mut fitted = Vec::with_capacity(members.len());
            for member in members {
                fitted.push(member?);
            }
            ModelParams::Ensemble(fitted)
        }
    };
    Ok(TrainedModel {
        kind,
        dim: x.cols(),
        params,
    })
}

/// Predict labels and scores for each row of `x`.
pub fn predict(model: &TrainedModel, x: &Mat) -> Result<Vec<Prediction>> {
    if x.cols() != model.dim {
        return Err(Error::Dimension {
            context: "predict".into(),
            expected: model.dim,
            got: x.cols(),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("prediction matrix".into()));
    }
    let preds = match &model.params {
        ModelParams::Linear(m) => linear::predict(m, x),
        ModelParams::Knn(m) => knn::predict(m, x),
        ModelParams::Gaussian(m) => bayes::predict(m, x),
        ModelParams::Forest(m) => forest::predict(m, x),
        ModelParams::Rbf(m) => rbf::predict(m, x),
        ModelParams::Ensemble(members) => {
            let member_preds: Vec<Vec<Prediction>> = {
                let mut all = Vec::with_capacity(members.len());
                for member in members {
                    all.push(predict(member, x)?);
                }
                all
            };
            (0..x.rows())
                .map(|i| {
                    let votes = member_preds.iter().filter(|p| p[i].label).count();
                    let score = votes as f64 / members.len() as f64;
                    Prediction {
                        // Majority vote; ties go negative.
                        label: 2 * votes > members.len(),
                        score,
                    }
                })
                .collect()
        }
    };
    Ok(preds)
}
