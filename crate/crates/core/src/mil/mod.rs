//! Multi-instance sentiment learner.
//!
//! A logistic instance classifier `σ(θᵀ[x; 1])` is trained from group labels
//! alone by minimizing a two-part objective: an RBF-weighted penalty on score
//! differences between similar instances, and a squared error between each
//! group's mean instance score and its label.

mod model_io;
mod objective;
mod synthetic;
mod train;

use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentPrediction, Polarity, SentencePrediction};
use crate::error::{Error, Result};

pub use model_io::{load_model, read_model, save_model, write_model, MODEL_FORMAT, MODEL_VERSION};
pub use objective::{gradient, loss, loss_and_gradient};
pub use synthetic::{generate_synthetic, SyntheticData};
pub use train::{
    grid_search, median_heuristic_gamma, select_best, train, GridCell, GridReport, GridSpec,
    TrainOutcome,
};

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_dim(context: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context: context.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

pub(crate) fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(-gamma * ||x - y||²)`
pub fn rbf_similarity(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    check_dim("rbf_similarity", x.len(), y.len())?;
    Ok((-gamma * squared_distance(x, y)).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Weight of the document-error term.
    pub lambda: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub groups_per_batch: usize,
    pub kernel_gamma: f64,
    /// Replace `kernel_gamma` by `1 / median ||xi - xj||²` over sampled pairs.
    pub median_gamma: bool,
    /// Append a constant feature so the last weight acts as an intercept.
    pub use_bias: bool,
    pub seed: u64,
    /// Upper bound on instances used for the per-epoch full loss.
    pub trace_max_instances: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            learning_rate: 0.05,
            momentum: 0.8,
            epochs: 25,
            groups_per_batch: 32,
            kernel_gamma: 1.0,
            median_gamma: false,
            use_bias: true,
            seed: 0,
            trace_max_instances: 20_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            ));
        }
        if self.groups_per_batch == 0 {
            return bad("groups_per_batch must be positive".into());
        }
        if !(self.kernel_gamma > 0.0 && self.kernel_gamma.is_finite()) {
            return bad(format!(
                "kernel_gamma must be > 0, got {}",
                self.kernel_gamma
            ));
        }
        if self.trace_max_instances == 0 {
            return bad("trace_max_instances must be positive".into());
        }
        Ok(())
    }
}

/// How a document label is derived from its sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocumentRule {
    /// Most frequent sentence label; ties go to the mean score.
    #[default]
    Majority,
    /// Mean sentence score against the 0.5 threshold.
    MeanScore,
}

/// Trained parameters. `theta` has `dim + 1` entries, the last one weighting
/// the constant feature (zero and inert when the bias is disabled).
#[derive(Debug, Clone, PartialEq)]
pub struct MilModel {
    theta: Vec<f64>,
    dim: usize,
    config: TrainConfig,
}

impl MilModel {
    pub fn new(theta: Vec<f64>, config: TrainConfig) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Model(
                "theta must hold at least the bias weight".into(),
            ));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Model("theta contains non-finite values".into()));
        }
        let dim = theta.len() - 1;
        Ok(Self { theta, dim, config })
    }

    /// All-zero parameters.
    pub fn zeros(dim: usize, config: TrainConfig) -> Self {
        Self {
            theta: vec![0.0; dim + 1],
            dim,
            config,
        }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub(crate) fn bias_feature(&self) -> f64 {
        bias_feature(&self.config)
    }
}

pub(crate) fn bias_feature(config: &TrainConfig) -> f64 {
    if config.use_bias {
        1.0
    } else {
        0.0
    }
}

/// `θᵀ[x; b]` with `b` the constant feature.
pub(crate) fn linear(theta: &[f64], x: &[f64], bias: f64) -> f64 {
    let d = theta.len() - 1;
    theta[..d].iter().zip(x).map(|(t, v)| t * v).sum::<f64>() + theta[d] * bias
}

pub fn instance_score(model: &MilModel, x: &[f64]) -> Result<f64> {
    check_dim("instance", model.dim, x.len())?;
    Ok(sigmoid(linear(&model.theta, x, model.bias_feature())))
}

/// Mean instance score of a group.
pub fn group_score(model: &MilModel, group: &[Vec<f64>]) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::Empty("group"));
    }
    let mut sum = 0.0;
    for x in group {
        sum += instance_score(model, x)?;
    }
    Ok(sum / group.len() as f64)
}

/// Positive iff the score is at least 0.5.
pub fn predict_sentence(model: &MilModel, x: &[f64]) -> Result<SentencePrediction> {
    instance_score(model, x).map(SentencePrediction::from_score)
}

pub fn predict_document(
    model: &MilModel,
    group: &[Vec<f64>],
    rule: DocumentRule,
) -> Result<DocumentPrediction> {
    if group.is_empty() {
        return Err(Error::Empty("group"));
    }
    let scores = group
        .iter()
        .map(|x| instance_score(model, x))
        .collect::<Result<Vec<_>>>()?;
    let positive = scores.iter().filter(|&&s| s >= 0.5).count();
    let negative = scores.len() - positive;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let label = match rule {
        DocumentRule::Majority if positive != negative => {
            if positive > negative {
                Polarity::Positive
            } else {
                Polarity::Negative
            }
        }
        _ => Polarity::from_score(mean),
    };
    Ok(DocumentPrediction {
        label,
        positive,
        negative,
    })
}
