//! Comparison classifiers: polarity-dictionary counting and L2-regularized
//! logistic regression on bag-of-words (or any sparse/dense) features.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Polarity, SentencePrediction};
use crate::error::{Error, Result};
use crate::mil::sigmoid;

/// Three-way label; only dictionary methods produce `Neutral`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl From<Polarity> for Sentiment {
    fn from(p: Polarity) -> Self {
        match p {
            Polarity::Positive => Sentiment::Positive,
            Polarity::Negative => Sentiment::Negative,
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sentiment::Positive => "pos",
            Sentiment::Negative => "neg",
            Sentiment::Neutral => "neutral",
        })
    }
}

impl std::str::FromStr for Sentiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "neutral" | "neu" => Ok(Sentiment::Neutral),
            other => other.parse::<Polarity>().map(Sentiment::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarityDictionary {
    pub name: String,
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl PolarityDictionary {
    pub fn new<I, J, S, T>(name: impl Into<String>, positive: I, negative: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let normalize = |s: &str| s.trim().to_lowercase();
        let positive: BTreeSet<String> = positive
            .into_iter()
            .map(|s| normalize(s.as_ref()))
            .filter(|s| !s.is_empty())
            .collect();
        let negative: BTreeSet<String> = negative
            .into_iter()
            .map(|s| normalize(s.as_ref()))
            .filter(|s| !s.is_empty())
            .collect();
        if let Some(term) = positive.intersection(&negative).next() {
            return Err(Error::DictionaryOverlap(term.clone()));
        }
        Ok(Self {
            name: name.into(),
            positive,
            negative,
        })
    }

    pub fn positive_terms(&self) -> &BTreeSet<String> {
        &self.positive
    }

    pub fn negative_terms(&self) -> &BTreeSet<String> {
        &self.negative
    }
}

fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Two word lists, one term per line.
pub fn load_dictionary(
    name: impl Into<String>,
    positive_path: impl AsRef<Path>,
    negative_path: impl AsRef<Path>,
) -> Result<PolarityDictionary> {
    let pos = read_word_list(positive_path.as_ref())?;
    let neg = read_word_list(negative_path.as_ref())?;
    PolarityDictionary::new(name, pos, neg)
}

/// Counts positive and negative hits; equal counts (including none) are
/// neutral. No negation handling.
pub fn dictionary_classify<S: AsRef<str>>(tokens: &[S], dict: &PolarityDictionary) -> Sentiment {
    let (mut pos, mut neg) = (0usize, 0usize);
    for t in tokens {
        let t = t.as_ref();
        if dict.positive.contains(t) {
            pos += 1;
        } else if dict.negative.contains(t) {
            neg += 1;
        }
    }
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => Sentiment::Positive,
        std::cmp::Ordering::Less => Sentiment::Negative,
        std::cmp::Ordering::Equal => Sentiment::Neutral,
    }
}

/// Term → column mapping for bag-of-words features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowIndex {
    columns: BTreeMap<String, usize>,
}

impl BowIndex {
    /// Columns assigned in lexicographic term order.
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sorted: BTreeSet<String> = terms.into_iter().map(Into::into).collect();
        Self {
            columns: sorted
                .into_iter()
                .enumerate()
                .map(|(i, t)| (t, i))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.columns.get(term).copied()
    }
}

/// Sparse vector stored as column → value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector(BTreeMap<usize, f64>);

impl SparseVector {
    pub fn from_dense(values: &[f64]) -> Self {
        Self(
            values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        )
    }

    pub fn get(&self, column: usize) -> f64 {
        self.0.get(&column).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().map(|(&i, &v)| (i, v))
    }

    pub fn nnz(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.0.clone();
        for (i, v) in other.iter() {
            *out.entry(i).or_default() += v;
        }
        SparseVector(out)
    }

    fn dot(&self, weights: &[f64]) -> f64 {
        self.0.iter().map(|(&i, &v)| weights[i] * v).sum()
    }

    fn max_column(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }
}

/// Raw term frequencies; tokens outside the index are ignored.
pub fn bow_featurize<S: AsRef<str>>(tokens: &[S], index: &BowIndex) -> SparseVector {
    let mut counts = BTreeMap::new();
    for t in tokens {
        if let Some(c) = index.column(t.as_ref()) {
            *counts.entry(c).or_insert(0.0) += 1.0;
        }
    }
    SparseVector(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowModel {
    pub index: Option<BowIndex>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2_strength: f64,
    pub iterations: usize,
}

impl BowModel {
    pub fn score(&self, features: &SparseVector) -> f64 {
        sigmoid(features.dot(&self.weights) + self.intercept)
    }
}

/// Mean logistic loss plus `(l2 / 2)‖w‖²`; the intercept is not penalized.
pub fn logreg_objective(
    weights: &[f64],
    intercept: f64,
    features: &[SparseVector],
    labels: &[Polarity],
    l2_strength: f64,
) -> f64 {
    let n = features.len() as f64;
    let data: f64 = features
        .iter()
        .zip(labels)
        .map(|(x, y)| {
            let z = x.dot(weights) + intercept;
            // log(1 + e^z) - y z, computed without overflow
            let softplus = if z > 0.0 {
                z + (-z).exp().ln_1p()
            } else {
                z.exp().ln_1p()
            };
            softplus - y.target() * z
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2_strength * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`logreg_objective`]: `(∂w, ∂b)`.
pub fn logreg_gradient(
    weights: &[f64],
    intercept: f64,
    features: &[SparseVector],
    labels: &[Polarity],
    l2_strength: f64,
) -> (Vec<f64>, f64) {
    let n = features.len() as f64;
    let mut gw: Vec<f64> = weights.iter().map(|w| l2_strength * w).collect();
    let mut gb = 0.0;
    for (x, y) in features.iter().zip(labels) {
        let r = (sigmoid(x.dot(weights) + intercept) - y.target()) / n;
        for (i, v) in x.iter() {
            gw[i] += r * v;
        }
        gb += r;
    }
    (gw, gb)
}

pub const LOGREG_TOLERANCE: f64 = 1e-6;
pub const LOGREG_MAX_ITER: usize = 10_000;

/// Runs the fixed-step descent for at most `max_iter` steps, calling
/// `on_step` with the parameters after each step.
fn descend(
    features: &[SparseVector],
    labels: &[Polarity],
    n_features: usize,
    l2_strength: f64,
    seed: u64,
    max_iter: usize,
    mut on_step: impl FnMut(&[f64], f64),
) -> (Vec<f64>, f64, usize) {
    let mean_sq = features
        .iter()
        .map(|x| 1.0 + x.iter().map(|(_, v)| v * v).sum::<f64>())
        .sum::<f64>()
        / features.len() as f64;
    let step = 1.0 / (0.25 * mean_sq + l2_strength);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = (0..n_features)
        .map(|_| rng.random_range(-0.01..=0.01))
        .collect();
    let mut intercept = 0.0;
    let mut iterations = 0;
    while iterations < max_iter {
        let (gw, gb) = logreg_gradient(&weights, intercept, features, labels, l2_strength);
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm < LOGREG_TOLERANCE {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= step * g;
        }
        intercept -= step * gb;
        iterations += 1;
        on_step(&weights, intercept);
    }
    (weights, intercept, iterations)
}

/// Full-batch gradient descent with step `1 / L`, where
/// `L = mean‖[x; 1]‖² / 4 + l2` bounds the objective's curvature, so every
/// step decreases the loss. Stops when the gradient norm drops below 1e-6 or
/// after 10⁴ iterations. Weights start uniform in `[-0.01, 0.01]` from `seed`.
pub fn train_logreg(
    features: &[SparseVector],
    labels: &[Polarity],
    n_features: usize,
    l2_strength: f64,
    seed: u64,
) -> Result<BowModel> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if !(l2_strength >= 0.0 && l2_strength.is_finite()) {
        return Err(Error::Config(format!(
            "l2_strength must be >= 0, got {l2_strength}"
        )));
    }
    let has_pos = labels.contains(&Polarity::Positive);
    let has_neg = labels.contains(&Polarity::Negative);
    if !(has_pos && has_neg) {
        return Err(Error::SingleClass);
    }
    if let Some(c) = features.iter().filter_map(SparseVector::max_column).max() {
        if c >= n_features {
            return Err(Error::DimensionMismatch {
                context: "feature column".into(),
                expected: n_features,
                found: c + 1,
            });
        }
    }

    let (weights, intercept, iterations) = descend(
        features,
        labels,
        n_features,
        l2_strength,
        seed,
        LOGREG_MAX_ITER,
        |_, _| {},
    );
    Ok(BowModel {
        index: None,
        weights,
        intercept,
        l2_strength,
        iterations,
    })
}

/// Logistic regression over bag-of-words counts.
pub fn train_bow_logreg<S: AsRef<str>>(
    documents: &[Vec<S>],
    labels: &[Polarity],
    index: BowIndex,
    l2_strength: f64,
    seed: u64,
) -> Result<BowModel> {
    let features: Vec<SparseVector> = documents.iter().map(|d| bow_featurize(d, &index)).collect();
    let mut model = train_logreg(&features, labels, index.len(), l2_strength, seed)?;
    model.index = Some(index);
    Ok(model)
}

/// `σ(wᵀc + b) ≥ 0.5` → positive.
pub fn bow_predict<S: AsRef<str>>(model: &BowModel, tokens: &[S]) -> Result<SentencePrediction> {
    let index = model
        .index
        .as_ref()
        .ok_or_else(|| Error::Config("model was not trained on bag-of-words features".into()))?;
    Ok(SentencePrediction::from_score(
        model.score(&bow_featurize(tokens, index)),
    ))
}

/// Prediction for dense features (e.g. sentence embeddings).
pub fn dense_predict(model: &BowModel, x: &[f64]) -> Result<SentencePrediction> {
    if x.len() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            context: "dense features".into(),
            expected: model.weights.len(),
            found: x.len(),
        });
    }
    Ok(SentencePrediction::from_score(
        model.score(&SparseVector::from_dense(x)),
    ))
}
