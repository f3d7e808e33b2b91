//! Document and sentence data model, the line-delimited corpus file format,
//! and the conversion from a labeled, embedded corpus to the grouped view
//! used by the multi-instance learner.
//!
//! A corpus file holds one JSON object per line:
//!
//! ```text
//! {"id":"a1","ticker":"LEO","published_at":"2005-05-12","text":"...","sentences":["...","..."],"label":"neg","abnormal_return":-0.046}
//! ```
//!
//! `sentences` entries are either plain strings or objects carrying
//! `text`, `tokens`, `embedding`, `prediction` and `gold`.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary polarity. Serialized as `"pos"` / `"neg"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "pos")]
    Positive,
    #[serde(rename = "neg")]
    Negative,
}

impl Polarity {
    /// Positive iff `value >= 0.5`.
    pub fn from_score(score: f64) -> Self {
        if score >= 0.5 {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    /// 1 for positive, 0 for negative.
    pub fn target(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "pos",
            Polarity::Negative => "neg",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pos" | "positive" | "1" => Ok(Polarity::Positive),
            "neg" | "negative" | "0" => Ok(Polarity::Negative),
            other => Err(format!("unknown polarity `{other}`")),
        }
    }
}

/// A classifier's verdict on one sentence. The label is derived from the
/// score, so the two can never disagree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SentencePrediction {
    label: Polarity,
    score: f64,
}

impl SentencePrediction {
    pub fn from_score(score: f64) -> Self {
        Self {
            label: Polarity::from_score(score),
            score,
        }
    }

    pub fn label(&self) -> Polarity {
        self.label
    }

    pub fn score(&self) -> f64 {
        self.score
    }
}

impl<'de> Deserialize<'de> for SentencePrediction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            label: Polarity,
            score: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        if !(0.0..=1.0).contains(&raw.score) {
            return Err(serde::de::Error::custom(format!(
                "score {} outside [0, 1]",
                raw.score
            )));
        }
        let pred = SentencePrediction::from_score(raw.score);
        if pred.label != raw.label {
            return Err(serde::de::Error::custom(format!(
                "label `{}` inconsistent with score {}",
                raw.label, raw.score
            )));
        }
        Ok(pred)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceInstance {
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<SentencePrediction>,
    /// Manually assigned polarity, used only for evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<Polarity>,
}

impl SentenceInstance {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            tokens: Vec::new(),
            embedding: None,
            prediction: None,
            gold: None,
        }
    }

    fn is_bare(&self) -> bool {
        self.tokens.is_empty()
            && self.embedding.is_none()
            && self.prediction.is_none()
            && self.gold.is_none()
    }
}

/// Majority-vote outcome for a whole document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentPrediction {
    pub label: Polarity,
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub ticker: String,
    pub published_at: NaiveDate,
    pub raw_text: String,
    pub sentences: Vec<SentenceInstance>,
    pub label: Option<Polarity>,
    pub abnormal_return: Option<f64>,
    pub prediction: Option<DocumentPrediction>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        ticker: impl Into<String>,
        published_at: NaiveDate,
        raw_text: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            ticker: ticker.into(),
            published_at,
            raw_text: raw_text.into(),
            sentences: Vec::new(),
            label: None,
            abnormal_return: None,
            prediction: None,
        }
    }

    /// Whitespace-delimited word count over the sentences, or over the raw
    /// text when no sentences are present.
    pub fn word_count(&self) -> usize {
        if self.sentences.is_empty() {
            self.raw_text.split_whitespace().count()
        } else {
            self.sentences
                .iter()
                .map(|s| s.text.split_whitespace().count())
                .sum()
        }
    }

    /// Sets the abnormal return and the label implied by its sign. A zero
    /// return leaves the document unlabeled.
    pub fn set_abnormal_return(&mut self, ar: f64) {
        self.abnormal_return = Some(ar);
        self.label = if ar > 0.0 {
            Some(Polarity::Positive)
        } else if ar < 0.0 {
            Some(Polarity::Negative)
        } else {
            None
        };
    }

    fn check_label_consistency(&self) -> std::result::Result<(), String> {
        if let (Some(label), Some(ar)) = (self.label, self.abnormal_return) {
            let expected = if ar > 0.0 {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            if ar == 0.0 || label != expected {
                return Err(format!(
                    "label `{label}` inconsistent with abnormal return {ar}"
                ));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SentenceRecord {
    Text(String),
    Full(SentenceInstance),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    id: String,
    ticker: String,
    published_at: NaiveDate,
    text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sentences: Vec<SentenceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Polarity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    abnormal_return: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prediction: Option<DocumentPrediction>,
}

impl From<DocumentRecord> for Document {
    fn from(r: DocumentRecord) -> Self {
        Document {
            id: r.id,
            ticker: r.ticker,
            published_at: r.published_at,
            raw_text: r.text,
            sentences: r
                .sentences
                .into_iter()
                .map(|s| match s {
                    SentenceRecord::Text(t) => SentenceInstance::new(t),
                    SentenceRecord::Full(s) => s,
                })
                .collect(),
            label: r.label,
            abnormal_return: r.abnormal_return,
            prediction: r.prediction,
        }
    }
}

impl From<&Document> for DocumentRecord {
    fn from(d: &Document) -> Self {
        DocumentRecord {
            id: d.id.clone(),
            ticker: d.ticker.clone(),
            published_at: d.published_at,
            text: d.raw_text.clone(),
            sentences: d
                .sentences
                .iter()
                .map(|s| {
                    if s.is_bare() {
                        SentenceRecord::Text(s.text.clone())
                    } else {
                        SentenceRecord::Full(s.clone())
                    }
                })
                .collect(),
            label: d.label,
            abnormal_return: d.abnormal_return,
            prediction: d.prediction,
        }
    }
}

/// Parses a corpus from any reader. `origin` is only used in error messages.
pub fn read_corpus<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, line_no, e))?;
        let doc = Document::from(record);
        doc.check_label_consistency()
            .map_err(|m| Error::parse(origin, line_no, m))?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateId {
                path: origin.to_path_buf(),
                line: line_no,
                id: doc.id,
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), path)
}

pub fn write_corpus<W: Write>(mut writer: W, docs: &[Document]) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, &DocumentRecord::from(doc))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(BufWriter::new(file), docs).map_err(|e| Error::io(path, e))
}

/// One bag of instances with its document label.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub instances: Vec<Vec<f64>>,
    pub label: Polarity,
}

impl Group {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Grouped instance vectors with binary group labels. Every group is
/// non-empty and every vector has length `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct MilDataset {
    groups: Vec<Group>,
    dim: usize,
}

impl MilDataset {
    pub fn new(groups: Vec<Group>, dim: usize) -> Result<Self> {
        for (k, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::Config(format!("group {k} is empty")));
            }
            for x in &g.instances {
                if x.len() != dim {
                    return Err(Error::DimensionMismatch {
                        context: format!("group {k}"),
                        expected: dim,
                        found: x.len(),
                    });
                }
            }
        }
        Ok(Self { groups, dim })
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// K, the number of groups.
    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// N, the total number of instances.
    pub fn n_instances(&self) -> usize {
        self.groups.iter().map(Group::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// One group per document, sentences in order, label 1 for positive.
pub fn to_mil_dataset(corpus: &[Document]) -> Result<MilDataset> {
    let mut dim: Option<usize> = None;
    let mut groups = Vec::with_capacity(corpus.len());
    for doc in corpus {
        let label = doc
            .label
            .ok_or_else(|| Error::MissingLabel(doc.id.clone()))?;
        if doc.sentences.is_empty() {
            return Err(Error::Config(format!(
                "document `{}` has no sentences",
                doc.id
            )));
        }
        let mut instances = Vec::with_capacity(doc.sentences.len());
        for (i, s) in doc.sentences.iter().enumerate() {
            let v = s
                .embedding
                .as_ref()
                .ok_or_else(|| Error::MissingEmbedding {
                    doc_id: doc.id.clone(),
                    sentence: i,
                })?;
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::DimensionMismatch {
                        context: format!("document `{}` sentence {i}", doc.id),
                        expected: d,
                        found: v.len(),
                    })
                }
                _ => {}
            }
            instances.push(v.clone());
        }
        groups.push(Group { instances, label });
    }
    MilDataset::new(groups, dim.unwrap_or(0))
}
