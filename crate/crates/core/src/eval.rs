//! Temporal train/test split, confusion metrics, label-distribution
//! summaries and report tables.
//!
//! Convention: the positive class is the reference class for precision and
//! recall. Neutral predictions count as errors for accuracy and are left out
//! of the precision/recall confusion.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::baselines::Sentiment;
use crate::corpus::{Document, Polarity};
use crate::error::{Error, Result};

/// Sorts by `(published_at, id)` and puts the first `ceil(ratio * n)`
/// documents into the training set.
pub fn temporal_split(
    mut corpus: Vec<Document>,
    ratio: f64,
) -> Result<(Vec<Document>, Vec<Document>)> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Config(format!(
            "split ratio must lie in [0, 1], got {ratio}"
        )));
    }
    corpus.sort_by(|a, b| {
        a.published_at
            .cmp(&b.published_at)
            .then_with(|| a.id.cmp(&b.id))
    });
    let n = corpus.len();
    let n_train = ((ratio * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n);
    let test = corpus.split_off(n_train);
    Ok((corpus, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub neutral_rate: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub neutral: usize,
    pub total: usize,
    /// False when the metric's denominator was zero and 0 was reported.
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub f1_defined: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, false)
    } else {
        (num as f64 / den as f64, true)
    }
}

pub fn score_predictions(predicted: &[Sentiment], gold: &[Polarity]) -> Result<EvalReport> {
    if predicted.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: gold.len(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fn_, mut neutral) = (0, 0, 0, 0, 0);
    for (p, g) in predicted.iter().zip(gold) {
        match (p, g) {
            (Sentiment::Positive, Polarity::Positive) => tp += 1,
            (Sentiment::Positive, Polarity::Negative) => fp += 1,
            (Sentiment::Negative, Polarity::Negative) => tn += 1,
            (Sentiment::Negative, Polarity::Positive) => fn_ += 1,
            (Sentiment::Neutral, _) => neutral += 1,
        }
    }
    let total = predicted.len();
    let (accuracy, _) = ratio(tp + tn, total);
    let (neutral_rate, _) = ratio(neutral, total);
    let (precision, precision_defined) = ratio(tp, tp + fp);
    let (recall, recall_defined) = ratio(tp, tp + fn_);
    let f1_defined = precision_defined && recall_defined && precision + recall > 0.0;
    let f1 = if f1_defined {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EvalReport {
        accuracy,
        recall,
        precision,
        f1,
        neutral_rate,
        tp,
        fp,
        tn,
        fn_,
        neutral,
        total,
        precision_defined,
        recall_defined,
        f1_defined,
    })
}

/// Market reaction × sentence polarity counts plus document composition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LabelDistribution {
    /// `[reaction][sentence]`, index 0 positive, 1 negative.
    pub counts: [[usize; 2]; 2],
    pub documents: usize,
    pub mixed: usize,
    pub only_positive: usize,
    pub only_negative: usize,
}

fn idx(p: Polarity) -> usize {
    match p {
        Polarity::Positive => 0,
        Polarity::Negative => 1,
    }
}

impl LabelDistribution {
    /// Row share of `sentence` polarity among documents with `reaction`.
    pub fn row_share(&self, reaction: Polarity, sentence: Polarity) -> f64 {
        let row = self.counts[idx(reaction)];
        ratio(row[idx(sentence)], row[0] + row[1]).0
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<18}{:>22}{:>22}",
            "market reaction", "positive sentences", "negative sentences"
        );
        for reaction in [Polarity::Positive, Polarity::Negative] {
            let row = self.counts[idx(reaction)];
            let cell = |p: Polarity| {
                format!(
                    "{} ({:.2}%)",
                    row[idx(p)],
                    100.0 * self.row_share(reaction, p)
                )
            };
            let name = match reaction {
                Polarity::Positive => "positive",
                Polarity::Negative => "negative",
            };
            let _ = writeln!(
                s,
                "{:<18}{:>22}{:>22}",
                name,
                cell(Polarity::Positive),
                cell(Polarity::Negative)
            );
        }
        let share = |n: usize| 100.0 * ratio(n, self.documents).0;
        let _ = writeln!(
            s,
            "documents: {}  both polarities: {:.2}%  only positive: {:.2}%  only negative: {:.2}%",
            self.documents,
            share(self.mixed),
            share(self.only_positive),
            share(self.only_negative)
        );
        s
    }
}

/// Counts over labeled documents whose sentences carry predictions; other
/// documents and sentences are skipped.
pub fn label_distribution(corpus: &[Document]) -> LabelDistribution {
    let mut dist = LabelDistribution::default();
    for doc in corpus {
        let Some(reaction) = doc.label else { continue };
        let labels: Vec<Polarity> = doc
            .sentences
            .iter()
            .filter_map(|s| s.prediction.map(|p| p.label()))
            .collect();
        if labels.is_empty() {
            continue;
        }
        let pos = labels.iter().filter(|&&l| l == Polarity::Positive).count();
        let neg = labels.len() - pos;
        dist.counts[idx(reaction)][0] += pos;
        dist.counts[idx(reaction)][1] += neg;
        dist.documents += 1;
        match (pos > 0, neg > 0) {
            (true, true) => dist.mixed += 1,
            (true, false) => dist.only_positive += 1,
            _ => dist.only_negative += 1,
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Sentence,
    Document,
}

/// Label key of sentence `index` in document `doc_id`.
pub fn sentence_label_key(doc_id: &str, index: usize) -> String {
    crate::embed::sentence_key(doc_id, index)
}

pub type LabelSet = BTreeMap<String, Sentiment>;

/// Predicted labels carried by a corpus: sentence predictions or document
/// majority labels.
pub fn predicted_labels(corpus: &[Document], mode: EvalMode) -> LabelSet {
    let mut out = LabelSet::new();
    for doc in corpus {
        match mode {
            EvalMode::Document => {
                if let Some(p) = doc.prediction {
                    out.insert(doc.id.clone(), p.label.into());
                }
            }
            EvalMode::Sentence => {
                for (i, s) in doc.sentences.iter().enumerate() {
                    if let Some(p) = s.prediction {
                        out.insert(sentence_label_key(&doc.id, i), p.label().into());
                    }
                }
            }
        }
    }
    out
}

/// Reference labels carried by a corpus: sentence `gold` fields or document
/// labels.
pub fn gold_labels(corpus: &[Document], mode: EvalMode) -> LabelSet {
    let mut out = LabelSet::new();
    for doc in corpus {
        match mode {
            EvalMode::Document => {
                if let Some(l) = doc.label {
                    out.insert(doc.id.clone(), l.into());
                }
            }
            EvalMode::Sentence => {
                for (i, s) in doc.sentences.iter().enumerate() {
                    if let Some(g) = s.gold {
                        out.insert(sentence_label_key(&doc.id, i), g.into());
                    }
                }
            }
        }
    }
    out
}

/// Label file: `key<TAB>label` per line, label one of `pos`, `neg`, `neutral`.
pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = LabelSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (key, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `key<TAB>label`"))?;
        let label: Sentiment = label
            .trim()
            .parse()
            .map_err(|e: String| Error::parse(path, i + 1, e))?;
        if out.insert(key.to_string(), label).is_some() {
            return Err(Error::parse(path, i + 1, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &LabelSet) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (k, v) in labels {
        writeln!(w, "{k}\t{v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pairs predictions with gold labels by key, in key order. Every gold key
/// needs a prediction; a neutral gold label is rejected.
pub fn align(predicted: &LabelSet, gold: &LabelSet) -> Result<(Vec<Sentiment>, Vec<Polarity>)> {
    let mut p = Vec::with_capacity(gold.len());
    let mut g = Vec::with_capacity(gold.len());
    for (key, gold_label) in gold {
        let pred = predicted
            .get(key)
            .ok_or_else(|| Error::Config(format!("no prediction for `{key}`")))?;
        let gold_label = match gold_label {
            Sentiment::Positive => Polarity::Positive,
            Sentiment::Negative => Polarity::Negative,
            Sentiment::Neutral => {
                return Err(Error::Config(format!("gold label for `{key}` is neutral")))
            }
        };
        p.push(*pred);
        g.push(gold_label);
    }
    let extra = predicted.keys().filter(|k| !gold.contains_key(*k)).count();
    if extra > 0 {
        log::warn!("{extra} predictions have no gold label and are ignored");
    }
    Ok((p, g))
}

fn pct(v: f64, defined: bool) -> String {
    if defined {
        format!("{:.2}%", 100.0 * v)
    } else {
        "n/a".to_string()
    }
}

/// Plain-text comparison table, one row per method.
pub fn render_table(title: &str, rows: &[(String, EvalReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(6).max(6) + 2;
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(
        s,
        "(neutral predictions count as errors for accuracy; positive is the reference class)"
    );
    let _ = writeln!(
        s,
        "{:<width$}{:>10}{:>10}{:>11}{:>10}{:>10}{:>8}",
        "Method", "Accuracy", "Recall", "Precision", "F1-Score", "Neutral", "N"
    );
    let _ = writeln!(s, "{}", "-".repeat(width + 59));
    for (name, r) in rows {
        let _ = writeln!(
            s,
            "{:<width$}{:>10}{:>10}{:>11}{:>10}{:>10}{:>8}",
            name,
            pct(r.accuracy, r.total > 0),
            pct(r.recall, r.recall_defined),
            pct(r.precision, r.precision_defined),
            pct(r.f1, r.f1_defined),
            pct(r.neutral_rate, r.total > 0),
            r.total
        );
    }
    s
}

#[derive(Serialize)]
struct JsonRow<'a> {
    method: &'a str,
    #[serde(flatten)]
    report: &'a EvalReport,
}

/// Machine-readable variant of [`render_table`].
pub fn render_json(rows: &[(String, EvalReport)]) -> String {
    let rows: Vec<JsonRow> = rows
        .iter()
        .map(|(method, report)| JsonRow { method, report })
        .collect();
    serde_json::to_string_pretty(&rows).expect("reports serialize")
}
