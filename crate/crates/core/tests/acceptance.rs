//! Acceptance gate. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criterion 10 needs an external labeled sentence corpus; point
//! `MILSENT_REVIEW_CORPUS` at a corpus file (documents with `label`,
//! sentences with `gold` and either stored embeddings or a sentence-vector
//! file in `MILSENT_REVIEW_VECTORS`). Without it the criterion is skipped.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use milsent::baselines::{
    bow_predict, dictionary_classify, train_bow_logreg, BowIndex, PolarityDictionary, Sentiment,
};
use milsent::corpus::{
    load_corpus, to_mil_dataset, Document, Group, Polarity, SentenceInstance, SentencePrediction,
};
use milsent::embed::{embed_corpus, load_sentence_vectors};
use milsent::eval::{score_predictions, temporal_split};
use milsent::eventstudy::{
    fit_market_model, label_documents, simple_returns, EventLabelConfig, PriceSeries,
};
use milsent::mil::{
    generate_synthetic, gradient, instance_score, loss, predict_document, predict_sentence, train,
    DocumentRule, MilModel, TrainConfig,
};
use milsent::preprocess::tokenize;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn cfg(use_bias: bool) -> TrainConfig {
    TrainConfig {
        use_bias,
        ..TrainConfig::default()
    }
}

fn random_batch(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Group> {
    let n_groups = rng.random_range(1..=10);
    (0..n_groups)
        .map(|_| {
            let n = rng.random_range(1..=5);
            Group {
                instances: (0..n)
                    .map(|_| (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect())
                    .collect(),
                label: if rng.random_bool(0.5) {
                    Polarity::Positive
                } else {
                    Polarity::Negative
                },
            }
        })
        .collect()
}

/// Direct transcription of the objective: every ordered pair, no reuse.
fn naive_loss(theta: &[f64], bias: f64, batch: &[Group], lambda: f64, gamma: f64) -> f64 {
    let d = theta.len() - 1;
    let score = |x: &[f64]| {
        let mut z = theta[d] * bias;
        for k in 0..d {
            z += theta[k] * x[k];
        }
        1.0 / (1.0 + (-z).exp())
    };
    let xs: Vec<&Vec<f64>> = batch.iter().flat_map(|g| g.instances.iter()).collect();
    let n = xs.len() as f64;
    let mut pair = 0.0;
    for xi in &xs {
        for xj in &xs {
            let dist: f64 = xi
                .iter()
                .zip(xj.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let diff = score(xi) - score(xj);
            pair += (-gamma * dist).exp() * diff * diff;
        }
    }
    let mut group_term = 0.0;
    for g in batch {
        let mean = g.instances.iter().map(|x| score(x)).sum::<f64>() / g.instances.len() as f64;
        let target = if g.label == Polarity::Positive {
            1.0
        } else {
            0.0
        };
        group_term += (mean - target) * (mean - target);
    }
    pair / (n * n) + lambda / batch.len() as f64 * group_term
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for b in 0..100 {
        let batch = random_batch(&mut rng, 8);
        let theta: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lambda = rng.random_range(0.0..20.0);
        let gamma = rng.random_range(0.05..2.0);
        let use_bias = b % 2 == 0;
        let model = MilModel::new(theta.clone(), cfg(use_bias)).unwrap();
        let fast = loss(&model, &batch, lambda, gamma).unwrap();
        let slow = naive_loss(
            &theta,
            if use_bias { 1.0 } else { 0.0 },
            &batch,
            lambda,
            gamma,
        );
        worst = worst.max((fast - slow).abs());
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-12 && elapsed < Duration::from_secs(10),
        format!("max |optimized - naive| = {worst:.2e} over 100 batches (tol 1e-12), {elapsed:.2?} (limit 10 s)"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let draws = 24;
    for k in 0..draws {
        let lambda = [0.0, 1.0, 10.0][k % 3];
        let dim = 8;
        let batch = random_batch(&mut rng, dim);
        let theta: Vec<f64> = (0..=dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gamma = rng.random_range(0.1..1.5);
        let config = cfg(true);
        let analytic = gradient(
            &MilModel::new(theta.clone(), config.clone()).unwrap(),
            &batch,
            lambda,
            gamma,
        )
        .unwrap();
        let numeric: Vec<f64> = (0..theta.len())
            .map(|i| {
                let mut plus = theta.clone();
                let mut minus = theta.clone();
                plus[i] += h;
                minus[i] -= h;
                let lp = loss(
                    &MilModel::new(plus, config.clone()).unwrap(),
                    &batch,
                    lambda,
                    gamma,
                )
                .unwrap();
                let lm = loss(
                    &MilModel::new(minus, config.clone()).unwrap(),
                    &batch,
                    lambda,
                    gamma,
                )
                .unwrap();
                (lp - lm) / (2.0 * h)
            })
            .collect();
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = numeric.iter().map(|n| n * n).sum::<f64>().sqrt().max(1e-8);
        worst = worst.max(diff / scale);
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-5 && elapsed < Duration::from_secs(30),
        format!("max relative error {worst:.2e} over {draws} draws, lambda in {{0, 1, 10}} (tol 1e-5), {elapsed:.2?}"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let data = generate_synthetic(200, 5, 16, 3.0, 0.1, 2024).unwrap();
    let config = TrainConfig {
        seed: 2024,
        ..TrainConfig::default()
    };
    let outcome = train(&data.dataset, &config).unwrap();
    let (mut hits, mut total) = (0usize, 0usize);
    for (g, truth) in data.dataset.groups().iter().zip(&data.labels) {
        for (x, &y) in g.instances.iter().zip(truth) {
            total += 1;
            if predict_sentence(&outcome.model, x).unwrap().label() == y {
                hits += 1;
            }
        }
    }
    let accuracy = hits as f64 / total as f64;
    let elapsed = start.elapsed();
    check(
        accuracy >= 0.95 && elapsed < Duration::from_secs(120),
        format!(
            "sentence accuracy {:.4} ({hits}/{total}) with lambda=10 lr=0.05 momentum=0.8 (need >= 0.95), {elapsed:.2?}",
            accuracy
        ),
    )
}

fn criterion_4() -> Outcome {
    let group = |label| Group {
        instances: vec![vec![0.3, -1.2, 2.0], vec![1.0, 0.0, -0.5]],
        label,
    };
    let batch = vec![group(Polarity::Positive), group(Polarity::Negative)];
    let zero = MilModel::zeros(3, cfg(true));
    let l0 = loss(&zero, &batch, 0.0, 1.0).unwrap();
    let g0 = gradient(&zero, &batch, 0.0, 1.0).unwrap();
    let single = vec![Group {
        instances: vec![vec![0.7, 0.1, -0.4]],
        label: Polarity::Positive,
    }];
    let l10 = loss(&zero, &single, 10.0, 1.0).unwrap();
    check(
        l0 == 0.0 && g0.iter().all(|&g| g == 0.0) && (l10 - 2.5).abs() <= 1e-12,
        format!("loss(0, lambda=0) = {l0}, gradient(0, lambda=0) all zero: {}, loss(0, lambda=10, l=1) = {l10}", g0.iter().all(|&g| g == 0.0)),
    )
}

fn criterion_5() -> Outcome {
    let mut problems = Vec::new();
    if SentencePrediction::from_score(0.5).label() != Polarity::Positive {
        problems.push("score 0.5 not positive".to_string());
    }
    // one weight, no bias: the instance score is sigmoid(x) and x = 0 gives exactly 0.5
    let model = MilModel::new(vec![1.0, 0.0], cfg(false)).unwrap();
    if instance_score(&model, &[0.0]).unwrap() != 0.5
        || predict_sentence(&model, &[0.0]).unwrap().label() != Polarity::Positive
    {
        problems.push("model score 0.5 not positive".into());
    }
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let doc = |scores: &[f64]| scores.iter().map(|&s| vec![logit(s)]).collect::<Vec<_>>();
    let three_two = predict_document(
        &model,
        &doc(&[0.9, 0.8, 0.7, 0.2, 0.1]),
        DocumentRule::Majority,
    )
    .unwrap();
    if three_two.label != Polarity::Positive {
        problems.push("3/2 document not positive".into());
    }
    let tie_pos =
        predict_document(&model, &doc(&[0.9, 0.8, 0.4, 0.3]), DocumentRule::Majority).unwrap();
    let tie_neg =
        predict_document(&model, &doc(&[0.6, 0.55, 0.1, 0.2]), DocumentRule::Majority).unwrap();
    if tie_pos.label != Polarity::Positive || tie_neg.label != Polarity::Negative {
        problems.push("2/2 tie not resolved by mean score".into());
    }

    // every pattern of instance values for groups of size 1..=6, both rules
    let levels = [-2.0, -0.1, 0.0, 0.3, 1.5];
    let mut cases = 0usize;
    for size in 1..=6u32 {
        for code in 0..levels.len().pow(size) {
            let mut c = code;
            let group: Vec<Vec<f64>> = (0..size)
                .map(|_| {
                    let v = levels[c % levels.len()];
                    c /= levels.len();
                    vec![v]
                })
                .collect();
            let scores: Vec<f64> = group
                .iter()
                .map(|x| instance_score(&model, x).unwrap())
                .collect();
            let pos = scores.iter().filter(|&&s| s >= 0.5).count();
            let neg = scores.len() - pos;
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            let by_mean = if mean >= 0.5 {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            let expect_majority = if pos > neg {
                Polarity::Positive
            } else if neg > pos {
                Polarity::Negative
            } else {
                by_mean
            };
            let got = predict_document(&model, &group, DocumentRule::Majority).unwrap();
            let got_mean = predict_document(&model, &group, DocumentRule::MeanScore).unwrap();
            if got.label != expect_majority
                || got.positive != pos
                || got.negative != neg
                || got_mean.label != by_mean
            {
                problems.push(format!("mismatch on {group:?}"));
                break;
            }
            cases += 1;
        }
    }
    let detail = if problems.is_empty() {
        format!("threshold, 3/2 majority, tie by mean; {cases} brute-force groups agree")
    } else {
        problems.join("; ")
    };
    check(problems.is_empty(), detail)
}

fn date(n: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 1, 3).unwrap() + chrono::Duration::days(n)
}

fn prices_from_returns(ticker: &str, start: f64, returns: &[f64]) -> PriceSeries {
    let mut close = start;
    let mut obs = vec![(date(0), close)];
    for (t, r) in returns.iter().enumerate() {
        close *= 1.0 + r;
        obs.push((date(t as i64 + 1), close));
    }
    PriceSeries::new(ticker, obs).unwrap()
}

fn criterion_6() -> Outcome {
    let (alpha, beta) = (0.001, 1.5);
    let market: Vec<f64> = (0..80)
        .map(|t| 0.012 * (0.9 * t as f64).sin() + 0.004 * (2.3 * t as f64).cos())
        .collect();
    let index = prices_from_returns("INDEX", 1000.0, &market);
    let stock_r: Vec<f64> = market.iter().map(|m| alpha + beta * m).collect();
    let stock = prices_from_returns("S", 40.0, &stock_r);
    let fit = fit_market_model(
        &simple_returns(&stock).unwrap(),
        &simple_returns(&index).unwrap(),
        date(60),
        30,
    )
    .unwrap();
    let coef_err = (fit.alpha - alpha).abs().max((fit.beta - beta).abs());

    // ten events: the event-day return carries a known shock on top of the model
    let shocks = [
        0.03, -0.02, 0.011, -0.047, 0.005, -0.004, 0.08, -0.015, 0.002, -0.06,
    ];
    let mut stocks = std::collections::HashMap::new();
    let mut docs = Vec::new();
    let mut expected = Vec::new();
    for (k, &shock) in shocks.iter().enumerate() {
        let ticker = format!("T{k}");
        let event = 40 + 3 * k;
        let returns: Vec<f64> = market
            .iter()
            .enumerate()
            .map(|(t, m)| alpha + beta * m + if t + 1 == event { shock } else { 0.0 })
            .collect();
        stocks.insert(ticker.clone(), prices_from_returns(&ticker, 25.0, &returns));
        docs.push(Document::new(
            format!("e{k}"),
            &ticker,
            date(event as i64),
            "text",
        ));
        // by hand: AR = r - (alpha + beta m) = shock
        let by_hand = returns[event - 1] - (alpha + beta * market[event - 1]);
        expected.push((
            by_hand,
            if by_hand > 0.0 {
                Polarity::Positive
            } else {
                Polarity::Negative
            },
        ));
    }
    let config = EventLabelConfig {
        outlier_level: 0.0,
        ..EventLabelConfig::default()
    };
    let (labeled, _) = label_documents(docs, &stocks, &index, &config).unwrap();
    let signs_ok = labeled.len() == 10
        && labeled.iter().zip(&expected).all(|(d, (ar, label))| {
            d.label == Some(*label) && (d.abnormal_return.unwrap() - ar).abs() < 1e-9
        });
    check(
        coef_err <= 1e-9 && signs_ok,
        format!(
            "alpha/beta max error {coef_err:.2e} (tol 1e-9); {} of 10 event labels match",
            labeled
                .iter()
                .zip(&expected)
                .filter(|(d, (_, l))| d.label == Some(*l))
                .count()
        ),
    )
}

fn rank(s: Sentiment) -> i32 {
    match s {
        Sentiment::Negative => -1,
        Sentiment::Neutral => 0,
        Sentiment::Positive => 1,
    }
}

fn criterion_7() -> Outcome {
    let dict =
        PolarityDictionary::new("demo", ["gain", "strong", "growth"], ["loss", "weak"]).unwrap();
    let toks = |w: &[&str]| w.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let tie = dictionary_classify(&toks(&["strong", "loss", "today"]), &dict);
    let none = dictionary_classify(&toks(&["the", "board", "met"]), &dict);
    let empty = dictionary_classify::<String>(&[], &dict);
    let fixed_ok =
        tie == Sentiment::Neutral && none == Sentiment::Neutral && empty == Sentiment::Neutral;

    let words = [
        "gain", "strong", "growth", "loss", "weak", "the", "profit", "year",
    ];
    let mut runner = TestRunner::new(PropConfig {
        cases: 1000,
        rng_seed: proptest::test_runner::RngSeed::Fixed(7),
        failure_persistence: None,
        ..PropConfig::default()
    });
    let strategy = (
        prop::collection::vec(prop::sample::select(words.to_vec()), 0..20),
        prop::sample::select(vec!["gain", "strong", "growth"]),
        any::<prop::sample::Index>(),
    );
    let property = runner.run(&strategy, |(seq, extra, at)| {
        let base: Vec<String> = seq.iter().map(|s| s.to_string()).collect();
        let mut more = base.clone();
        more.insert(at.index(base.len() + 1), extra.to_string());
        let before = dictionary_classify(&base, &dict);
        let after = dictionary_classify(&more, &dict);
        prop_assert!(
            rank(after) >= rank(before),
            "{before} -> {after} on {base:?} + {extra}"
        );
        let mut reversed = base.clone();
        reversed.reverse();
        prop_assert_eq!(dictionary_classify(&reversed, &dict), before);
        Ok(())
    });
    let detail = match &property {
        Ok(()) => format!("tie -> {tie}, no hits -> {none}, empty -> {empty}; monotonicity held on 1000 random sequences"),
        Err(e) => format!("tie -> {tie}, no hits -> {none}; property failed: {e}"),
    };
    check(fixed_ok && property.is_ok(), detail)
}

fn criterion_8() -> Outcome {
    use Polarity::{Negative as N, Positive as P};
    use Sentiment::{Negative as SN, Neutral as SZ, Positive as SP};
    let mut problems = Vec::new();

    let pred = [SP, SP, SP, SP, SN, SN, SN, SN, SN, SN];
    let gold = [P, P, P, N, P, P, N, N, N, N];
    let r = score_predictions(&pred, &gold).unwrap();
    if (r.tp, r.fp, r.fn_, r.tn) != (3, 1, 2, 4)
        || r.precision != 0.75
        || r.recall != 0.6
        || (r.f1 - 2.0 / 3.0).abs() > 1e-15
        || r.accuracy != 0.7
    {
        problems.push(format!("confusion example gave {r:?}"));
    }
    let perfect = score_predictions(&[SP, SP, SN, SN], &[P, P, N, N]).unwrap();
    if perfect.accuracy != 1.0 || perfect.f1 != 1.0 || perfect.neutral_rate != 0.0 {
        problems.push("perfect example".into());
    }
    let neutral = score_predictions(&[SZ, SZ, SZ], &[P, N, P]).unwrap();
    if neutral.accuracy != 0.0 || neutral.neutral_rate != 1.0 || neutral.precision_defined {
        problems.push("all-neutral example".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(1..50);
        let pred: Vec<Sentiment> = (0..n)
            .map(|_| [SP, SN, SZ][rng.random_range(0..3)])
            .collect();
        let gold: Vec<Polarity> = (0..n)
            .map(|_| if rng.random_bool(0.5) { P } else { N })
            .collect();
        let r = score_predictions(&pred, &gold).unwrap();
        let classified = (r.tp + r.fp + r.tn + r.fn_) as f64 / r.total as f64;
        worst = worst.max((r.neutral_rate + classified - 1.0).abs());
    }
    if worst > 1e-12 {
        problems.push(format!("neutral_rate + classified off by {worst:.2e}"));
    }
    let detail = if problems.is_empty() {
        format!("P=0.75 R=0.6 F1={:.4} acc=0.7; |neutral_rate + classified - 1| <= {worst:.1e} on 500 draws", r.f1)
    } else {
        problems.join("; ")
    };
    check(problems.is_empty(), detail)
}

fn synthetic_corpus(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let corpus = dir.join("syn.jsonl");
    let vectors = dir.join("vec.tsv");
    let out = Command::new(env!("CARGO_BIN_EXE_milsent"))
        .args(["synth", "--seed", "9", "--groups", "120", "-o"])
        .arg(&corpus)
        .arg("--vectors")
        .arg(&vectors)
        .env_remove("MILSENT_CONFIG")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (corpus, vectors)
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, vectors) = synthetic_corpus(dir.path());
    let run = |name: &str| {
        let model = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_milsent"))
            .args([
                "train",
                "--threads",
                "1",
                "--seed",
                "5",
                "--embedding-kind",
                "sentence",
                "-i",
            ])
            .arg(&corpus)
            .arg("--embeddings")
            .arg(&vectors)
            .arg("-o")
            .arg(&model)
            .env_remove("MILSENT_CONFIG")
            .output()
            .unwrap();
        (out.status.success(), fs::read(&model).unwrap_or_default())
    };
    let (ok_a, a) = run("a.json");
    let (ok_b, b) = run("b.json");
    check(
        ok_a && ok_b && !a.is_empty() && a == b,
        format!(
            "two single-threaded train runs: {} bytes each, identical: {}",
            a.len(),
            a == b
        ),
    )
}

fn criterion_10() -> Outcome {
    let Ok(path) = std::env::var("MILSENT_REVIEW_CORPUS") else {
        return Outcome::Skip(
            "MILSENT_REVIEW_CORPUS not set; external labeled sentence corpus required".into(),
        );
    };
    let mut corpus = match load_corpus(&path) {
        Ok(c) => c,
        Err(e) => return Outcome::Fail(format!("cannot load {path}: {e}")),
    };
    corpus.retain(|d| d.label.is_some() && !d.sentences.is_empty());
    if let Ok(vectors) = std::env::var("MILSENT_REVIEW_VECTORS") {
        let store = match load_sentence_vectors(&vectors) {
            Ok(s) => s,
            Err(e) => return Outcome::Fail(format!("cannot load {vectors}: {e}")),
        };
        if let Err(e) = embed_corpus(&mut corpus, &store) {
            return Outcome::Fail(e.to_string());
        }
    }
    let (train_docs, test_docs) = match temporal_split(corpus, 0.8) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let dataset = match to_mil_dataset(&train_docs) {
        Ok(d) => d,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let model = match train(&dataset, &TrainConfig::default()) {
        Ok(o) => o.model,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let tokens = |s: &SentenceInstance| {
        if s.tokens.is_empty() {
            tokenize(&s.text)
        } else {
            s.tokens.clone()
        }
    };
    let doc_tokens: Vec<Vec<String>> = train_docs
        .iter()
        .map(|d| d.sentences.iter().flat_map(tokens).collect())
        .collect();
    let labels: Vec<Polarity> = train_docs.iter().map(|d| d.label.unwrap()).collect();
    let bow = match train_bow_logreg(
        &doc_tokens,
        &labels,
        BowIndex::new(doc_tokens.iter().flatten()),
        1.0,
        0,
    ) {
        Ok(m) => m,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let (mut mil, mut base, mut gold) = (Vec::new(), Vec::new(), Vec::new());
    for s in test_docs.iter().flat_map(|d| &d.sentences) {
        let (Some(g), Some(x)) = (s.gold, &s.embedding) else {
            continue;
        };
        gold.push(g);
        mil.push(predict_sentence(&model, x).unwrap().label().into());
        base.push(bow_predict(&bow, &tokens(s)).unwrap().label().into());
    }
    if gold.is_empty() {
        return Outcome::Fail("no test sentences with gold labels and embeddings".into());
    }
    let mil_acc = score_predictions(&mil, &gold).unwrap().accuracy;
    let bow_acc = score_predictions(&base, &gold).unwrap().accuracy;
    check(
        mil_acc >= bow_acc,
        format!("MIL sentence accuracy {mil_acc:.4} vs bag-of-words logistic regression {bow_acc:.4} on {} sentences", gold.len()),
    )
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("loss oracle equivalence", criterion_1),
        ("gradient vs finite differences", criterion_2),
        ("synthetic label recovery", criterion_3),
        ("degenerate lambda", criterion_4),
        ("threshold and aggregation", criterion_5),
        ("event-study recovery", criterion_6),
        ("dictionary semantics", criterion_7),
        ("metric arithmetic", criterion_8),
        ("training determinism", criterion_9),
        ("directional replication (optional)", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} criterion {:>2} ({name}): {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
