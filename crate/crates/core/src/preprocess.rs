//! Text normalization, sentence splitting, tokenization, vocabulary pruning
//! and length-based corpus filtering.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, SentenceInstance};
use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const NUM_POS: &str = "<num_pos>";
pub const NUM_NEG: &str = "<num_neg>";
pub const DATE: &str = "<date>";
pub const URL: &str = "<url>";

pub const SPECIAL_TOKENS: [&str; 5] = [UNK, NUM_POS, NUM_NEG, DATE, URL];

const MONTHS: &str = "january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec";

pub fn default_cutoff_patterns() -> Vec<String> {
    vec![
        r"(?im)^\s*(?:contact|further inquiries|for further information|investor relations|media contact)\s*:".into(),
        r"(?i)end of (?:the )?(?:ad[- ]hoc )?(?:announcement|message)".into(),
        r"(?i)-{3,}\s*language\s*:".into(),
    ]
}

pub fn default_url_pattern() -> String {
    r#"(?:https?://|www\.)[^\s<>"]*[^\s<>".,;:!?)\]]|[\w.+-]+@[\w-]+(?:\.[\w-]+)+"#.into()
}

pub fn default_date_pattern() -> String {
    let suffix = r"(?:st|nd|rd|th)?";
    [
        r"\b\d{4}-\d{1,2}-\d{1,2}\b".to_string(),
        r"\b\d{1,2}[./]\d{1,2}[./](?:\d{4}|\d{2})\b".to_string(),
        format!(r"\b\d{{1,2}}{suffix}\.?\s+(?:{MONTHS})\b\.?(?:,?\s+\d{{4}}\b)?"),
        format!(r"\b(?:{MONTHS})\b\.?\s+(?:\d{{1,2}}{suffix},?\s+\d{{4}}\b|\d{{1,2}}{suffix}\b|\d{{4}}\b)"),
    ]
    .join("|")
}

pub fn default_number_pattern() -> String {
    r"(?P<pre>^|[^\w])(?P<sign>-)?(?P<num>\d+(?:[.,]\d+)*)\b".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub min_doc_words: usize,
    pub min_count: usize,
    pub length_percentile: f64,
    pub cutoff_patterns: Vec<String>,
    pub url_pattern: String,
    pub date_pattern: String,
    pub number_pattern: String,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            min_doc_words: 50,
            min_count: 5,
            length_percentile: 0.01,
            cutoff_patterns: default_cutoff_patterns(),
            url_pattern: default_url_pattern(),
            date_pattern: default_date_pattern(),
            number_pattern: default_number_pattern(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_percentile > 0.0 && self.length_percentile < 0.5) {
            return Err(Error::Config(format!(
                "length_percentile must lie in (0, 0.5), got {}",
                self.length_percentile
            )));
        }
        if self.min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        Ok(())
    }
}

fn compile(pattern: &str) -> Result<Regex> {
    Regex::new(pattern).map_err(|e| Error::InvalidPattern {
        pattern: pattern.to_string(),
        source: Box::new(e),
    })
}

static HTML_TAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)</?[a-z][a-z0-9_]*(?:\s[^<>]*)?/?>").unwrap());
static HTML_ENTITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(?:[a-zA-Z]+|#\d+);").unwrap());

/// Compiled form of a [`PreprocessConfig`]; build once, clean many.
#[derive(Debug, Clone)]
pub struct TextCleaner {
    cutoffs: Vec<Regex>,
    url: Regex,
    date: Regex,
    number: Regex,
}

impl TextCleaner {
    pub fn new(config: &PreprocessConfig) -> Result<Self> {
        let cutoffs = config
            .cutoff_patterns
            .iter()
            .map(|p| compile(p))
            .collect::<Result<Vec<_>>>()?;
        let number = compile(&config.number_pattern)?;
        if number.capture_names().flatten().all(|n| n != "num") {
            return Err(Error::Config(
                "number_pattern must define a capture group named `num`".into(),
            ));
        }
        Ok(Self {
            cutoffs,
            url: compile(&config.url_pattern)?,
            date: compile(&config.date_pattern)?,
            number,
        })
    }

    pub fn clean(&self, text: &str) -> String {
        let cut = self
            .cutoffs
            .iter()
            .filter_map(|re| re.find(text).map(|m| m.start()))
            .min()
            .unwrap_or(text.len());
        let text = &text[..cut];

        let text = HTML_TAG.replace_all(text, |c: &Captures| {
            let tag = c[0].to_lowercase();
            if SPECIAL_TOKENS.contains(&tag.as_str()) {
                tag
            } else {
                " ".to_string()
            }
        });
        let text = HTML_ENTITY.replace_all(&text, " ");
        let text = text.to_lowercase();
        let text = self.url.replace_all(&text, URL);
        let text = self.date.replace_all(&text, DATE);
        let text = self.number.replace_all(&text, |c: &Captures| {
            let pre = c.name("pre").map_or("", |m| m.as_str());
            let token = if c.name("sign").is_some() {
                NUM_NEG
            } else {
                NUM_POS
            };
            format!("{pre}{token}")
        });
        text.into_owned()
    }
}

/// Truncates at the first cutoff match, lowercases, strips markup and
/// replaces URLs, dates and signed numbers with placeholder tokens.
pub fn clean_text(text: &str, config: &PreprocessConfig) -> Result<String> {
    Ok(TextCleaner::new(config)?.clean(text))
}

const ABBREVIATIONS: &[&str] = &[
    "approx", "appr", "ca", "mio", "mn", "mln", "bn", "bln", "mrd", "tsd", "k", "e.g", "i.e",
    "etc", "cf", "vs", "resp", "incl", "excl", "inc", "ltd", "corp", "co", "plc", "no", "nos",
    "nr", "mr", "mrs", "ms", "dr", "prof", "dipl", "ing", "st", "jan", "feb", "mar", "apr", "jun",
    "jul", "aug", "sep", "sept", "oct", "nov", "dec", "fig", "p.a", "pp", "ff", "est", "avg",
    "dept", "div", "u.s", "e.v", "z.b", "d.h", "u.a", "bzw", "gmbh", "ag", "eur", "usd", "chf",
];

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '»' | '”' | '’')
}

/// True if the word ending at a period is a known abbreviation or an
/// initial such as `u.` in `u.s.`.
fn is_abbreviation(word: &str) -> bool {
    let w = word
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .trim_end_matches('.');
    if w.is_empty() {
        return false;
    }
    let lower = w.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    let mut chars = lower.chars();
    // single letters and dotted initials ("u.s", "a.g")
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_alphabetic())
        || lower
            .split('.')
            .all(|part| part.chars().count() == 1 && part.chars().all(char::is_alphabetic))
}

/// Rule-based splitter: breaks after `.`, `!` or `?` (plus any closing
/// quotes/brackets) when followed by whitespace or end of input, except
/// after abbreviations. Periods inside tokens such as `12.5` never split.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len()
                && (matches!(chars[j].1, '.' | '!' | '?') || is_closing(chars[j].1))
            {
                j += 1;
            }
            let boundary = j >= chars.len() || chars[j].1.is_whitespace();
            let end_byte = chars.get(j).map_or(text.len(), |&(b, _)| b);
            let abbreviated = c == '.' && j == i + 1 && {
                let head = &text[start..chars[i].0];
                let word = head.rsplit(char::is_whitespace).next().unwrap_or("");
                is_abbreviation(word)
            };
            if boundary && !abbreviated {
                let s = text[start..end_byte].trim();
                if !s.is_empty() {
                    sentences.push(s.to_string());
                }
                start = end_byte;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

static TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"<(?:unk|num_pos|num_neg|date|url)>|[\p{L}\p{N}]+(?:['’\-][\p{L}\p{N}]+)*").unwrap()
});

/// Lowercased word tokens; punctuation is dropped, placeholder tokens kept.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let lower: Cow<str> = if sentence.chars().any(char::is_uppercase) {
        Cow::Owned(sentence.to_lowercase())
    } else {
        Cow::Borrowed(sentence)
    };
    TOKEN
        .find_iter(&lower)
        .map(|m| m.as_str().to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    counts: BTreeMap<String, usize>,
    min_count: usize,
}

impl Vocabulary {
    pub fn contains(&self, term: &str) -> bool {
        self.counts.contains_key(term)
    }

    pub fn count(&self, term: &str) -> Option<usize> {
        self.counts.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    /// Retained terms in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }
}

/// Counts every token and keeps those seen at least `min_count` times.
/// Placeholder tokens are always kept.
pub fn build_vocabulary<'a, I, S>(corpus: I, min_count: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a [S]>,
    S: AsRef<str> + 'a,
{
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for seq in corpus {
        for tok in seq {
            *counts.entry(tok.as_ref().to_string()).or_default() += 1;
        }
    }
    counts.retain(|term, n| *n >= min_count || SPECIAL_TOKENS.contains(&term.as_str()));
    for special in SPECIAL_TOKENS {
        counts.entry(special.to_string()).or_insert(0);
    }
    Vocabulary {
        counts,
        min_count: min_count.max(1),
    }
}

/// Replaces out-of-vocabulary tokens with `<unk>`.
pub fn apply_vocabulary(tokens: &[String], vocab: &Vocabulary) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            if vocab.contains(t) {
                t.clone()
            } else {
                UNK.to_string()
            }
        })
        .collect()
}

/// Linear-interpolation quantile of sorted data (the "type 7" rule).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Drops documents shorter than `min_doc_words`, then documents whose
/// sentence count lies strictly below the lower or strictly above the
/// upper `length_percentile` quantile of the remaining documents.
pub fn filter_corpus(corpus: Vec<Document>, config: &PreprocessConfig) -> Vec<Document> {
    let kept: Vec<Document> = corpus
        .into_iter()
        .filter(|d| d.word_count() >= config.min_doc_words)
        .collect();
    if kept.is_empty() {
        return kept;
    }
    let mut lengths: Vec<f64> = kept.iter().map(|d| d.sentences.len() as f64).collect();
    lengths.sort_by(f64::total_cmp);
    let lower = quantile_sorted(&lengths, config.length_percentile);
    let upper = quantile_sorted(&lengths, 1.0 - config.length_percentile);
    kept.into_iter()
        .filter(|d| {
            let n = d.sentences.len() as f64;
            n >= lower && n <= upper
        })
        .collect()
}

/// Counts reported by [`preprocess_documents`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PreprocessStats {
    pub documents_in: usize,
    pub documents_out: usize,
    pub sentences_out: usize,
    pub distinct_tokens: usize,
    pub vocabulary: usize,
}

/// Full text pipeline: clean the raw text, split it into sentences, tokenize,
/// map rare tokens to `<unk>`, then filter documents. Sentences without any
/// token are dropped. Existing sentences are replaced.
pub fn preprocess_documents(
    corpus: Vec<Document>,
    config: &PreprocessConfig,
) -> Result<(Vec<Document>, PreprocessStats)> {
    config.validate()?;
    let cleaner = TextCleaner::new(config)?;
    let documents_in = corpus.len();
    let mut docs: Vec<Document> = corpus
        .into_iter()
        .map(|mut d| {
            d.sentences = split_sentences(&cleaner.clean(&d.raw_text))
                .into_iter()
                .filter_map(|text| {
                    let tokens = tokenize(&text);
                    (!tokens.is_empty()).then(|| {
                        let mut s = SentenceInstance::new(text);
                        s.tokens = tokens;
                        s
                    })
                })
                .collect();
            d
        })
        .collect();

    let vocab = build_vocabulary(
        docs.iter()
            .flat_map(|d| d.sentences.iter().map(|s| s.tokens.as_slice())),
        config.min_count,
    );
    let distinct_tokens = docs
        .iter()
        .flat_map(|d| d.sentences.iter().flat_map(|s| s.tokens.iter()))
        .collect::<BTreeSet<_>>()
        .len();
    for d in &mut docs {
        for s in &mut d.sentences {
            s.tokens = apply_vocabulary(&s.tokens, &vocab);
        }
    }

    let docs = filter_corpus(docs, config);
    let stats = PreprocessStats {
        documents_in,
        documents_out: docs.len(),
        sentences_out: docs.iter().map(|d| d.sentences.len()).sum(),
        distinct_tokens,
        vocabulary: vocab.len(),
    };
    Ok((docs, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clean(text: &str) -> String {
        clean_text(text, &PreprocessConfig::default()).unwrap()
    }

    #[test]
    fn percent_figure() {
        assert_eq!(clean("Profit rose 12.5%"), "profit rose <num_pos>%");
    }

    #[test]
    fn negative_number_and_date() {
        assert_eq!(
            clean("Loss of -3.2 EUR on 12 May 2005"),
            "loss of <num_neg> eur on <date>"
        );
    }

    #[test]
    fn empty_text() {
        assert_eq!(clean(""), "");
    }

    #[test]
    fn other_date_forms() {
        assert_eq!(clean("on 2005-05-12."), "on <date>.");
        assert_eq!(clean("on 12.05.2005, sales"), "on <date>, sales");
        assert_eq!(clean("on May 12, 2005 we"), "on <date> we");
        assert_eq!(clean("31 March 2005"), "<date>");
        assert_eq!(clean("sales may rise"), "sales may rise");
    }

    #[test]
    fn urls_and_markup() {
        assert_eq!(clean("See <b>www.leoni.com</b>."), "see  <url> .");
        assert_eq!(clean("Visit https://x.org/a?b=1 now"), "visit <url> now");
        assert_eq!(clean("a&nbsp;b"), "a b");
    }

    #[test]
    fn ranges_and_glued_digits() {
        assert_eq!(clean("2004-2005"), "<num_pos>-<num_pos>");
        assert_eq!(clean("Q3 figures"), "q3 figures");
        assert_eq!(clean("EUR 1,250.5 million"), "eur <num_pos> million");
    }

    #[test]
    fn cutoff_truncates() {
        let text = "Sales rose.\nContact: John Doe, phone 555";
        assert_eq!(clean(text), "sales rose.\n");
    }

    #[test]
    fn invalid_pattern_is_reported() {
        let cfg = PreprocessConfig {
            cutoff_patterns: vec!["(unclosed".into()],
            ..Default::default()
        };
        assert!(matches!(
            clean_text("x", &cfg),
            Err(Error::InvalidPattern { .. })
        ));
    }

    #[test]
    fn splits_on_terminal_punctuation() {
        assert_eq!(
            split_sentences("sales rose. costs fell."),
            vec!["sales rose.", "costs fell."]
        );
        assert_eq!(
            split_sentences("up? yes! fine"),
            vec!["up?", "yes!", "fine"]
        );
    }

    #[test]
    fn abbreviations_do_not_split() {
        assert_eq!(
            split_sentences("approx. 5 mio. euros were lost."),
            vec!["approx. 5 mio. euros were lost."]
        );
        assert_eq!(
            split_sentences("the u.s. market grew. then it fell."),
            vec!["the u.s. market grew.", "then it fell."]
        );
    }

    #[test]
    fn numbers_do_not_split() {
        assert_eq!(
            split_sentences("rose 12.5 percent. ok."),
            vec!["rose 12.5 percent.", "ok."]
        );
    }

    #[test]
    fn closing_quote_stays_with_sentence() {
        assert_eq!(
            split_sentences("he said \"done.\" next one."),
            vec!["he said \"done.\"", "next one."]
        );
    }

    #[test]
    fn empty_split() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn tokenizer_cases() {
        assert_eq!(
            tokenize("profit rose <num_pos>%"),
            vec!["profit", "rose", "<num_pos>"]
        );
        assert_eq!(tokenize("<date>"), vec!["<date>"]);
        assert!(tokenize("   ").is_empty());
        assert_eq!(tokenize("Well-known firm's"), vec!["well-known", "firm's"]);
    }

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn vocabulary_threshold_is_inclusive() {
        let docs = [toks(&["a"; 5]), toks(&["b", "b", "b", "b"])];
        let vocab = build_vocabulary(docs.iter().map(Vec::as_slice), 5);
        assert!(vocab.contains("a"));
        assert_eq!(vocab.count("a"), Some(5));
        assert!(!vocab.contains("b"));
    }

    #[test]
    fn empty_corpus_vocabulary_is_specials() {
        let vocab = build_vocabulary(std::iter::empty::<&[String]>(), 5);
        assert_eq!(vocab.len(), SPECIAL_TOKENS.len());
        for s in SPECIAL_TOKENS {
            assert!(vocab.contains(s));
        }
    }

    #[test]
    fn apply_vocabulary_cases() {
        let docs = [toks(&["profit"])];
        let vocab = build_vocabulary(docs.iter().map(Vec::as_slice), 1);
        assert_eq!(
            apply_vocabulary(&toks(&["rare", "profit"]), &vocab),
            toks(&["<unk>", "profit"])
        );
        assert_eq!(
            apply_vocabulary(&toks(&["profit"]), &vocab),
            toks(&["profit"])
        );
        assert!(apply_vocabulary(&[], &vocab).is_empty());
    }

    fn doc_with(id: usize, n_sentences: usize, words_per_sentence: usize) -> Document {
        let mut d = Document::new(format!("d{id}"), "T", "2020-01-01".parse().unwrap(), "");
        d.sentences = (0..n_sentences)
            .map(|_| SentenceInstance::new(vec!["w"; words_per_sentence].join(" ")))
            .collect();
        d
    }

    /// Brute-force check: a count is in the lowest p-tail if it lies below
    /// the interpolated p-quantile of the known distribution 1..=100.
    #[test]
    fn percentile_filter_on_uniform_lengths() {
        let docs: Vec<Document> = (1..=100).map(|n| doc_with(n, n, 60)).collect();
        let cfg = PreprocessConfig::default();
        let out = filter_corpus(docs, &cfg);
        let counts: Vec<usize> = out.iter().map(|d| d.sentences.len()).collect();
        // q(0.01) = 1 + 0.01 * 99 = 1.99, q(0.99) = 1 + 0.99 * 99 = 99.01
        let expected: Vec<usize> = (1..=100usize)
            .filter(|&n| n as f64 >= 1.99 && n as f64 <= 99.01)
            .collect();
        assert_eq!(counts, expected);
        assert_eq!(out.len(), 98);
        assert!(!counts.contains(&1) && !counts.contains(&100));
    }

    #[test]
    fn short_documents_removed() {
        let docs = vec![doc_with(0, 1, 10), doc_with(1, 1, 60)];
        let out = filter_corpus(docs, &PreprocessConfig::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, "d1");
    }

    #[test]
    fn empty_corpus_filter() {
        assert!(filter_corpus(Vec::new(), &PreprocessConfig::default()).is_empty());
    }

    #[test]
    fn config_validation() {
        let bad = PreprocessConfig {
            length_percentile: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(PreprocessConfig::default().validate().is_ok());
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        let atoms = prop::sample::select(vec![
            "Profit",
            "rose",
            "12.5",
            "-3.2",
            "%",
            "May",
            "12",
            "2005",
            "march",
            "-",
            ".",
            ",",
            " ",
            " ",
            "www.x.com",
            "<b>",
            "</b>",
            "&amp;",
            "EUR",
            "q3",
            "1,250",
            "2004-2005",
            "31",
            "jan.",
            "<date>",
            "x1.5",
            "approx.",
            "!",
            "\n",
        ]);
        prop::collection::vec(atoms, 0..40).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(text in text_strategy()) {
            let once = clean(&text);
            prop_assert_eq!(clean(&once), once);
        }

        #[test]
        fn split_yields_nonempty_and_covers_input(text in text_strategy()) {
            let sentences = split_sentences(&text);
            prop_assert!(sentences.iter().all(|s| !s.trim().is_empty()));
            let joined: String = sentences.concat().split_whitespace().collect();
            let original: String = text.split_whitespace().collect();
            prop_assert_eq!(joined, original);
        }

        #[test]
        fn vocabulary_preserves_length(words in prop::collection::vec("[a-c]{1,2}", 0..30)) {
            let vocab = build_vocabulary(std::iter::once(words.as_slice()), 3);
            prop_assert_eq!(apply_vocabulary(&words, &vocab).len(), words.len());
        }

        #[test]
        fn filter_output_is_subsequence(lengths in prop::collection::vec(1usize..30, 0..60)) {
            let docs: Vec<Document> = lengths.iter().enumerate().map(|(i, &n)| doc_with(i, n, 60)).collect();
            let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
            let out = filter_corpus(docs, &PreprocessConfig::default());
            let mut it = ids.iter();
            for d in &out {
                prop_assert!(it.any(|id| id == &d.id));
            }
        }
    }

    #[test]
    fn pipeline_splits_and_filters() {
        let body = "Revenue rose 12.5% in 2019. The outlook is strong! ".repeat(10);
        let docs = vec![
            Document::new(
                "long",
                "X",
                chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
                body,
            ),
            Document::new(
                "short",
                "X",
                chrono::NaiveDate::from_ymd_opt(2020, 1, 2).unwrap(),
                "Too short.",
            ),
        ];
        let cfg = PreprocessConfig {
            min_count: 1,
            ..Default::default()
        };
        let (out, stats) = preprocess_documents(docs, &cfg).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(stats.documents_in, 2);
        assert_eq!(stats.documents_out, 1);
        assert_eq!(out[0].sentences.len(), 20);
        assert_eq!(
            out[0].sentences[0].tokens,
            ["revenue", "rose", "<num_pos>", "in", "<num_pos>"]
        );
    }
}
