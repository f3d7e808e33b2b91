//! Market-model event study: daily abnormal returns on the announcement
//! day and the price-based filters applied before labeling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Polarity};
use crate::error::{Error, Result};

/// Closing prices of one instrument, dates strictly increasing, prices > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let ticker = ticker.into();
        for w in observations.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Config(format!(
                    "{ticker}: dates not strictly increasing at {}",
                    w[1].0
                )));
            }
        }
        if let Some(&(d, p)) = observations
            .iter()
            .find(|(_, p)| !(*p > 0.0 && p.is_finite()))
        {
            return Err(Error::Config(format!(
                "{ticker}: non-positive price {p} on {d}"
            )));
        }
        Ok(Self {
            ticker,
            observations,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    /// Last close strictly before `date`.
    pub fn close_before(&self, date: NaiveDate) -> Option<f64> {
        let idx = self.observations.partition_point(|(d, _)| *d < date);
        idx.checked_sub(1).map(|i| self.observations[i].1)
    }
}

#[derive(Debug, Deserialize)]
struct PriceRow {
    date: NaiveDate,
    close: f64,
}

/// Reads a `date,close` CSV file with a header row.
pub fn load_price_series(path: impl AsRef<Path>, ticker: impl Into<String>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["date", "close"] {
        return Err(Error::parse(path, 1, "expected header `date,close`"));
    }
    let mut obs = Vec::new();
    for (i, row) in reader.deserialize::<PriceRow>().enumerate() {
        let row = row.map_err(|e| Error::parse(path, i + 2, e))?;
        obs.push((row.date, row.close));
    }
    PriceSeries::new(ticker, obs).map_err(|e| Error::parse(path, 0, e))
}

/// Loads every `<TICKER>.csv` in a directory.
pub fn load_price_dir(dir: impl AsRef<Path>) -> Result<HashMap<String, PriceSeries>> {
    let dir = dir.as_ref();
    let mut out = HashMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        if let Some(ticker) = path.file_stem().and_then(|s| s.to_str()) {
            let series = load_price_series(&path, ticker)?;
            out.insert(ticker.to_string(), series);
        }
    }
    Ok(out)
}

/// `r_t = p_t / p_{t-1} - 1`, dated at `t`.
pub fn simple_returns(series: &PriceSeries) -> Result<Vec<(NaiveDate, f64)>> {
    let obs = series.observations();
    if obs.len() < 2 {
        return Err(Error::InsufficientHistory {
            needed: 2,
            available: obs.len(),
        });
    }
    Ok(obs
        .windows(2)
        .map(|w| (w[1].0, w[1].1 / w[0].1 - 1.0))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketModel {
    pub alpha: f64,
    pub beta: f64,
    pub window: usize,
}

impl MarketModel {
    pub fn normal_return(&self, market_return: f64) -> f64 {
        self.alpha + self.beta * market_return
    }
}

/// Stock and market returns joined on date, in date order.
fn paired_returns(
    stock: &[(NaiveDate, f64)],
    market: &[(NaiveDate, f64)],
) -> Vec<(NaiveDate, f64, f64)> {
    let market: BTreeMap<NaiveDate, f64> = market.iter().copied().collect();
    let mut out: Vec<_> = stock
        .iter()
        .filter_map(|&(d, r)| market.get(&d).map(|&m| (d, r, m)))
        .collect();
    out.sort_by_key(|p| p.0);
    out
}

fn ols(pairs: &[(NaiveDate, f64, f64)], window: usize) -> Result<MarketModel> {
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.2).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut sum_sq) = (0.0, 0.0, 0.0);
    for &(_, y, x) in pairs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        sum_sq += x * x;
    }
    if sxx <= 1e-14 * sum_sq.max(1.0) {
        return Err(Error::SingularFit);
    }
    let beta = sxy / sxx;
    Ok(MarketModel {
        alpha: mean_y - beta * mean_x,
        beta,
        window,
    })
}

/// OLS fit of stock on market returns over the `window` paired trading days
/// immediately preceding `event_date`.
pub fn fit_market_model(
    stock_returns: &[(NaiveDate, f64)],
    market_returns: &[(NaiveDate, f64)],
    event_date: NaiveDate,
    window: usize,
) -> Result<MarketModel> {
    if window < 2 {
        return Err(Error::Config(format!(
            "window must be at least 2, got {window}"
        )));
    }
    let pairs = paired_returns(stock_returns, market_returns);
    let before = pairs.partition_point(|p| p.0 < event_date);
    if before < window {
        return Err(Error::InsufficientHistory {
            needed: window,
            available: before,
        });
    }
    ols(&pairs[before - window..before], window)
}

/// Actual minus normal return.
pub fn abnormal_return(model: &MarketModel, stock_return: f64, market_return: f64) -> f64 {
    stock_return - model.normal_return(market_return)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventLabelConfig {
    pub penny_threshold: f64,
    pub outlier_level: f64,
    pub window: usize,
}

impl Default for EventLabelConfig {
    fn default() -> Self {
        Self {
            penny_threshold: 1.0,
            outlier_level: 0.01,
            window: 30,
        }
    }
}

impl EventLabelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.outlier_level) {
            return Err(Error::Config(format!(
                "outlier_level must lie in [0, 0.5), got {}",
                self.outlier_level
            )));
        }
        if self.window < 2 {
            return Err(Error::Config("window must be at least 2".into()));
        }
        if self.penny_threshold.is_nan() || self.penny_threshold < 0.0 {
            return Err(Error::Config("penny_threshold must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum DropReason {
    MissingPrices,
    NoEventDay,
    InsufficientHistory { available: usize },
    SingularFit,
    PennyStock { prior_close: f64 },
    Outlier { abnormal_return: f64 },
    ZeroReturn,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::MissingPrices => write!(f, "no price series for ticker"),
            DropReason::NoEventDay => write!(f, "no trading day on or after publication"),
            DropReason::InsufficientHistory { available } => {
                write!(f, "only {available} estimation-window observations")
            }
            DropReason::SingularFit => write!(f, "market returns constant over window"),
            DropReason::PennyStock { prior_close } => {
                write!(f, "penny stock (prior close {prior_close})")
            }
            DropReason::Outlier { abnormal_return } => {
                write!(f, "abnormal return {abnormal_return} trimmed as outlier")
            }
            DropReason::ZeroReturn => write!(f, "abnormal return exactly zero"),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LabelReport {
    pub input: usize,
    pub positive: usize,
    pub negative: usize,
    pub dropped: Vec<(String, DropReason)>,
}

impl LabelReport {
    pub fn labeled(&self) -> usize {
        self.positive + self.negative
    }
}

/// Number of documents trimmed from each tail: `ceil(level * n)`.
pub fn outlier_trim_count(level: f64, n: usize) -> usize {
    let raw = level * n as f64;
    // guard against 0.01 * 100 = 1.0000000000000002
    (raw - 1e-9).ceil().max(0.0) as usize
}

struct EventOutcome {
    abnormal_return: f64,
}

fn event_for(
    doc: &Document,
    series: &PriceSeries,
    market_returns: &[(NaiveDate, f64)],
    config: &EventLabelConfig,
) -> std::result::Result<EventOutcome, DropReason> {
    let stock_returns =
        simple_returns(series).map_err(|_| DropReason::InsufficientHistory { available: 0 })?;
    let pairs = paired_returns(&stock_returns, market_returns);
    // non-trading publication days roll forward to the next session
    let event_idx = pairs.partition_point(|p| p.0 < doc.published_at);
    let &(event_day, stock_r, market_r) = pairs.get(event_idx).ok_or(DropReason::NoEventDay)?;
    if event_idx < config.window {
        return Err(DropReason::InsufficientHistory {
            available: event_idx,
        });
    }
    let model = ols(&pairs[event_idx - config.window..event_idx], config.window)
        .map_err(|_| DropReason::SingularFit)?;
    let prior_close = series
        .close_before(event_day)
        .ok_or(DropReason::NoEventDay)?;
    if prior_close < config.penny_threshold {
        return Err(DropReason::PennyStock { prior_close });
    }
    Ok(EventOutcome {
        abnormal_return: abnormal_return(&model, stock_r, market_r),
    })
}

/// Attaches event-day abnormal returns and sign labels. Documents are dropped
/// (never fatally) for missing or insufficient market data, penny-stock prior
/// closes, outlier returns (`ceil(outlier_level * n)` per tail, applied after
/// the penny filter) and returns of exactly zero.
pub fn label_documents(
    corpus: Vec<Document>,
    stock_prices: &HashMap<String, PriceSeries>,
    index_prices: &PriceSeries,
    config: &EventLabelConfig,
) -> Result<(Vec<Document>, LabelReport)> {
    config.validate()?;
    let market_returns = simple_returns(index_prices)?;
    let mut report = LabelReport {
        input: corpus.len(),
        ..Default::default()
    };

    let mut survivors: Vec<(Document, f64)> = Vec::new();
    for doc in corpus {
        let Some(series) = stock_prices.get(&doc.ticker) else {
            log::warn!("dropping {}: no price series for {}", doc.id, doc.ticker);
            report.dropped.push((doc.id, DropReason::MissingPrices));
            continue;
        };
        match event_for(&doc, series, &market_returns, config) {
            Ok(outcome) => survivors.push((doc, outcome.abnormal_return)),
            Err(reason) => {
                log::info!("dropping {}: {reason}", doc.id);
                report.dropped.push((doc.id, reason));
            }
        }
    }

    let trim = outlier_trim_count(config.outlier_level, survivors.len());
    let mut trimmed = vec![false; survivors.len()];
    if trim > 0 {
        let mut order: Vec<usize> = (0..survivors.len()).collect();
        order.sort_by(|&a, &b| {
            survivors[a]
                .1
                .total_cmp(&survivors[b].1)
                .then_with(|| survivors[a].0.id.cmp(&survivors[b].0.id))
        });
        let n = order.len();
        for &i in order
            .iter()
            .take(trim)
            .chain(order.iter().skip(n.saturating_sub(trim)))
        {
            trimmed[i] = true;
        }
    }

    let mut labeled = Vec::with_capacity(survivors.len());
    for ((mut doc, ar), cut) in survivors.into_iter().zip(trimmed) {
        if cut {
            report.dropped.push((
                doc.id,
                DropReason::Outlier {
                    abnormal_return: ar,
                },
            ));
            continue;
        }
        doc.set_abnormal_return(ar);
        match doc.label {
            Some(Polarity::Positive) => report.positive += 1,
            Some(Polarity::Negative) => report.negative += 1,
            None => {
                report.dropped.push((doc.id, DropReason::ZeroReturn));
                continue;
            }
        }
        labeled.push(doc);
    }
    Ok((labeled, report))
}
