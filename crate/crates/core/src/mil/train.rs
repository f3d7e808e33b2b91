use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Group, MilDataset};
use crate::error::{Error, Result};

use super::objective::evaluate;
use super::{
    bias_feature, predict_document, squared_distance, DocumentRule, MilModel, TrainConfig,
};

const INIT_RANGE: f64 = 0.01;
const MEDIAN_PAIRS: usize = 2_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: MilModel,
    /// Loss of the initial parameters on the trace set.
    pub initial_loss: f64,
    /// Loss on the trace set after each epoch.
    pub epoch_losses: Vec<f64>,
    /// Instances in the trace set (all of them unless capped).
    pub trace_instances: usize,
}

/// `1 / median ||xi - xj||²` over up to 2000 seeded random pairs of
/// distinct instances.
pub fn median_heuristic_gamma(dataset: &MilDataset, seed: u64) -> Result<f64> {
    let xs: Vec<&[f64]> = dataset
        .groups()
        .iter()
        .flat_map(|g| g.instances.iter().map(Vec::as_slice))
        .collect();
    if xs.len() < 2 {
        return Err(Error::Empty(
            "need at least two instances for the median heuristic",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d65_6469_616e);
    let mut d: Vec<f64> = (0..MEDIAN_PAIRS)
        .map(|_| {
            let i = rng.random_range(0..xs.len());
            let mut j = rng.random_range(0..xs.len() - 1);
            if j >= i {
                j += 1;
            }
            squared_distance(xs[i], xs[j])
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    let median = if d.len().is_multiple_of(2) {
        0.5 * (d[mid - 1] + d[mid])
    } else {
        d[mid]
    };
    if median.is_nan() || median <= 0.0 {
        return Err(Error::Config("median squared distance is zero".into()));
    }
    Ok(1.0 / median)
}

/// Groups used for the per-epoch loss: everything, or a seeded subset when
/// the data exceeds `trace_max_instances`.
fn trace_groups<'a>(dataset: &'a MilDataset, config: &TrainConfig) -> Vec<&'a Group> {
    if dataset.n_instances() <= config.trace_max_instances {
        return dataset.groups().iter().collect();
    }
    let mut order: Vec<usize> = (0..dataset.n_groups()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(
        config.seed ^ 0x0074_7261_6365,
    ));
    let mut picked = Vec::new();
    let mut total = 0;
    for k in order {
        let g = &dataset.groups()[k];
        if total + g.len() > config.trace_max_instances && !picked.is_empty() {
            continue;
        }
        total += g.len();
        picked.push(k);
    }
    picked.sort_unstable();
    picked.into_iter().map(|k| &dataset.groups()[k]).collect()
}

/// Mini-batch gradient descent with classical momentum.
///
/// Parameters start uniform in `[-0.01, 0.01]`; every epoch reshuffles the
/// groups and steps once per batch of `groups_per_batch` groups:
/// `v ← momentum·v − lr·∇L_batch`, `θ ← θ + v`.
pub fn train(dataset: &MilDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut config = config.clone();
    if config.median_gamma {
        config.kernel_gamma = median_heuristic_gamma(dataset, config.seed)?;
        log::info!("median heuristic gamma = {}", config.kernel_gamma);
    }
    let dim = dataset.dim();
    let bias = bias_feature(&config);
    let gamma = config.kernel_gamma;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut theta: Vec<f64> = (0..dim)
        .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
        .collect();
    theta.push(if config.use_bias {
        rng.random_range(-INIT_RANGE..=INIT_RANGE)
    } else {
        0.0
    });

    let trace = trace_groups(dataset, &config);
    let trace_instances = trace.iter().map(|g| g.len()).sum();
    let initial_loss = evaluate(&theta, &trace, config.lambda, gamma, bias, false)?.0;

    let mut velocity = vec![0.0; dim + 1];
    let mut order: Vec<usize> = (0..dataset.n_groups()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for (b, chunk) in order.chunks(config.groups_per_batch).enumerate() {
            let batch: Vec<&Group> = chunk.iter().map(|&k| &dataset.groups()[k]).collect();
            let (loss, grad) = evaluate(&theta, &batch, config.lambda, gamma, bias, true)?;
            let grad = grad.expect("gradient requested");
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    what: "loss",
                    epoch,
                    batch: b,
                });
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite {
                    what: "gradient",
                    epoch,
                    batch: b,
                });
            }
            for ((t, v), g) in theta.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = config.momentum * *v - config.learning_rate * g;
                *t += *v;
            }
            if theta.iter().any(|t| !t.is_finite()) {
                return Err(Error::NonFinite {
                    what: "parameters",
                    epoch,
                    batch: b,
                });
            }
        }
        let loss = evaluate(&theta, &trace, config.lambda, gamma, bias, false)?.0;
        log::debug!("epoch {epoch}: loss {loss}");
        epoch_losses.push(loss);
    }

    Ok(TrainOutcome {
        model: MilModel::new(theta, config)?,
        initial_loss,
        epoch_losses,
        trace_instances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambda: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub momentum: Vec<f64>,
}

impl GridSpec {
    pub fn singleton(config: &TrainConfig) -> Self {
        Self {
            lambda: vec![config.lambda],
            learning_rate: vec![config.learning_rate],
            momentum: vec![config.momentum],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_empty() || self.learning_rate.is_empty() || self.momentum.is_empty() {
            return Err(Error::Config(
                "every grid axis needs at least one value".into(),
            ));
        }
        Ok(())
    }

    /// Cartesian product in lambda-major order.
    pub fn configs(&self, base: &TrainConfig) -> Vec<TrainConfig> {
        let mut out = Vec::new();
        for &lambda in &self.lambda {
            for &learning_rate in &self.learning_rate {
                for &momentum in &self.momentum {
                    out.push(TrainConfig {
                        lambda,
                        learning_rate,
                        momentum,
                        ..base.clone()
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub lambda: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    /// In-sample document accuracy, absent if training failed.
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub cells: Vec<GridCell>,
    pub best: usize,
}

fn in_sample_accuracy(model: &MilModel, dataset: &MilDataset) -> Result<f64> {
    let mut hits = 0usize;
    for g in dataset.groups() {
        if predict_document(model, &g.instances, DocumentRule::Majority)?.label == g.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / dataset.n_groups() as f64)
}

/// Index of the most accurate cell; ties go to smaller lambda, then smaller
/// learning rate, then smaller momentum.
pub fn select_best(cells: &[GridCell]) -> Option<usize> {
    cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.accuracy.map(|a| (i, a, c)))
        .min_by(|(_, a, x), (_, b, y)| {
            b.total_cmp(a)
                .then(x.lambda.total_cmp(&y.lambda))
                .then(x.learning_rate.total_cmp(&y.learning_rate))
                .then(x.momentum.total_cmp(&y.momentum))
        })
        .map(|(i, _, _)| i)
}

/// Trains one model per grid point and picks the highest in-sample
/// document accuracy. Failed cells are recorded, not fatal, unless every
/// cell fails.
pub fn grid_search(
    dataset: &MilDataset,
    grid: &GridSpec,
    base: &TrainConfig,
) -> Result<(TrainConfig, GridReport)> {
    grid.validate()?;
    let configs = grid.configs(base);
    let mut cells = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let result = train(dataset, cfg).and_then(|o| in_sample_accuracy(&o.model, dataset));
        if let Err(e) = &result {
            log::warn!(
                "grid cell lambda={} lr={} momentum={} failed: {e}",
                cfg.lambda,
                cfg.learning_rate,
                cfg.momentum
            );
        }
        cells.push(GridCell {
            lambda: cfg.lambda,
            learning_rate: cfg.learning_rate,
            momentum: cfg.momentum,
            accuracy: result.as_ref().ok().copied(),
            error: result.err().map(|e| e.to_string()),
        });
    }
    let best = select_best(&cells).ok_or_else(|| {
        Error::Config(format!(
            "all {} grid cells failed; first error: {}",
            cells.len(),
            cells[0].error.as_deref().unwrap_or("unknown")
        ))
    })?;
    Ok((configs[best].clone(), GridReport { cells, best }))
}
