use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{Group, MilDataset, Polarity};
use crate::error::{Error, Result};

/// Synthetic grouped data with known instance labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub dataset: MilDataset,
    /// True label of every instance, aligned with `dataset.groups()`.
    pub labels: Vec<Vec<Polarity>>,
    /// Unit vector separating the two clusters.
    pub direction: Vec<f64>,
}

/// Two Gaussian clusters with means `±separation·u` and identity covariance.
///
/// Each group draws a latent polarity; its instances come from the matching
/// cluster, except for `round(noise_fraction · N)` instances (chosen
/// uniformly over the whole dataset) that are drawn from the opposite one.
/// An instance's true label is the cluster it was drawn from, and the group
/// label is the majority of its instances' labels (ties keep the latent
/// polarity).
pub fn generate_synthetic(
    n_groups: usize,
    instances_per_group: usize,
    dim: usize,
    separation: f64,
    noise_fraction: f64,
    seed: u64,
) -> Result<SyntheticData> {
    if n_groups == 0 || instances_per_group == 0 || dim == 0 {
        return Err(Error::Config(
            "groups, instances per group and dimension must be positive".into(),
        ));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::Config(format!(
            "separation must be > 0, got {separation}"
        )));
    }
    if !(0.0..=1.0).contains(&noise_fraction) {
        return Err(Error::Config(format!(
            "noise_fraction must lie in [0, 1], got {noise_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let direction = loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            break v.into_iter().map(|x| x / norm).collect::<Vec<f64>>();
        }
    };

    let total = n_groups * instances_per_group;
    let n_flip = (noise_fraction * total as f64).round() as usize;
    let mut flipped = vec![false; total];
    for i in sample(&mut rng, total, n_flip.min(total)) {
        flipped[i] = true;
    }

    let mut groups = Vec::with_capacity(n_groups);
    let mut labels = Vec::with_capacity(n_groups);
    for k in 0..n_groups {
        let latent = rng.random_bool(0.5);
        let mut instances = Vec::with_capacity(instances_per_group);
        let mut truth = Vec::with_capacity(instances_per_group);
        for i in 0..instances_per_group {
            let positive = latent != flipped[k * instances_per_group + i];
            let sign = if positive { 1.0 } else { -1.0 };
            let x: Vec<f64> = direction
                .iter()
                .map(|u| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sign * separation * u + z
                })
                .collect();
            instances.push(x);
            truth.push(if positive {
                Polarity::Positive
            } else {
                Polarity::Negative
            });
        }
        let pos = truth.iter().filter(|&&l| l == Polarity::Positive).count();
        let label = match (2 * pos).cmp(&instances_per_group) {
            std::cmp::Ordering::Greater => Polarity::Positive,
            std::cmp::Ordering::Less => Polarity::Negative,
            std::cmp::Ordering::Equal if latent => Polarity::Positive,
            std::cmp::Ordering::Equal => Polarity::Negative,
        };
        groups.push(Group { instances, label });
        labels.push(truth);
    }
    Ok(SyntheticData {
        dataset: MilDataset::new(groups, dim)?,
        labels,
        direction,
    })
}
