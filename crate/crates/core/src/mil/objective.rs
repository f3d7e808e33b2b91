use std::borrow::Borrow;

use crate::corpus::Group;
use crate::error::{Error, Result};

use super::{linear, sigmoid, squared_distance, MilModel};

/// Loss and (optionally) gradient over a batch of groups, with N and K taken
/// as the batch's own instance and group counts.
///
/// With scores `s = σ(θᵀx̃)` and `S_ij = exp(-γ||xi - xj||²)`:
///
/// ```text
/// L  = (1/N²) Σ_i Σ_j S_ij (s_i - s_j)²  +  (λ/K) Σ_k (mean_{i∈G_k} s_i - l_k)²
/// ∂L = Σ_i c_i x̃_i,
/// c_i = s_i(1 - s_i) [ (4/N²) Σ_j S_ij (s_i - s_j) + 2λ/(K |G_k|) (A_k - l_k) ]
/// ```
///
/// Each unordered pair is visited once; the i = j terms vanish.
pub(crate) fn evaluate<G: Borrow<Group>>(
    theta: &[f64],
    batch: &[G],
    lambda: f64,
    gamma: f64,
    bias: f64,
    want_gradient: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let dim = theta.len() - 1;
    let mut xs: Vec<&[f64]> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    for (k, g) in batch.iter().enumerate() {
        let g = g.borrow();
        if g.is_empty() {
            return Err(Error::Empty("group"));
        }
        for x in &g.instances {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("batch group {k}"),
                    expected: dim,
                    found: x.len(),
                });
            }
            xs.push(x);
            owner.push(k);
        }
    }
    let n = xs.len();
    let n_sq = (n * n) as f64;
    let k_groups = batch.len() as f64;

    let scores: Vec<f64> = xs.iter().map(|x| sigmoid(linear(theta, x, bias))).collect();

    // pull[i] = Σ_j S_ij (s_i - s_j)
    let mut pull = vec![0.0; n];
    let mut pair_sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (-gamma * squared_distance(xs[i], xs[j])).exp();
            let diff = scores[i] - scores[j];
            pair_sum += s * diff * diff;
            pull[i] += s * diff;
            pull[j] -= s * diff;
        }
    }
    let smooth = 2.0 * pair_sum / n_sq;

    let mut group_err = Vec::with_capacity(batch.len());
    let mut offset = 0;
    let mut group_sum = 0.0;
    for g in batch {
        let g = g.borrow();
        let mean = scores[offset..offset + g.len()].iter().sum::<f64>() / g.len() as f64;
        let err = mean - g.label.target();
        group_sum += err * err;
        group_err.push(err);
        offset += g.len();
    }
    let loss = smooth + lambda / k_groups * group_sum;

    if !want_gradient {
        return Ok((loss, None));
    }
    let mut grad = vec![0.0; dim + 1];
    for i in 0..n {
        let k = owner[i];
        let size = batch[k].borrow().len() as f64;
        let slope = scores[i] * (1.0 - scores[i]);
        let c = slope * (4.0 / n_sq * pull[i] + 2.0 * lambda / (k_groups * size) * group_err[k]);
        for (g, x) in grad[..dim].iter_mut().zip(xs[i]) {
            *g += c * x;
        }
        grad[dim] += c * bias;
    }
    Ok((loss, Some(grad)))
}

pub fn loss<G: Borrow<Group>>(
    model: &MilModel,
    batch: &[G],
    lambda: f64,
    gamma: f64,
) -> Result<f64> {
    evaluate(
        model.theta(),
        batch,
        lambda,
        gamma,
        model.bias_feature(),
        false,
    )
    .map(|(l, _)| l)
}

/// Gradient of [`loss`] with respect to all `dim + 1` parameters.
pub fn gradient<G: Borrow<Group>>(
    model: &MilModel,
    batch: &[G],
    lambda: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    loss_and_gradient(model, batch, lambda, gamma).map(|(_, g)| g)
}

pub fn loss_and_gradient<G: Borrow<Group>>(
    model: &MilModel,
    batch: &[G],
    lambda: f64,
    gamma: f64,
) -> Result<(f64, Vec<f64>)> {
    let (l, g) = evaluate(
        model.theta(),
        batch,
        lambda,
        gamma,
        model.bias_feature(),
        true,
    )?;
    Ok((l, g.expect("gradient requested")))
}
