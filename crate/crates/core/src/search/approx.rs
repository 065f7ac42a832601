//! Noise approximation baselines: Adam descent on the target latent with
//! distributional regularizers, and the loss of randomly chosen seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mse_prefix;
use crate::error::{Error, Result};
use crate::prng::randn;
use crate::seed::Seed;
use crate::tensor::{NoiseVector, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Weight of `(var - 1)^2`.
    pub variance_weight: f64,
    /// Weight of `skewness^2 + excess_kurtosis^2`.
    pub noise_weight: f64,
    /// Seeds the starting point.
    pub init_seed: Seed,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            variance_weight: 1.0,
            noise_weight: 0.1,
            init_seed: Seed(0),
        }
    }
}

impl ApproxConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        if !(self.variance_weight >= 0.0 && self.noise_weight >= 0.0) {
            return Err(Error::invalid("regularization weights must be non-negative"));
        }
        if !(self.learning_rate > 0.0 && (0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::invalid("invalid Adam hyperparameters"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ApproxResult {
    /// The iterate with the lowest objective.
    pub noise: NoiseVector,
    /// MSE between `noise` and the target.
    pub mse: f64,
    pub best_iteration: usize,
    /// Objective after each update.
    pub trace: Vec<f64>,
}

/// Objective value and gradient at `x`.
pub(crate) fn objective(x: &[f64], z: &[f64], vw: f64, nw: f64, grad: &mut [f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut mse, mut v, mut m3, mut m4) = (0.0, 0.0, 0.0, 0.0);
    for (&xi, &zi) in x.iter().zip(z) {
        let e = xi - zi;
        mse += e * e;
        let c = xi - mean;
        let c2 = c * c;
        v += c2;
        m3 += c2 * c;
        m4 += c2 * c2;
    }
    let (mse, v, m3, m4) = (mse / n, v / n, m3 / n, m4 / n);

    let skew = m3 * v.powf(-1.5);
    let kurt = m4 / (v * v) - 3.0;
    let value = mse + vw * (v - 1.0).powi(2) + nw * (skew * skew + kurt * kurt);

    for ((g, &xi), &zi) in grad.iter_mut().zip(x).zip(z) {
        let c = xi - mean;
        let dv = 2.0 * c / n;
        let dm3 = 3.0 / n * (c * c - v);
        let dm4 = 4.0 / n * (c * c * c - m3);
        let dskew = dm3 * v.powf(-1.5) - 1.5 * m3 * v.powf(-2.5) * dv;
        let dkurt = dm4 / (v * v) - 2.0 * m4 / (v * v * v) * dv;
        *g = 2.0 * (xi - zi) / n + vw * 2.0 * (v - 1.0) * dv + nw * 2.0 * (skew * dskew + kurt * dkurt);
    }
    value
}

/// Approximates the initial noise of `target` by Adam descent on
/// `MSE(eps, target) + variance_weight (var - 1)^2 + noise_weight (skew^2 + exkurt^2)`,
/// starting from the noise of `cfg.init_seed`.
pub fn approximate_noise(target: &Tensor, cfg: &ApproxConfig) -> Result<ApproxResult> {
    cfg.validate()?;
    if target.len() < 2 {
        return Err(Error::invalid("target needs at least two elements"));
    }
    let z: Vec<f64> = target.data().iter().map(|&v| v as f64).collect();
    let mut x: Vec<f64> = randn(cfg.init_seed, target.shape())?
        .data()
        .iter()
        .map(|&v| v as f64)
        .collect();
    let n = x.len();
    let (mut m, mut v, mut grad) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut best = (f64::INFINITY, 0usize, x.clone());
    let mut trace = Vec::with_capacity(cfg.iterations);
    let (mut b1t, mut b2t) = (1.0, 1.0);
    for it in 1..=cfg.iterations {
        objective(&x, &z, cfg.variance_weight, cfg.noise_weight, &mut grad);
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        for i in 0..n {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let mh = m[i] / (1.0 - b1t);
            let vh = v[i] / (1.0 - b2t);
            x[i] -= cfg.learning_rate * mh / (vh.sqrt() + cfg.epsilon);
        }
        let value = objective(&x, &z, cfg.variance_weight, cfg.noise_weight, &mut grad);
        trace.push(value);
        if value < best.0 {
            best = (value, it, x.clone());
        }
    }
    let noise = Tensor::new(best.2.iter().map(|&v| v as f32).collect(), target.shape().to_vec())?;
    let mse = mse_prefix(target, &noise, n)?;
    Ok(ApproxResult {
        noise,
        mse,
        best_iteration: best.1,
        trace,
    })
}

/// Mean and population standard deviation of the full MSE between `target`
/// and the noise of `count` seeds drawn uniformly from the 32-bit space.
pub fn random_seed_baseline(target: &Tensor, count: usize, rng_seed: u64) -> Result<(f64, f64)> {
    if count == 0 {
        return Err(Error::invalid("count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let losses = (0..count)
        .map(|_| {
            let s = Seed(rng.random::<u32>() as u64);
            mse_prefix(target, &randn(s, target.shape())?, target.len())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = losses.iter().sum::<f64>() / count as f64;
    let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / count as f64;
    Ok((mean, var.sqrt()))
}
