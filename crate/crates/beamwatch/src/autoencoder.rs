//! Fully connected autoencoder with one encoder layer and a symmetric
//! decoder, trained by mini-batch gradient descent on normal windows only.
//! Produces the Mean Cubic Error (MCE) feature consumed by the hybrid
//! detector: `MCE(x, x̂) = (1/a) Σ_j (x_j - x̂_j)^3`, a signed scalar per
//! window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Standardizer, Window};

/// Nonlinearity applied after the encoder layer; the decoder output is
/// always linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed in terms of the activated output `h`.
    fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Identity => 1.0,
        }
    }
}

/// How residual cubes enter the MCE feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MceMode {
    /// Literal signed cubes.
    #[default]
    Signed,
    /// `|r|^3` ablation variant.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub latent_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Weights initialize uniformly in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            latent_dim: 3,
            learning_rate: 1e-2,
            epochs: 200,
            batch_size: 64,
            seed: 42,
            // 1/sqrt(k) for the default window length k = 6.
            init_scale: 0.4082482904638631,
            activation: Activation::Tanh,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, input_dim: usize) -> Result<()> {
        if self.latent_dim == 0 || self.latent_dim >= input_dim {
            return Err(Error::InvalidConfig(format!(
                "latent_dim must be in 1..{input_dim} (bottleneck), got {}",
                self.latent_dim
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trained model: `x̂ = b_dec + w_dec · act(w_enc · x + b_enc)`, plus the
/// standardizer fitted at train time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    /// latent_dim x k
    pub w_enc: Vec<Vec<f64>>,
    pub b_enc: Vec<f64>,
    /// k x latent_dim
    pub w_dec: Vec<Vec<f64>>,
    pub b_dec: Vec<f64>,
    pub activation: Activation,
    pub standardizer: Standardizer,
}

/// Gradients of the MSE loss with respect to every parameter, same shapes as
/// the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w_enc: Vec<Vec<f64>>,
    pub b_enc: Vec<f64>,
    pub w_dec: Vec<Vec<f64>>,
    pub b_dec: Vec<f64>,
}

impl AutoencoderModel {
    pub fn input_dim(&self) -> usize {
        self.b_dec.len()
    }

    pub fn latent_dim(&self) -> usize {
        self.b_enc.len()
    }

    /// Deterministic reconstruction of a standardized window.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let hidden = self.encode(x);
        Ok(self.decode(&hidden))
    }

    fn encode(&self, x: &[f64]) -> Vec<f64> {
        self.w_enc
            .iter()
            .zip(&self.b_enc)
            .map(|(row, b)| {
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b;
                self.activation.apply(z)
            })
            .collect()
    }

    fn decode(&self, hidden: &[f64]) -> Vec<f64> {
        self.w_dec
            .iter()
            .zip(&self.b_dec)
            .map(|(row, b)| row.iter().zip(hidden).map(|(w, h)| w * h).sum::<f64>() + b)
            .collect()
    }

    /// Flat parameter vector in a fixed order (w_enc, b_enc, w_dec, b_dec);
    /// paired with [`AutoencoderModel::assign_params`] for numerical checks.
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend(self.w_enc.iter().flatten());
        out.extend(&self.b_enc);
        out.extend(self.w_dec.iter().flatten());
        out.extend(&self.b_dec);
        out
    }

    pub fn assign_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for row in &mut self.w_enc {
            for w in row {
                *w = *it.next().expect("flat vector matches shapes");
            }
        }
        for b in &mut self.b_enc {
            *b = *it.next().expect("flat vector matches shapes");
        }
        for row in &mut self.w_dec {
            for w in row {
                *w = *it.next().expect("flat vector matches shapes");
            }
        }
        for b in &mut self.b_dec {
            *b = *it.next().expect("flat vector matches shapes");
        }
        assert!(it.next().is_none(), "flat vector matches shapes");
    }
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend(self.w_enc.iter().flatten());
        out.extend(&self.b_enc);
        out.extend(self.w_dec.iter().flatten());
        out.extend(&self.b_dec);
        out
    }

    fn zeros(latent: usize, k: usize) -> Self {
        Gradients {
            w_enc: vec![vec![0.0; k]; latent],
            b_enc: vec![0.0; latent],
            w_dec: vec![vec![0.0; latent]; k],
            b_dec: vec![0.0; k],
        }
    }
}

/// Mean over samples of the mean over dimensions of squared differences.
pub fn mse_loss(batch: &[(&[f64], &[f64])]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    for (x, xhat) in batch {
        if x.len() != xhat.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: xhat.len(),
            });
        }
        let per_dim: f64 =
            x.iter().zip(*xhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64;
        total += per_dim;
    }
    Ok(total / batch.len() as f64)
}

/// Exact analytic gradients of [`mse_loss`] over the batch (targets are the
/// inputs themselves). Returns the batch loss alongside.
pub fn backward(model: &AutoencoderModel, batch: &[&[f64]]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = model.input_dim();
    let latent = model.latent_dim();
    let mut grads = Gradients::zeros(latent, k);
    let mut loss = 0.0;
    let norm = 2.0 / (batch.len() * k) as f64;

    for &x in batch {
        if x.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: x.len(),
            });
        }
        let hidden = model.encode(x);
        let xhat = model.decode(&hidden);
        // g = dL/dx̂ for this sample
        let mut g = vec![0.0; k];
        for i in 0..k {
            let r = xhat[i] - x[i];
            loss += r * r / (batch.len() * k) as f64;
            g[i] = norm * r;
        }
        for i in 0..k {
            grads.b_dec[i] += g[i];
            for l in 0..latent {
                grads.w_dec[i][l] += g[i] * hidden[l];
            }
        }
        for l in 0..latent {
            let upstream: f64 = (0..k).map(|i| model.w_dec[i][l] * g[i]).sum();
            let v = upstream * model.activation.derivative_from_output(hidden[l]);
            grads.b_enc[l] += v;
            for j in 0..k {
                grads.w_enc[l][j] += v * x[j];
            }
        }
    }
    Ok((loss, grads))
}

/// Trains the autoencoder on standardized normal windows by mini-batch
/// gradient descent and returns the parameters with the best epoch-end
/// training loss (the initialization counts as a candidate, so the returned
/// loss never exceeds the initial one). Deterministic for a fixed seed.
///
/// Any window labeled anomalous is rejected.
pub fn train(
    cfg: &TrainConfig,
    normal_windows: &[Window],
    standardizer: Standardizer,
) -> Result<AutoencoderModel> {
    if normal_windows.is_empty() {
        return Err(Error::NothingToFit);
    }
    if normal_windows
        .iter()
        .any(|w| w.label.is_some_and(|l| l.is_anomalous()))
    {
        return Err(Error::AnomalousTrainingData);
    }
    let k = normal_windows[0].len();
    cfg.validate(k)?;
    for w in normal_windows {
        if w.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: w.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let latent = cfg.latent_dim;
    let uniform =
        |rows: usize, cols: usize, rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| rng.gen_range(-cfg.init_scale..cfg.init_scale))
                        .collect()
                })
                .collect()
        };
    let mut model = AutoencoderModel {
        w_enc: uniform(latent, k, &mut rng),
        b_enc: vec![0.0; latent],
        w_dec: uniform(k, latent, &mut rng),
        b_dec: vec![0.0; k],
        activation: cfg.activation,
        standardizer,
    };

    let inputs: Vec<&[f64]> = normal_windows.iter().map(|w| w.values.as_slice()).collect();
    let full_loss = |m: &AutoencoderModel| -> f64 {
        inputs
            .iter()
            .map(|x| {
                let xhat = m.forward(x).expect("dims checked");
                x.iter()
                    .zip(&xhat)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / k as f64
            })
            .sum::<f64>()
            / inputs.len() as f64
    };

    let mut best_loss = full_loss(&model);
    let mut best = model.clone();
    let mut order: Vec<usize> = (0..inputs.len()).collect();

    for _epoch in 0..cfg.epochs {
        // Deterministic shuffle per epoch.
        for i in 0..order.len() {
            let j = rng.gen_range(i..order.len());
            order.swap(i, j);
        }
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&[f64]> = chunk.iter().map(|&i| inputs[i]).collect();
            let (_, grads) = backward(&model, &batch)?;
            sgd_step(&mut model, &grads, cfg.learning_rate);
        }
        let loss = full_loss(&model);
        if loss < best_loss {
            best_loss = loss;
            best = model.clone();
        }
    }
    Ok(best)
}

fn sgd_step(model: &mut AutoencoderModel, grads: &Gradients, lr: f64) {
    for (row, grow) in model.w_enc.iter_mut().zip(&grads.w_enc) {
        for (w, g) in row.iter_mut().zip(grow) {
            *w -= lr * g;
        }
    }
    for (b, g) in model.b_enc.iter_mut().zip(&grads.b_enc) {
        *b -= lr * g;
    }
    for (row, grow) in model.w_dec.iter_mut().zip(&grads.w_dec) {
        for (w, g) in row.iter_mut().zip(grow) {
            *w -= lr * g;
        }
    }
    for (b, g) in model.b_dec.iter_mut().zip(&grads.b_dec) {
        *b -= lr * g;
    }
}

/// Mean Cubic Error: `(1/a) Σ_j (x_j - x̂_j)^3`. Signed; positive when the
/// input exceeds its reconstruction on balance.
pub fn mce(x: &[f64], xhat: &[f64]) -> Result<f64> {
    mce_with(x, xhat, MceMode::Signed)
}

pub fn mce_with(x: &[f64], xhat: &[f64], mode: MceMode) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: xhat.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: f64 = x
        .iter()
        .zip(xhat)
        .map(|(a, b)| {
            let r = a - b;
            match mode {
                MceMode::Signed => r * r * r,
                MceMode::Absolute => r.abs().powi(3),
            }
        })
        .sum();
    Ok(sum / x.len() as f64)
}

/// One MCE scalar per window: the raw window is standardized with the
/// model's standardizer, reconstructed, and compared. This is the
/// 1-dimensional feature space consumed by the isolation forest.
pub fn mce_features(model: &AutoencoderModel, windows: &[Window]) -> Result<Vec<f64>> {
    mce_features_with(model, windows, MceMode::Signed)
}

pub fn mce_features_with(
    model: &AutoencoderModel,
    windows: &[Window],
    mode: MceMode,
) -> Result<Vec<f64>> {
    windows
        .iter()
        .map(|w| {
            let x = model.standardizer.transform(&w.values)?;
            let xhat = model.forward(&x)?;
            mce_with(&x, &xhat, mode)
        })
        .collect()
}
