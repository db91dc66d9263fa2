//! Deterministic minibatch training.
//!
//! Every random choice (initialization, epoch shuffles, VAE noise) comes
//! from streams derived from the training seed, so a fixed configuration
//! replays the same trajectory on the same build.

use crate::matrix::Matrix;
use crate::rng::RngStream;

use super::optim::{AdamConfig, AdamState};
use super::{backward_and_step, streams, Activation, LayerSpec, Model, NnError, Variant};

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// KL weight for the VAE; ignored by AE/SAE.
    pub beta: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 30, batch_size: 64, learning_rate: 1e-3, beta: 1e-3, seed: 0 }
    }
}

/// Batch-averaged loss parts for one epoch.
#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub total: f64,
    pub recon: f64,
    pub kl: f64,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub model: Model,
    pub history: Vec<EpochStats>,
    /// Deterministic full-dataset reconstruction MSE before training.
    pub initial_mse: f64,
    /// Deterministic full-dataset reconstruction MSE after the last step.
    pub final_mse: f64,
}

/// Encoder/decoder stacks used when no explicit architecture is given:
/// 784-wide inputs get the 784→512→256→d_z stack, everything else
/// d_x→64→d_z; ReLU hidden layers, identity latent head, sigmoid output.
pub fn default_architecture(
    variant: Variant,
    input_dim: usize,
    latent_dim: usize,
) -> (Vec<LayerSpec>, Vec<LayerSpec>) {
    let hidden: Vec<usize> = if input_dim >= 784 { vec![512, 256] } else { vec![64] };
    let head = match variant {
        Variant::Vae => 2 * latent_dim,
        _ => latent_dim,
    };
    let mut encoder = Vec::new();
    let mut prev = input_dim;
    for &h in &hidden {
        encoder.push(LayerSpec::new(prev, h, Activation::Relu));
        prev = h;
    }
    encoder.push(LayerSpec::new(prev, head, Activation::Identity));

    let mut decoder = Vec::new();
    let mut prev = latent_dim;
    for &h in hidden.iter().rev() {
        decoder.push(LayerSpec::new(prev, h, Activation::Relu));
        prev = h;
    }
    decoder.push(LayerSpec::new(prev, input_dim, Activation::Sigmoid));
    (encoder, decoder)
}

/// Train a fresh model of the default architecture on `data` (rows are
/// samples). Fails with the diverging step or the degenerate latent row if
/// the run goes numerically bad.
pub fn train_model(
    variant: Variant,
    data: &Matrix,
    latent_dim: usize,
    config: &TrainConfig,
) -> Result<TrainOutcome, NnError> {
    let (encoder, decoder) = default_architecture(variant, data.cols(), latent_dim);
    let model = Model::new(variant, &encoder, &decoder, latent_dim, config.beta, config.seed)?;
    continue_training(model, data, config)
}

/// Run the training loop on an existing model.
pub fn continue_training(
    mut model: Model,
    data: &Matrix,
    config: &TrainConfig,
) -> Result<TrainOutcome, NnError> {
    if data.rows() == 0 {
        return Err(NnError::Shape("training data is empty".into()));
    }
    if config.batch_size == 0 {
        return Err(NnError::Spec("batch size must be positive".into()));
    }
    let initial_mse = dataset_mse(&model, data)?;
    let mut opt = AdamState::new(
        AdamConfig { learning_rate: config.learning_rate, ..Default::default() },
        &model,
    );
    let mut history = Vec::with_capacity(config.epochs);
    let n = data.rows();
    let mut indices: Vec<usize> = (0..n).collect();
    for epoch in 0..config.epochs {
        let mut shuffle = RngStream::with_stream(config.seed, streams::SHUFFLE + epoch as u64);
        for i in (1..n).rev() {
            let j = shuffle.next_index(i + 1);
            indices.swap(i, j);
        }
        let mut sums = (0.0, 0.0, 0.0);
        let mut batches = 0usize;
        for chunk in indices.chunks(config.batch_size) {
            let batch = data.take_rows(chunk);
            let mut noise = RngStream::with_stream(config.seed, streams::NOISE + model.steps);
            let parts = backward_and_step(&mut model, &batch, &mut opt, &mut noise)?;
            sums.0 += parts.total;
            sums.1 += parts.recon;
            sums.2 += parts.kl;
            batches += 1;
        }
        let scale = 1.0 / batches as f64;
        history.push(EpochStats {
            epoch,
            total: sums.0 * scale,
            recon: sums.1 * scale,
            kl: sums.2 * scale,
        });
    }
    let final_mse = dataset_mse(&model, data)?;
    Ok(TrainOutcome { model, history, initial_mse, final_mse })
}

/// Deterministic reconstruction MSE over a whole dataset (the VAE decodes
/// its posterior mean). This is the value `eval` reproduces from a
/// checkpoint.
pub fn dataset_mse(model: &Model, data: &Matrix) -> Result<f64, NnError> {
    let recon = model.reconstruct(data)?;
    let n = data.data().len() as f64;
    Ok(data
        .data()
        .iter()
        .zip(recon.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}
