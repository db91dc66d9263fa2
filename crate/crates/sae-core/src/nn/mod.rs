//! MLP autoencoders with manual reverse-mode gradients.
//!
//! Three latent-head variants share the same encoder/decoder stacks:
//! a plain autoencoder, the spherical autoencoder (latent centered and
//! projected to the unit sphere before decoding), and a diagonal-Gaussian
//! VAE baseline trained on the reparameterized evidence lower bound.

pub mod checkpoint;
pub mod gradcheck;
pub mod optim;
pub mod spherical;
pub mod train;

use std::fmt;
use std::str::FromStr;

use crate::matrix::Matrix;
use crate::rng::RngStream;

pub use spherical::{spherical_normalize_backward, spherical_normalize_forward, SphericalCache};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("latent row {row} is numerically constant; cannot project to the sphere")]
    DegenerateLatent { row: usize },
    #[error("non-finite loss or gradient at training step {step}")]
    Divergence { step: u64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid model specification: {0}")]
    Spec(String),
    #[error("checkpoint format: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(format!("unknown activation '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self { in_dim, out_dim, activation }
    }
}

/// One dense layer: `y = act(x W^T + b)` with `W` stored out×in.
#[derive(Clone, Debug)]
pub struct DenseLayer {
    pub spec: LayerSpec,
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn init(spec: LayerSpec, stream: &RngStream) -> Self {
        // Glorot-uniform weights, zero biases.
        let bound = (6.0 / (spec.in_dim + spec.out_dim) as f64).sqrt();
        let mut t = 0u64;
        let weight = Matrix::from_fn(spec.out_dim, spec.in_dim, |_, _| {
            let u = stream.u01_at(t);
            t += 1;
            bound * (2.0 * u - 1.0)
        });
        Self { spec, weight, bias: vec![0.0; spec.out_dim] }
    }

    fn forward(&self, x: &Matrix) -> Matrix {
        let mut y = x.matmul_nt(&self.weight);
        for i in 0..y.rows() {
            let row = y.row_mut(i);
            for (v, b) in row.iter_mut().zip(&self.bias) {
                *v = self.spec.activation.apply(*v + b);
            }
        }
        y
    }

    /// Given the layer input, post-activation output, and the gradient on
    /// that output, return (grad_weight, grad_bias, grad_input).
    fn backward(&self, input: &Matrix, output: &Matrix, grad_out: &Matrix) -> LayerGrads {
        let mut gz = grad_out.clone();
        for (g, y) in gz.data_mut().iter_mut().zip(output.data()) {
            *g *= self.spec.activation.grad_from_output(*y);
        }
        let grad_weight = gz.matmul_tn(input);
        let mut grad_bias = vec![0.0; self.spec.out_dim];
        for row in gz.rows_iter() {
            for (b, g) in grad_bias.iter_mut().zip(row) {
                *b += g;
            }
        }
        let grad_input = gz.matmul_nn(&self.weight);
        LayerGrads { weight: grad_weight, bias: grad_bias, input: grad_input }
    }
}

struct LayerGrads {
    weight: Matrix,
    bias: Vec<f64>,
    input: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Ae,
    Sae,
    Vae,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Ae => "ae",
            Variant::Sae => "sae",
            Variant::Vae => "vae",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ae" => Ok(Variant::Ae),
            "sae" => Ok(Variant::Sae),
            "vae" => Ok(Variant::Vae),
            other => Err(format!("unknown variant '{other}' (ae|sae|vae)")),
        }
    }
}

/// Log-variance clamp bound; gradients are blocked outside the open interval.
pub const LOGVAR_CLAMP: f64 = 20.0;

/// Stream-id bases spacing the independent random streams a model consumes.
/// Callers supply a seed; everything else is derived from these offsets.
pub mod streams {
    pub const INIT: u64 = 0x0100_0000_0000;
    pub const SHUFFLE: u64 = 0x0200_0000_0000;
    pub const NOISE: u64 = 0x0300_0000_0000;
    pub const GRADCHECK_INPUT: u64 = 0x0400_0000_0000;
    pub const GRADCHECK_NOISE: u64 = 0x0500_0000_0000;
}

#[derive(Clone, Debug)]
pub struct Model {
    pub variant: Variant,
    pub encoder: Vec<DenseLayer>,
    pub decoder: Vec<DenseLayer>,
    pub latent_dim: usize,
    /// KL weight; only the VAE reads it.
    pub beta: f64,
    pub seed: u64,
    pub steps: u64,
}

impl Model {
    pub fn new(
        variant: Variant,
        encoder_specs: &[LayerSpec],
        decoder_specs: &[LayerSpec],
        latent_dim: usize,
        beta: f64,
        seed: u64,
    ) -> Result<Self, NnError> {
        if encoder_specs.is_empty() || decoder_specs.is_empty() {
            return Err(NnError::Spec("encoder and decoder need at least one layer".into()));
        }
        if latent_dim == 0 {
            return Err(NnError::Spec("latent dimension must be positive".into()));
        }
        for pair in encoder_specs.windows(2).chain(decoder_specs.windows(2)) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(NnError::Spec(format!(
                    "layer chain breaks: {} out vs {} in",
                    pair[0].out_dim, pair[1].in_dim
                )));
            }
        }
        let head = encoder_specs.last().unwrap().out_dim;
        let want_head = match variant {
            Variant::Vae => 2 * latent_dim,
            _ => latent_dim,
        };
        if head != want_head {
            return Err(NnError::Spec(format!(
                "{variant} encoder must end in {want_head} units, got {head}"
            )));
        }
        if decoder_specs[0].in_dim != latent_dim {
            return Err(NnError::Spec(format!(
                "decoder must start from {latent_dim} units, got {}",
                decoder_specs[0].in_dim
            )));
        }
        let mut layer_index = 0u64;
        let mut init_layer = |spec: &LayerSpec| {
            let stream = RngStream::with_stream(seed, streams::INIT + layer_index);
            layer_index += 1;
            DenseLayer::init(*spec, &stream)
        };
        let encoder: Vec<DenseLayer> = encoder_specs.iter().map(&mut init_layer).collect();
        let decoder: Vec<DenseLayer> = decoder_specs.iter().map(&mut init_layer).collect();
        Ok(Self { variant, encoder, decoder, latent_dim, beta, seed, steps: 0 })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder[0].spec.in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.decoder.last().unwrap().spec.out_dim
    }

    /// Parameter slices in declaration order (encoder then decoder, weight
    /// then bias per layer). The order is the checkpoint serialization order.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * (self.encoder.len() + self.decoder.len()));
        for layer in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            let DenseLayer { weight, bias, .. } = layer;
            out.push(weight.data_mut());
            out.push(bias.as_mut_slice());
        }
        out
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * (self.encoder.len() + self.decoder.len()));
        for layer in self.encoder.iter().chain(self.decoder.iter()) {
            out.push(layer.weight.data());
            out.push(layer.bias.as_slice());
        }
        out
    }

    /// Decode latent rows to reconstructions (decoder stack only).
    pub fn decode(&self, z: &Matrix) -> Result<Matrix, NnError> {
        if z.cols() != self.latent_dim {
            return Err(NnError::Shape(format!(
                "latent has {} columns, model expects {}",
                z.cols(),
                self.latent_dim
            )));
        }
        let mut h = z.clone();
        for layer in &self.decoder {
            h = layer.forward(&h);
        }
        Ok(h)
    }

    /// Deterministic reconstruction: the VAE decodes its posterior mean, the
    /// SAE its normalized latent, the plain AE its raw latent.
    pub fn reconstruct(&self, x: &Matrix) -> Result<Matrix, NnError> {
        let z = self.encode_deterministic(x)?;
        self.decode(&z)
    }

    /// The deterministic latent for each input row (no sampling noise).
    pub fn encode_deterministic(&self, x: &Matrix) -> Result<Matrix, NnError> {
        let mut h = x.clone();
        for layer in &self.encoder {
            h = layer.forward(&h);
        }
        match self.variant {
            Variant::Ae => Ok(h),
            Variant::Sae => {
                let (u, _) = spherical_normalize_forward(&h)?;
                Ok(u)
            }
            Variant::Vae => {
                let mut mu = Matrix::zeros(h.rows(), self.latent_dim);
                for i in 0..h.rows() {
                    mu.row_mut(i).copy_from_slice(&h.row(i)[..self.latent_dim]);
                }
                Ok(mu)
            }
        }
    }
}

/// VAE posterior parameters exposed by a forward pass.
#[derive(Clone, Debug)]
pub struct VaeAux {
    pub mu: Matrix,
    /// Clamped log-variance actually used by the sampler and the loss.
    pub logvar: Matrix,
}

/// Public forward output: reconstruction, latent, and VAE posterior.
#[derive(Clone, Debug)]
pub struct ForwardOutput {
    pub recon: Matrix,
    pub z: Matrix,
    pub aux: Option<VaeAux>,
}

struct FullPass {
    enc_io: Vec<(Matrix, Matrix)>,
    dec_io: Vec<(Matrix, Matrix)>,
    z: Matrix,
    sph: Option<SphericalCache>,
    vae: Option<VaeCache>,
    recon: Matrix,
}

struct VaeCache {
    mu: Matrix,
    logvar: Matrix,
    raw_logvar: Matrix,
    noise: Matrix,
}

fn run(model: &Model, x: &Matrix, noise: Option<&Matrix>) -> Result<FullPass, NnError> {
    if x.cols() != model.input_dim() {
        return Err(NnError::Shape(format!(
            "input has {} columns, model expects {}",
            x.cols(),
            model.input_dim()
        )));
    }
    let mut enc_io = Vec::with_capacity(model.encoder.len());
    let mut h = x.clone();
    for layer in &model.encoder {
        let out = layer.forward(&h);
        enc_io.push((h, out.clone()));
        h = out;
    }

    let (z, sph, vae) = match model.variant {
        Variant::Ae => (h, None, None),
        Variant::Sae => {
            let (u, cache) = spherical_normalize_forward(&h)?;
            (u, Some(cache), None)
        }
        Variant::Vae => {
            let d = model.latent_dim;
            let batch = h.rows();
            let noise = noise.ok_or_else(|| {
                NnError::Shape("VAE forward needs a noise matrix".into())
            })?;
            if noise.rows() != batch || noise.cols() != d {
                return Err(NnError::Shape("noise shape must be batch × latent_dim".into()));
            }
            let mut mu = Matrix::zeros(batch, d);
            let mut raw_logvar = Matrix::zeros(batch, d);
            for i in 0..batch {
                mu.row_mut(i).copy_from_slice(&h.row(i)[..d]);
                raw_logvar.row_mut(i).copy_from_slice(&h.row(i)[d..]);
            }
            let logvar = raw_logvar.map(|v| v.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP));
            let mut z = Matrix::zeros(batch, d);
            for i in 0..batch {
                let (zr, mr, lr, er) =
                    (z.row_mut(i), mu.row(i), logvar.row(i), noise.row(i));
                for (((zv, &m), &l), &e) in zr.iter_mut().zip(mr).zip(lr).zip(er) {
                    *zv = m + (0.5 * l).exp() * e;
                }
            }
            (z, None, Some(VaeCache { mu, logvar, raw_logvar, noise: noise.clone() }))
        }
    };

    let mut dec_io = Vec::with_capacity(model.decoder.len());
    let mut h = z.clone();
    for layer in &model.decoder {
        let out = layer.forward(&h);
        dec_io.push((h, out.clone()));
        h = out;
    }
    Ok(FullPass { enc_io, dec_io, z, sph, vae, recon: h })
}

fn noise_for(model: &Model, batch: usize, rng: &mut RngStream) -> Option<Matrix> {
    match model.variant {
        Variant::Vae => {
            // One Box–Muller pair per entry; the second variate is unused so
            // consumption stays aligned regardless of shape.
            Some(Matrix::from_fn(batch, model.latent_dim, |_, _| rng.next_normal()))
        }
        _ => None,
    }
}

/// Encoder → latent head → decoder. The stream feeds reparameterization
/// noise (VAE only).
pub fn forward(model: &Model, x: &Matrix, rng: &mut RngStream) -> Result<ForwardOutput, NnError> {
    let noise = noise_for(model, x.rows(), rng);
    forward_with_noise(model, x, noise.as_ref())
}

/// Forward pass with explicit reparameterization noise, making the map a
/// deterministic function of the parameters (used by gradient checks).
pub fn forward_with_noise(
    model: &Model,
    x: &Matrix,
    noise: Option<&Matrix>,
) -> Result<ForwardOutput, NnError> {
    let pass = run(model, x, noise)?;
    Ok(ForwardOutput {
        recon: pass.recon,
        z: pass.z,
        aux: pass.vae.map(|v| VaeAux { mu: v.mu, logvar: v.logvar }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub recon: f64,
    pub kl: f64,
}

/// Squared-error objective (mean over all entries); the VAE adds
/// `beta * KL` with the closed-form diagonal-Gaussian divergence
/// `0.5 Σ (mu^2 + e^logvar - 1 - logvar)` averaged over the batch.
pub fn loss(model: &Model, x: &Matrix, out: &ForwardOutput) -> Result<LossParts, NnError> {
    if x.rows() != out.recon.rows() || x.cols() != out.recon.cols() {
        return Err(NnError::Shape("reconstruction/input shape mismatch".into()));
    }
    let n = x.data().len() as f64;
    let recon = x
        .data()
        .iter()
        .zip(out.recon.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let kl = match (&out.aux, model.variant) {
        (Some(aux), Variant::Vae) => {
            let batch = aux.mu.rows() as f64;
            let mut acc = 0.0;
            for (m, l) in aux.mu.data().iter().zip(aux.logvar.data()) {
                acc += 0.5 * (m * m + l.exp() - 1.0 - l);
            }
            acc / batch
        }
        _ => 0.0,
    };
    let total = match model.variant {
        Variant::Vae => recon + model.beta * kl,
        _ => recon,
    };
    Ok(LossParts { total, recon, kl })
}

/// Per-layer parameter gradients in declaration order.
pub struct Gradients {
    grads: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn slices(&self) -> Vec<&[f64]> {
        self.grads.iter().map(|g| g.as_slice()).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.grads.iter().all(|g| g.iter().all(|v| v.is_finite()))
    }
}

/// Loss and full-parameter gradient for one batch. `noise` must be supplied
/// for the VAE (frozen noise makes the map deterministic for checking).
pub fn loss_and_gradients(
    model: &Model,
    x: &Matrix,
    noise: Option<&Matrix>,
) -> Result<(LossParts, Gradients), NnError> {
    let pass = run(model, x, noise)?;
    let out = ForwardOutput {
        recon: pass.recon.clone(),
        z: pass.z.clone(),
        aux: pass.vae.as_ref().map(|v| VaeAux { mu: v.mu.clone(), logvar: v.logvar.clone() }),
    };
    let parts = loss(model, x, &out)?;

    let n_entries = x.data().len() as f64;
    let mut grad = Matrix::from_fn(x.rows(), x.cols(), |i, j| {
        2.0 * (pass.recon.get(i, j) - x.get(i, j)) / n_entries
    });

    let mut dec_grads: Vec<(Matrix, Vec<f64>)> = Vec::with_capacity(model.decoder.len());
    for (layer, (input, output)) in model.decoder.iter().zip(&pass.dec_io).rev() {
        let lg = layer.backward(input, output, &grad);
        grad = lg.input;
        dec_grads.push((lg.weight, lg.bias));
    }
    dec_grads.reverse();

    // Through the latent head.
    let mut grad = match model.variant {
        Variant::Ae => grad,
        Variant::Sae => spherical_normalize_backward(&grad, pass.sph.as_ref().unwrap()),
        Variant::Vae => {
            let cache = pass.vae.as_ref().unwrap();
            let batch = x.rows() as f64;
            let d = model.latent_dim;
            let beta = model.beta;
            let mut gh = Matrix::zeros(x.rows(), 2 * d);
            for i in 0..x.rows() {
                for j in 0..d {
                    let gz = grad.get(i, j);
                    let mu = cache.mu.get(i, j);
                    let lv = cache.logvar.get(i, j);
                    let eps = cache.noise.get(i, j);
                    let g_mu = gz + beta * mu / batch;
                    let mut g_lv =
                        gz * eps * (0.5 * lv).exp() * 0.5 + beta * 0.5 * (lv.exp() - 1.0) / batch;
                    // Clamped log-variance blocks the gradient.
                    if cache.raw_logvar.get(i, j).abs() > LOGVAR_CLAMP {
                        g_lv = 0.0;
                    }
                    gh.set(i, j, g_mu);
                    gh.set(i, d + j, g_lv);
                }
            }
            gh
        }
    };

    let mut enc_grads: Vec<(Matrix, Vec<f64>)> = Vec::with_capacity(model.encoder.len());
    for (layer, (input, output)) in model.encoder.iter().zip(&pass.enc_io).rev() {
        let lg = layer.backward(input, output, &grad);
        grad = lg.input;
        enc_grads.push((lg.weight, lg.bias));
    }
    enc_grads.reverse();

    let mut grads = Vec::with_capacity(2 * (enc_grads.len() + dec_grads.len()));
    for (w, b) in enc_grads.into_iter().chain(dec_grads) {
        grads.push(w.data().to_vec());
        grads.push(b);
    }
    Ok((parts, Gradients { grads }))
}

/// One optimizer step on a batch. Draws reparameterization noise from the
/// stream (VAE), verifies finiteness, and applies Adam.
pub fn backward_and_step(
    model: &mut Model,
    x: &Matrix,
    opt: &mut optim::AdamState,
    rng: &mut RngStream,
) -> Result<LossParts, NnError> {
    let noise = noise_for(model, x.rows(), rng);
    let (parts, grads) = loss_and_gradients(model, x, noise.as_ref())?;
    if !parts.total.is_finite() || !grads.all_finite() {
        return Err(NnError::Divergence { step: model.steps });
    }
    opt.step(&mut model.params_mut(), &grads.slices());
    model.steps += 1;
    Ok(parts)
}
