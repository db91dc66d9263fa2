//! Full-parameter gradient verification against central finite differences.
//!
//! Builds a small model per variant (input 12, hidden 8, latent 6, batch 4),
//! computes the analytic gradient once, then perturbs every parameter by
//! ±1e-6 and compares. The VAE's reparameterization noise is frozen for the
//! check so the loss is a deterministic function of the parameters.

use crate::matrix::Matrix;
use crate::rng::RngStream;

use super::{
    forward_with_noise, loss, loss_and_gradients, streams, Activation, LayerSpec, Model, NnError,
    Variant,
};

/// Central-difference step.
const STEP: f64 = 1e-6;
/// Pass threshold on the max relative error.
const TOLERANCE: f64 = 1e-5;
/// Relative error floor: guards parameters whose true gradient is zero,
/// where the comparison would otherwise divide rounding noise by itself.
const SCALE_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct LayerCheck {
    pub name: String,
    pub max_rel_err: f64,
}

#[derive(Clone, Debug)]
pub struct GradcheckReport {
    pub variant: Variant,
    pub layers: Vec<LayerCheck>,
    pub max_rel_err: f64,
    pub passed: bool,
}

/// Names of the parameter groups in declaration order.
fn group_names(model: &Model) -> Vec<String> {
    let mut names = Vec::new();
    for (side, layers) in [("encoder", &model.encoder), ("decoder", &model.decoder)] {
        for (i, _) in layers.iter().enumerate() {
            names.push(format!("{side}.{i}.weight"));
            names.push(format!("{side}.{i}.bias"));
        }
    }
    names
}

pub fn gradcheck(variant: Variant, seed: u64) -> Result<GradcheckReport, NnError> {
    let latent = 6;
    let head = match variant {
        Variant::Vae => 2 * latent,
        _ => latent,
    };
    let encoder = [
        LayerSpec::new(12, 8, Activation::Tanh),
        LayerSpec::new(8, head, Activation::Identity),
    ];
    let decoder = [
        LayerSpec::new(latent, 8, Activation::Tanh),
        LayerSpec::new(8, 12, Activation::Sigmoid),
    ];
    let mut model = Model::new(variant, &encoder, &decoder, latent, 0.5, seed)?;

    let input_stream = RngStream::with_stream(seed, streams::GRADCHECK_INPUT);
    let x = Matrix::from_fn(4, 12, |i, j| input_stream.u01_at((i * 12 + j) as u64));
    let noise = match variant {
        Variant::Vae => {
            let mut s = RngStream::with_stream(seed, streams::GRADCHECK_NOISE);
            Some(Matrix::from_fn(4, latent, |_, _| s.next_normal()))
        }
        _ => None,
    };

    let (_, analytic) = loss_and_gradients(&model, &x, noise.as_ref())?;
    let analytic: Vec<Vec<f64>> = analytic.slices().iter().map(|s| s.to_vec()).collect();
    let names = group_names(&model);

    let mut layers: Vec<LayerCheck> =
        names.iter().map(|n| LayerCheck { name: n.clone(), max_rel_err: 0.0 }).collect();

    let group_count = analytic.len();
    for group in 0..group_count {
        for idx in 0..analytic[group].len() {
            let original = {
                let mut params = model.params_mut();
                let p = &mut params[group][idx];
                let orig = *p;
                *p = orig + STEP;
                orig
            };
            let plus = eval_loss(&model, &x, noise.as_ref())?;
            {
                let mut params = model.params_mut();
                params[group][idx] = original - STEP;
            }
            let minus = eval_loss(&model, &x, noise.as_ref())?;
            {
                let mut params = model.params_mut();
                params[group][idx] = original;
            }
            let numeric = (plus - minus) / (2.0 * STEP);
            let a = analytic[group][idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(SCALE_FLOOR);
            if rel > layers[group].max_rel_err {
                layers[group].max_rel_err = rel;
            }
        }
    }

    let max_rel_err = layers.iter().map(|l| l.max_rel_err).fold(0.0, f64::max);
    Ok(GradcheckReport { variant, layers, max_rel_err, passed: max_rel_err < TOLERANCE })
}

fn eval_loss(model: &Model, x: &Matrix, noise: Option<&Matrix>) -> Result<f64, NnError> {
    let out = forward_with_noise(model, x, noise)?;
    Ok(loss(model, x, &out)?.total)
}
