//! Reconstruction and sample-set metrics: MSE and sliced Wasserstein.

use serde::Serialize;

use crate::matrix::{self, Matrix};
use crate::rng::RngStream;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("shape mismatch: {0}×{1} vs {2}×{3}")]
    Shape(usize, usize, usize, usize),
    #[error("{0}")]
    Domain(String),
}

/// Default number of random projection directions.
pub const DEFAULT_PROJECTIONS: usize = 128;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MetricReport {
    pub mse: f64,
    pub swd: f64,
    pub n_projections: usize,
    pub seed: u64,
}

/// Mean over all entries of the squared difference.
pub fn mse(x: &Matrix, y: &Matrix) -> Result<f64, MetricError> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(MetricError::Shape(x.rows(), x.cols(), y.rows(), y.cols()));
    }
    let n = x.data().len() as f64;
    Ok(x.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n)
}

/// Sliced 2-Wasserstein distance between two same-size point sets.
///
/// Averages, over `n_proj` random unit directions, the exact 1-D squared
/// Wasserstein distance between the projected samples (sorted order
/// statistics), and returns the square root. Direction `p` is drawn from the
/// substream at `stream_id + p`, so projections are reproducible and may be
/// evaluated in any order.
pub fn sliced_w2(
    x: &Matrix,
    y: &Matrix,
    n_proj: usize,
    rng: &RngStream,
) -> Result<f64, MetricError> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(MetricError::Shape(x.rows(), x.cols(), y.rows(), y.cols()));
    }
    if n_proj == 0 {
        return Err(MetricError::Domain("need at least one projection".into()));
    }
    if x.rows() == 0 {
        return Err(MetricError::Domain("point sets are empty".into()));
    }
    let dim = x.cols();
    let n = x.rows();
    let mut total = 0.0;
    let mut direction = vec![0.0; dim];
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    for p in 0..n_proj {
        let stream = rng.substream(p as u64);
        for (j, d) in direction.iter_mut().enumerate() {
            let (a, b) = stream.normal_pair_at((j / 2) as u64);
            *d = if j % 2 == 0 { a } else { b };
        }
        let norm = matrix::norm(&direction);
        if norm < 1e-12 {
            // astronomically unlikely; fall back to the first axis
            direction.iter_mut().for_each(|d| *d = 0.0);
            direction[0] = 1.0;
        } else {
            direction.iter_mut().for_each(|d| *d /= norm);
        }
        for (i, slot) in px.iter_mut().enumerate() {
            *slot = x.row(i).iter().zip(&direction).map(|(a, b)| a * b).sum();
        }
        for (i, slot) in py.iter_mut().enumerate() {
            *slot = y.row(i).iter().zip(&direction).map(|(a, b)| a * b).sum();
        }
        px.sort_by(f64::total_cmp);
        py.sort_by(f64::total_cmp);
        let w2_sq: f64 =
            px.iter().zip(&py).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n as f64;
        total += w2_sq;
    }
    Ok((total / n_proj as f64).sqrt())
}
