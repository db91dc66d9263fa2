//! Spherical normalization of latent rows: center to zero coordinate mean,
//! then scale to unit norm. The backward pass is the analytic derivative of
//! that map.
//!
//! Forward, per row: `c = z - mean(z) * 1`, `u = c / ||c||`.
//! Backward, per row: `grad_z = P (g - u (u^T g)) / ||c||` with
//! `P = I - (1/D) 1 1^T` — first project the incoming gradient onto the
//! tangent space of the sphere at `u`, then back through the centering.

use crate::matrix::{self, Matrix};

use super::NnError;

/// Per-row norm floor below which the latent is considered collapsed.
pub const DEGENERATE_NORM: f64 = 1e-10;

/// Values cached by the forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct SphericalCache {
    /// Normalized output rows.
    pub u: Matrix,
    /// Centered-row norms `||z - mean(z) 1||`.
    pub norms: Vec<f64>,
}

/// Center and normalize each row. Errors with the offending row index when a
/// row is numerically constant — a collapsed encoder must surface, not be
/// clamped away.
pub fn spherical_normalize_forward(z: &Matrix) -> Result<(Matrix, SphericalCache), NnError> {
    let mut u = z.clone();
    let mut norms = Vec::with_capacity(z.rows());
    for i in 0..u.rows() {
        let row = u.row_mut(i);
        let mean = matrix::mean(row);
        for v in row.iter_mut() {
            *v -= mean;
        }
        let norm = matrix::norm(row);
        if norm <= DEGENERATE_NORM {
            return Err(NnError::DegenerateLatent { row: i });
        }
        for v in row.iter_mut() {
            *v /= norm;
        }
        norms.push(norm);
    }
    let cache = SphericalCache { u: u.clone(), norms };
    Ok((u, cache))
}

/// Pull a gradient on the normalized output back to the raw latent.
///
/// Panics if the gradient shape does not match the cache (caller contract).
pub fn spherical_normalize_backward(grad_u: &Matrix, cache: &SphericalCache) -> Matrix {
    assert_eq!(
        (grad_u.rows(), grad_u.cols()),
        (cache.u.rows(), cache.u.cols()),
        "gradient/cache shape mismatch"
    );
    let mut out = Matrix::zeros(grad_u.rows(), grad_u.cols());
    for i in 0..grad_u.rows() {
        let g = grad_u.row(i);
        let u = cache.u.row(i);
        let dot: f64 = g.iter().zip(u).map(|(a, b)| a * b).sum();
        let row = out.row_mut(i);
        for ((o, &gv), &uv) in row.iter_mut().zip(g).zip(u) {
            *o = gv - uv * dot;
        }
        let mean = matrix::mean(row);
        let inv_norm = 1.0 / cache.norms[i];
        for o in row.iter_mut() {
            *o = (*o - mean) * inv_norm;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_examples() {
        // (1,2,3) -> (-1/sqrt2, 0, 1/sqrt2)
        let (u, _) = spherical_normalize_forward(&Matrix::from_vec(1, 3, vec![1.0, 2.0, 3.0]))
            .unwrap();
        let s = 1.0 / std::f64::consts::SQRT_2;
        assert!((u.get(0, 0) + s).abs() < 1e-15);
        assert!(u.get(0, 1).abs() < 1e-15);
        assert!((u.get(0, 2) - s).abs() < 1e-15);

        // (5,5,5,6): centered (-.25,-.25,-.25,.75), norm sqrt(0.75)
        let (u, cache) =
            spherical_normalize_forward(&Matrix::from_vec(1, 4, vec![5.0, 5.0, 5.0, 6.0]))
                .unwrap();
        let norm = 0.75f64.sqrt();
        assert!((cache.norms[0] - norm).abs() < 1e-15);
        assert!((u.get(0, 3) - 0.75 / norm).abs() < 1e-15);
    }

    #[test]
    fn forward_is_idempotent_on_valid_outputs() {
        let z = Matrix::from_vec(2, 4, vec![0.3, -1.2, 2.0, 0.7, 1.0, 1.0, -3.0, 0.5]);
        let (u, _) = spherical_normalize_forward(&z).unwrap();
        let (uu, _) = spherical_normalize_forward(&u).unwrap();
        for (a, b) in u.data().iter().zip(uu.data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_output_satisfies_constraints() {
        let z = Matrix::from_fn(8, 16, |i, j| ((i * 31 + j * 7) as f64).sin() * 3.0);
        let (u, _) = spherical_normalize_forward(&z).unwrap();
        for row in u.rows_iter() {
            assert!(matrix::mean(row).abs() < 1e-12);
            assert!((matrix::norm(row) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_row_is_degenerate() {
        let z = Matrix::from_vec(2, 3, vec![0.1, 0.9, 0.4, 2.0, 2.0, 2.0]);
        match spherical_normalize_forward(&z) {
            Err(NnError::DegenerateLatent { row }) => assert_eq!(row, 1),
            other => panic!("expected degenerate latent, got {other:?}"),
        }
    }

    #[test]
    fn backward_kills_radial_and_constant_gradients() {
        let z = Matrix::from_vec(1, 4, vec![0.4, -1.0, 2.2, 0.1]);
        let (u, cache) = spherical_normalize_forward(&z).unwrap();
        // gradient parallel to u
        let gz = spherical_normalize_backward(&u, &cache);
        assert!(gz.data().iter().all(|v| v.abs() < 1e-12));
        // all-ones gradient
        let ones = Matrix::from_vec(1, 4, vec![1.0; 4]);
        let gz = spherical_normalize_backward(&ones, &cache);
        assert!(gz.data().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn backward_matches_finite_differences() {
        // Directional derivative of sum(grad_u ⊙ forward(z)) along random
        // perturbations, checked per coordinate.
        let dim = 16;
        let stream = crate::rng::RngStream::with_stream(7, 0);
        let z = Matrix::from_fn(1, dim, |_, j| 2.0 * stream.u01_at(j as u64) - 1.0);
        let g = Matrix::from_fn(1, dim, |_, j| 2.0 * stream.u01_at((dim + j) as u64) - 1.0);
        let (_, cache) = spherical_normalize_forward(&z).unwrap();
        let analytic = spherical_normalize_backward(&g, &cache);

        let h = 1e-6;
        for j in 0..dim {
            let mut zp = z.clone();
            zp.set(0, j, z.get(0, j) + h);
            let mut zm = z.clone();
            zm.set(0, j, z.get(0, j) - h);
            let (up, _) = spherical_normalize_forward(&zp).unwrap();
            let (um, _) = spherical_normalize_forward(&zm).unwrap();
            let fp: f64 = up.data().iter().zip(g.data()).map(|(a, b)| a * b).sum();
            let fm: f64 = um.data().iter().zip(g.data()).map(|(a, b)| a * b).sum();
            let numeric = (fp - fm) / (2.0 * h);
            let a = analytic.get(0, j);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
            assert!(rel < 1e-6, "coord {j}: analytic {a} vs numeric {numeric}");
        }
    }

    #[test]
    fn backward_gradient_is_tangent_and_centered() {
        let z = Matrix::from_fn(4, 8, |i, j| ((i + 2 * j) as f64 * 0.37).cos());
        let (_, cache) = spherical_normalize_forward(&z).unwrap();
        let g = Matrix::from_fn(4, 8, |i, j| ((i * j) as f64 * 0.11).sin() + 0.2);
        let gz = spherical_normalize_backward(&g, &cache);
        for row in gz.rows_iter() {
            let sum: f64 = row.iter().sum();
            assert!(sum.abs() < 1e-10, "gradient escaped the centered subspace");
        }
    }
}
