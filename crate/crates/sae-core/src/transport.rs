//! Exact 2-Wasserstein distance between equal-size point clouds.
//!
//! Under the convention that the coupling's rows and columns each sum to one
//! (total mass n), the minimum over doubly stochastic matrices of
//! `sum omega_ij ||z_i - z'_j||^2` is attained at a permutation — extreme
//! points of the Birkhoff polytope — so the program reduces to the linear
//! assignment problem. It is solved exactly with the O(n^3) shortest
//! augmenting path method of Crouse (dual potentials + Dijkstra scans); on
//! the unit sphere the resulting W2 tends to `sqrt(2n)` as the dimension
//! grows, with vanishing spread across draws.

use crate::matrix;
use crate::rng::RngStream;
use crate::sampling::{self, PointCloud, Prior, SampleError};

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("point clouds disagree in shape: {0} vs {1} points, dims {2} vs {3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Matrix of squared Euclidean distances between two clouds.
#[derive(Clone, Debug)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

/// An optimal coupling collapsed to its permutation extreme point.
#[derive(Clone, Debug)]
pub struct TransportPlan {
    /// `assignment[i]` is the column matched to row i.
    pub assignment: Vec<usize>,
    /// Total squared-distance cost of the assignment (mass-n convention).
    pub objective: f64,
}

/// Squared-distance cost matrix; compensated summation keeps entries
/// accurate for dimensions in the hundreds.
pub fn cost_matrix(z: &PointCloud, zp: &PointCloud) -> Result<CostMatrix, TransportError> {
    if z.len() != zp.len() || z.dim() != zp.dim() {
        return Err(TransportError::ShapeMismatch(z.len(), zp.len(), z.dim(), zp.dim()));
    }
    let n = z.len();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        let a = z.points.row(i);
        for j in 0..n {
            entries.push(matrix::squared_distance(a, zp.points.row(j)));
        }
    }
    Ok(CostMatrix { n, entries })
}

/// Exact 2-Wasserstein distance and an optimal plan.
pub fn exact_w2(z: &PointCloud, zp: &PointCloud) -> Result<(f64, TransportPlan), TransportError> {
    let cost = cost_matrix(z, zp)?;
    let assignment = solve_assignment(cost.n, &cost.entries);
    let objective: f64 = assignment.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
    Ok((objective.max(0.0).sqrt(), TransportPlan { assignment, objective }))
}

const UNASSIGNED: usize = usize::MAX;

/// Minimum-cost perfect matching on a dense n×n cost matrix (row-major).
/// Shortest augmenting path with dual potentials; ties broken by the
/// deterministic scan order.
pub fn solve_assignment(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n*n");
    debug_assert!(cost.iter().all(|c| c.is_finite()), "costs must be finite");

    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut shortest = vec![f64::INFINITY; n];
    let mut path = vec![UNASSIGNED; n];
    let mut col4row = vec![UNASSIGNED; n];
    let mut row4col = vec![UNASSIGNED; n];
    let mut scanned_rows = vec![false; n];
    let mut scanned_cols = vec![false; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);

    for cur_row in 0..n {
        scanned_rows.fill(false);
        scanned_cols.fill(false);
        shortest.fill(f64::INFINITY);
        remaining.clear();
        // Reverse fill keeps the identity assignment for constant costs.
        remaining.extend((0..n).rev());

        let mut min_val = 0.0f64;
        let mut i = cur_row;
        let sink;
        loop {
            scanned_rows[i] = true;
            let mut lowest = f64::INFINITY;
            let mut index_pos = UNASSIGNED;
            for (pos, &j) in remaining.iter().enumerate() {
                let reduced = min_val + cost[i * n + j] - u[i] - v[j];
                if reduced < shortest[j] {
                    path[j] = i;
                    shortest[j] = reduced;
                }
                if shortest[j] < lowest
                    || (shortest[j] == lowest && row4col[j] == UNASSIGNED)
                {
                    lowest = shortest[j];
                    index_pos = pos;
                }
            }
            min_val = lowest;
            let j = remaining.swap_remove(index_pos);
            scanned_cols[j] = true;
            if row4col[j] == UNASSIGNED {
                sink = j;
                break;
            }
            i = row4col[j];
        }

        u[cur_row] += min_val;
        for r in 0..n {
            if scanned_rows[r] && r != cur_row {
                u[r] += min_val - shortest[col4row[r]];
            }
        }
        for c in 0..n {
            if scanned_cols[c] {
                v[c] -= min_val - shortest[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            std::mem::swap(&mut col4row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }
    col4row
}

/// One row of the convergence experiment.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub seed: u64,
    pub dim: usize,
    pub w2: f64,
    /// `w2 / sqrt(2n)`, the quantity that tends to the radius.
    pub ratio: f64,
}

/// Per-dimension aggregate over seeds.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceSummary {
    pub dim: usize,
    pub mean_ratio: f64,
    pub std_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub summary: Vec<ConvergenceSummary>,
}

/// Draw two clouds per (seed, dim), centerize + spherize both to the unit
/// sphere, and record `W2 / sqrt(2n)`. Rows are ordered by dimension, then
/// seed; the summary aggregates each dimension across seeds.
pub fn w2_convergence_experiment(
    prior_a: Prior,
    prior_b: Prior,
    n: usize,
    dims: &[usize],
    seeds: &[u64],
) -> Result<ConvergenceTable, TransportError> {
    if n == 0 || n > 512 {
        return Err(TransportError::Domain(format!(
            "experiment supports 1 ≤ n ≤ 512, got {n}"
        )));
    }
    if dims.is_empty() || seeds.is_empty() {
        return Err(TransportError::Domain("need at least one dimension and one seed".into()));
    }
    let sqrt_2n = (2.0 * n as f64).sqrt();
    let mut rows = Vec::with_capacity(dims.len() * seeds.len());
    let mut summary = Vec::with_capacity(dims.len());
    for (di, &dim) in dims.iter().enumerate() {
        let mut ratios = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            // Well-separated stream bases per (dimension, side).
            let base = (2 * di as u64) << 32;
            let a = prepared_cloud(prior_a, seed, base, n, dim)?;
            let b = prepared_cloud(prior_b, seed, base + (1u64 << 32), n, dim)?;
            let (w2, _) = exact_w2(&a, &b)?;
            let ratio = w2 / sqrt_2n;
            ratios.push(ratio);
            rows.push(ConvergenceRow { seed, dim, w2, ratio });
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / ratios.len() as f64;
        summary.push(ConvergenceSummary { dim, mean_ratio: mean, std_ratio: var.sqrt() });
    }
    Ok(ConvergenceTable { rows, summary })
}

fn prepared_cloud(
    prior: Prior,
    seed: u64,
    stream_base: u64,
    n: usize,
    dim: usize,
) -> Result<PointCloud, TransportError> {
    let rng = RngStream::with_stream(seed, stream_base);
    let cloud = sampling::draw(prior, &rng, n, dim)?;
    Ok(sampling::spherize(&sampling::centerize(&cloud), 1.0)?)
}
