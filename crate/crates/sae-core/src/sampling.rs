//! Seeded sampling from priors, centerization/spherization transforms, and
//! Monte-Carlo diagnostics against the closed-form chord law.
//!
//! Sampling algorithms are pinned so streams reproduce across
//! implementations: Normal by Box–Muller on uniform pairs (second variate of
//! the final pair discarded for odd dimensions), Uniform by the affine map of
//! a unit uniform onto (-1,1), Poisson by inversion with sequential search
//! (one uniform per variate, valid for lambda ≤ 30), Chi-squared(k) as the
//! sum of k squared Box–Muller normals. Row `i` of a draw consumes the
//! substream at `stream_id + i`, so row-parallel generation reproduces the
//! sequential result.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::geometry::{self, GeomError, SphereSpec};
use crate::matrix::{self, Matrix};
use crate::quad;
use crate::rng::RngStream;

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("unsupported prior parameter: {0}")]
    UnsupportedParameter(String),
    #[error("{0}")]
    Domain(String),
    #[error("row {row} has near-zero norm; cannot project to the sphere")]
    DegenerateRow { row: usize },
    #[error("cloud file, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A coordinate-wise prior for latent draws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prior {
    Normal,
    /// Uniform on (-1, 1), symmetric about the origin.
    Uniform,
    Poisson { lambda: f64 },
    ChiSquared { k: u32 },
}

/// Poisson inversion by sequential search loses accuracy past this rate.
pub const POISSON_LAMBDA_MAX: f64 = 30.0;

impl Prior {
    pub fn validate(&self) -> Result<(), SampleError> {
        match *self {
            Prior::Poisson { lambda } => {
                if !(lambda > 0.0) || !lambda.is_finite() {
                    Err(SampleError::UnsupportedParameter(format!(
                        "poisson lambda must be positive, got {lambda}"
                    )))
                } else if lambda > POISSON_LAMBDA_MAX {
                    Err(SampleError::UnsupportedParameter(format!(
                        "poisson lambda {lambda} exceeds inversion bound {POISSON_LAMBDA_MAX}"
                    )))
                } else {
                    Ok(())
                }
            }
            Prior::ChiSquared { k } => {
                if k == 0 {
                    Err(SampleError::UnsupportedParameter(
                        "chi-squared k must be a positive integer".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            Prior::Normal | Prior::Uniform => Ok(()),
        }
    }

    /// Coordinate expectation.
    pub fn mean(&self) -> f64 {
        match *self {
            Prior::Normal | Prior::Uniform => 0.0,
            Prior::Poisson { lambda } => lambda,
            Prior::ChiSquared { k } => k as f64,
        }
    }

    /// Coordinate standard deviation.
    pub fn std(&self) -> f64 {
        match *self {
            Prior::Normal => 1.0,
            Prior::Uniform => 1.0 / 3.0f64.sqrt(),
            Prior::Poisson { lambda } => lambda.sqrt(),
            Prior::ChiSquared { k } => (2.0 * k as f64).sqrt(),
        }
    }

    /// Coordinate `j` of a row, reading the row's stream at fixed counter
    /// positions so the layout is reproducible.
    fn coordinate(&self, stream: &RngStream, j: usize) -> f64 {
        let j = j as u64;
        match *self {
            Prior::Normal => {
                let (a, b) = stream.normal_pair_at(j / 2);
                if j % 2 == 0 {
                    a
                } else {
                    b
                }
            }
            Prior::Uniform => 2.0 * stream.u01_at(j) - 1.0,
            Prior::Poisson { lambda } => poisson_inversion(lambda, stream.u01_at(j)),
            Prior::ChiSquared { k } => {
                let pairs_per_coord = (k as u64).div_ceil(2);
                let base = j * pairs_per_coord;
                let mut acc = 0.0;
                let mut remaining = k;
                let mut pair = 0;
                while remaining > 0 {
                    let (a, b) = stream.normal_pair_at(base + pair);
                    acc += a * a;
                    if remaining > 1 {
                        acc += b * b;
                    }
                    remaining = remaining.saturating_sub(2);
                    pair += 1;
                }
                acc
            }
        }
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Prior::Normal => write!(f, "normal"),
            Prior::Uniform => write!(f, "uniform"),
            Prior::Poisson { lambda } => write!(f, "poisson:{lambda}"),
            Prior::ChiSquared { k } => write!(f, "chisq:{k}"),
        }
    }
}

impl FromStr for Prior {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => (k, Some(p)),
            None => (s, None),
        };
        match (kind, param) {
            ("normal", None) => Ok(Prior::Normal),
            ("uniform", None) => Ok(Prior::Uniform),
            ("poisson", p) => {
                let lambda = p.unwrap_or("4").parse::<f64>().map_err(|e| e.to_string())?;
                Ok(Prior::Poisson { lambda })
            }
            ("chisq", p) => {
                let k = p.unwrap_or("1").parse::<u32>().map_err(|e| e.to_string())?;
                Ok(Prior::ChiSquared { k })
            }
            _ => Err(format!("unknown prior '{s}' (normal|uniform|poisson:L|chisq:K)")),
        }
    }
}

fn poisson_inversion(lambda: f64, u: f64) -> f64 {
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    // The cap is unreachable for lambda ≤ 30 with u < 1 - 2^-53; it guards
    // the loop if the running term underflows before the cdf passes u.
    while u > cdf && k < 4096 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if p == 0.0 {
            break;
        }
    }
    k as f64
}

/// Provenance of a point cloud.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudMeta {
    pub prior: Prior,
    pub centered: bool,
    pub spherized: bool,
    pub seed: u64,
}

/// A set of latent samples, one per row.
#[derive(Clone, Debug)]
pub struct PointCloud {
    pub points: Matrix,
    pub sphere: Option<SphereSpec>,
    pub meta: CloudMeta,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }
}

/// Draw `n` rows of dimension `dim` from the prior. Row `i` reads the
/// substream at `stream_id + i`.
pub fn draw(prior: Prior, rng: &RngStream, n: usize, dim: usize) -> Result<PointCloud, SampleError> {
    prior.validate()?;
    if n == 0 || dim == 0 {
        return Err(SampleError::Domain(format!(
            "draw needs n ≥ 1 and dim ≥ 1, got n={n}, dim={dim}"
        )));
    }
    let mut points = Matrix::zeros(n, dim);
    for i in 0..n {
        let row_stream = rng.substream(i as u64);
        let row = points.row_mut(i);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = prior.coordinate(&row_stream, j);
        }
    }
    Ok(PointCloud {
        points,
        sphere: None,
        meta: CloudMeta { prior, centered: false, spherized: false, seed: rng.seed() },
    })
}

/// Subtract each row's coordinate mean, placing rows in the hyperplane
/// `z^T 1 = 0`. Idempotent. Clears any sphere association since norms change.
pub fn centerize(cloud: &PointCloud) -> PointCloud {
    let mut points = cloud.points.clone();
    for i in 0..points.rows() {
        let row = points.row_mut(i);
        let mean = matrix::mean(row);
        for v in row.iter_mut() {
            *v -= mean;
        }
    }
    PointCloud {
        points,
        sphere: None,
        meta: CloudMeta { centered: true, spherized: false, ..cloud.meta },
    }
}

/// Scale every row to Euclidean norm `radius`. Centering is preserved:
/// scaling a zero-mean row keeps its mean at zero.
pub fn spherize(cloud: &PointCloud, radius: f64) -> Result<PointCloud, SampleError> {
    let dim = cloud.dim();
    let sphere = SphereSpec::new(dim, radius)?;
    let floor = 1e-12 * (dim as f64).sqrt();
    let mut points = cloud.points.clone();
    for i in 0..points.rows() {
        let row = points.row_mut(i);
        let norm = matrix::norm(row);
        if norm <= floor {
            return Err(SampleError::DegenerateRow { row: i });
        }
        let scale = radius / norm;
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    Ok(PointCloud {
        points,
        sphere: Some(sphere),
        meta: CloudMeta { spherized: true, ..cloud.meta },
    })
}

/// The sphere a cloud's rows actually lie on. Centered rows live in the
/// hyperplane `z^T 1 = 0`, so their support sphere has one lower formula
/// dimension than the ambient space.
pub fn support_sphere(cloud: &PointCloud) -> Result<SphereSpec, SampleError> {
    let sphere = cloud.sphere.ok_or_else(|| {
        SampleError::Domain("cloud is not spherized; no support sphere".into())
    })?;
    if cloud.meta.centered {
        SphereSpec::new(sphere.ambient_dim() - 1, sphere.radius()).map_err(|_| {
            SampleError::Domain(
                "centered cloud in ambient dimension 2 degenerates to a point pair".into(),
            )
        })
    } else {
        Ok(sphere)
    }
}

/// Empirical chord statistics of random point pairs.
#[derive(Clone, Copy, Debug)]
pub struct McChordStats {
    pub mean: f64,
    pub std: f64,
    /// Kolmogorov–Smirnov statistic against the support sphere's chord law.
    pub ks: f64,
}

/// Sample `pair_count` random index pairs (i ≠ j) and compare their chord
/// lengths against the closed-form law of the cloud's support sphere.
pub fn mc_chord_stats(
    cloud: &PointCloud,
    pair_count: usize,
    rng: &RngStream,
) -> Result<McChordStats, SampleError> {
    if cloud.len() < 2 {
        return Err(SampleError::Domain("need at least 2 points for chord pairs".into()));
    }
    if pair_count < 1000 {
        return Err(SampleError::Domain(format!(
            "pair_count must be at least 1000, got {pair_count}"
        )));
    }
    let support = support_sphere(cloud)?;
    let n = cloud.len();
    let mut stream = *rng;
    let mut distances = Vec::with_capacity(pair_count);
    for _ in 0..pair_count {
        let i = stream.next_index(n);
        let j0 = stream.next_index(n - 1);
        let j = if j0 >= i { j0 + 1 } else { j0 };
        let d2 = matrix::squared_distance(cloud.points.row(i), cloud.points.row(j));
        distances.push(d2.sqrt());
    }

    let count = distances.len() as f64;
    let mean = distances.iter().sum::<f64>() / count;
    let var = distances.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / count;
    let ks = ks_against_chord_law(&mut distances, &support);
    Ok(McChordStats { mean, std: var.sqrt(), ks })
}

/// KS statistic of the (sorted in place) sample against the chord law.
fn ks_against_chord_law(sample: &mut [f64], sphere: &SphereSpec) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let density = |xi: f64| {
        if xi <= 0.0 || xi >= sphere.diameter() {
            0.0
        } else {
            geometry::chord_log_density(sphere, xi).map(f64::exp).unwrap_or(0.0)
        }
    };
    // Cumulative mass at each sorted point: adaptive head panel, then one
    // Gauss–Kronrod panel per gap (gaps are tiny, the density is smooth).
    let mut ks = 0.0f64;
    let mut cdf = quad::integrate(&density, 0.0, sample[0].min(sphere.diameter()), 1e-10).0;
    for (idx, window) in sample.windows(2).enumerate() {
        let i = idx + 1;
        ks = ks.max(i as f64 / n - cdf).max(cdf - (i as f64 - 1.0) / n);
        if window[1] > window[0] {
            cdf += quad::gk15(&density, window[0], window[1].min(sphere.diameter())).0;
        }
    }
    ks = ks.max(1.0 - cdf).max(cdf - (n - 1.0) / n);
    ks
}

/// Standardized row means against the standard normal law (the central limit
/// diagnostic). Returns the KS statistic.
pub fn clt_diagnostic(
    prior: Prior,
    dim: usize,
    n: usize,
    rng: &RngStream,
) -> Result<f64, SampleError> {
    if dim < 64 {
        return Err(SampleError::Domain(format!("clt diagnostic needs dim ≥ 64, got {dim}")));
    }
    if n < 1000 {
        return Err(SampleError::Domain(format!("clt diagnostic needs n ≥ 1000, got {n}")));
    }
    let cloud = draw(prior, rng, n, dim)?;
    let (expect, std) = (prior.mean(), prior.std());
    let scale = (dim as f64).sqrt() / std;
    let mut t: Vec<f64> = cloud
        .points
        .rows_iter()
        .map(|row| scale * (matrix::mean(row) - expect))
        .collect();
    t.sort_by(f64::total_cmp);
    let n = t.len() as f64;
    let mut ks = 0.0f64;
    for (idx, &x) in t.iter().enumerate() {
        let i = (idx + 1) as f64;
        let f = standard_normal_cdf(x);
        ks = ks.max(i / n - f).max(f - (i - 1.0) / n);
    }
    Ok(ks)
}

/// Φ(x) via a rational erfc approximation (absolute error ≤ 1.2e-7, far
/// below the KS tolerances it feeds).
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87
                                    + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let ans = t * poly.exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Write the cloud interchange CSV: one header line
/// `dim=D,prior=...,centered=...,spherized=...,seed=...` followed by one row
/// of decimal coordinates per point.
pub fn write_cloud_csv<W: Write>(cloud: &PointCloud, out: &mut W) -> Result<(), SampleError> {
    writeln!(
        out,
        "dim={},prior={},centered={},spherized={},seed={}",
        cloud.dim(),
        cloud.meta.prior,
        cloud.meta.centered,
        cloud.meta.spherized,
        cloud.meta.seed
    )?;
    for row in cloud.points.rows_iter() {
        let mut first = true;
        for v in row {
            if !first {
                write!(out, ",")?;
            }
            write!(out, "{v}")?;
            first = false;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Read a cloud written by [`write_cloud_csv`]. For spherized clouds the
/// radius is recovered from the first row's norm.
pub fn read_cloud_csv<R: BufRead>(input: R) -> Result<PointCloud, SampleError> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| SampleError::Parse { line: 1, message: "empty file".into() })?;
    let header = header?;
    let mut dim = None;
    let mut prior = None;
    let mut centered = None;
    let mut spherized = None;
    let mut seed = None;
    for field in header.split(',') {
        let (key, value) = field.split_once('=').ok_or_else(|| SampleError::Parse {
            line: 1,
            message: format!("header field '{field}' is not key=value"),
        })?;
        let bad = |e: String| SampleError::Parse { line: 1, message: e };
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "prior" => prior = Some(Prior::from_str(value).map_err(bad)?),
            "centered" => centered = Some(value.parse::<bool>().map_err(|e| bad(e.to_string()))?),
            "spherized" => {
                spherized = Some(value.parse::<bool>().map_err(|e| bad(e.to_string()))?)
            }
            "seed" => seed = Some(value.parse::<u64>().map_err(|e| bad(e.to_string()))?),
            other => {
                return Err(SampleError::Parse {
                    line: 1,
                    message: format!("unknown header key '{other}'"),
                })
            }
        }
    }
    let missing = |what: &str| SampleError::Parse { line: 1, message: format!("missing {what}") };
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let meta = CloudMeta {
        prior: prior.ok_or_else(|| missing("prior"))?,
        centered: centered.ok_or_else(|| missing("centered"))?,
        spherized: spherized.ok_or_else(|| missing("spherized"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
    };

    let mut data = Vec::new();
    let mut rows = 0usize;
    for (line_idx, line) in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split(',') {
            let v = tok.trim().parse::<f64>().map_err(|e| SampleError::Parse {
                line: line_idx + 1,
                message: format!("bad coordinate '{tok}': {e}"),
            })?;
            data.push(v);
        }
        if data.len() - before != dim {
            return Err(SampleError::Parse {
                line: line_idx + 1,
                message: format!("expected {dim} coordinates, got {}", data.len() - before),
            });
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(SampleError::Parse { line: 2, message: "no data rows".into() });
    }
    let points = Matrix::from_vec(rows, dim, data);
    let sphere = if meta.spherized {
        Some(SphereSpec::new(dim, matrix::norm(points.row(0)))?)
    } else {
        None
    };
    Ok(PointCloud { points, sphere, meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(seed: u64, id: u64) -> RngStream {
        RngStream::with_stream(seed, id)
    }

    #[test]
    fn normal_draw_moments() {
        let cloud = draw(Prior::Normal, &stream(1, 0), 100_000, 1).unwrap();
        let vals = cloud.points.data();
        let mean = matrix::mean(vals);
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((0.98..1.02).contains(&var), "var {var}");
    }

    #[test]
    fn poisson_draw_moments() {
        let cloud = draw(Prior::Poisson { lambda: 4.0 }, &stream(1, 0), 100_000, 1).unwrap();
        let mean = matrix::mean(cloud.points.data());
        assert!((3.96..4.04).contains(&mean), "mean {mean}");
    }

    #[test]
    fn uniform_draw_is_strictly_inside() {
        let cloud = draw(Prior::Uniform, &stream(99, 5), 2000, 8).unwrap();
        assert!(cloud.points.data().iter().all(|&v| v > -1.0 && v < 1.0));
    }

    #[test]
    fn chi_squared_draw_moments() {
        let cloud = draw(Prior::ChiSquared { k: 3 }, &stream(2, 0), 100_000, 1).unwrap();
        let mean = matrix::mean(cloud.points.data());
        // 5 sigma of the mean estimator: std = sqrt(6)
        assert!((mean - 3.0).abs() < 5.0 * 6.0f64.sqrt() / (100_000f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn poisson_lambda_bound_enforced() {
        assert!(matches!(
            draw(Prior::Poisson { lambda: 31.0 }, &stream(0, 0), 10, 2),
            Err(SampleError::UnsupportedParameter(_))
        ));
    }

    #[test]
    fn draws_are_deterministic() {
        let a = draw(Prior::ChiSquared { k: 2 }, &stream(7, 3), 50, 9).unwrap();
        let b = draw(Prior::ChiSquared { k: 2 }, &stream(7, 3), 50, 9).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn centerize_examples() {
        let cloud = PointCloud {
            points: Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 5.0, 5.0, 5.0]),
            sphere: None,
            meta: CloudMeta { prior: Prior::Normal, centered: false, spherized: false, seed: 0 },
        };
        let c = centerize(&cloud);
        assert_eq!(c.points.row(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(c.points.row(1), &[0.0, 0.0, 0.0]);
        assert!(c.meta.centered);
        // idempotent
        let cc = centerize(&c);
        assert_eq!(cc.points, c.points);
    }

    #[test]
    fn spherize_examples() {
        let cloud = PointCloud {
            points: Matrix::from_vec(1, 2, vec![3.0, 4.0]),
            sphere: None,
            meta: CloudMeta { prior: Prior::Normal, centered: false, spherized: false, seed: 0 },
        };
        let s = spherize(&cloud, 1.0).unwrap();
        assert!((s.points.row(0)[0] - 0.6).abs() < 1e-15);
        assert!((s.points.row(0)[1] - 0.8).abs() < 1e-15);
        // unit rows unchanged
        let again = spherize(&s, 1.0).unwrap();
        assert!((again.points.row(0)[0] - 0.6).abs() < 1e-15);
        // (-1, 0, 1) -> (-1/sqrt2, 0, 1/sqrt2)
        let cloud3 = PointCloud {
            points: Matrix::from_vec(1, 3, vec![-1.0, 0.0, 1.0]),
            sphere: None,
            meta: cloud.meta,
        };
        let s3 = spherize(&cloud3, 1.0).unwrap();
        let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
        assert!((s3.points.row(0)[0] + inv_sqrt2).abs() < 1e-15);
        assert!((s3.points.row(0)[2] - inv_sqrt2).abs() < 1e-15);
    }

    #[test]
    fn spherize_rejects_zero_rows() {
        let cloud = PointCloud {
            points: Matrix::from_vec(2, 3, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]),
            sphere: None,
            meta: CloudMeta { prior: Prior::Normal, centered: false, spherized: false, seed: 0 },
        };
        match spherize(&cloud, 1.0) {
            Err(SampleError::DegenerateRow { row }) => assert_eq!(row, 1),
            other => panic!("expected degenerate row, got {other:?}"),
        }
    }

    #[test]
    fn center_then_spherize_satisfies_both_constraints() {
        let cloud = draw(Prior::Poisson { lambda: 4.0 }, &stream(11, 0), 200, 16).unwrap();
        let z = spherize(&centerize(&cloud), 1.0).unwrap();
        for row in z.points.rows_iter() {
            assert!(matrix::mean(row).abs() < 1e-9);
            assert!((matrix::norm(row) - 1.0).abs() < 1e-9);
        }
        assert!(z.meta.centered && z.meta.spherized);
    }

    #[test]
    fn mc_chord_stats_matches_s2_law() {
        // Spherized (not centered) normal cloud in R^3 is uniform on S^2:
        // chord mean 4/3.
        let cloud = draw(Prior::Normal, &stream(5, 0), 4096, 3).unwrap();
        let z = spherize(&cloud, 1.0).unwrap();
        let stats = mc_chord_stats(&z, 100_000, &stream(5, 1 << 32)).unwrap();
        assert!((stats.mean - 4.0 / 3.0).abs() < 0.01, "mean {}", stats.mean);
    }

    #[test]
    fn mc_chord_stats_centered_is_one_dimension_down() {
        // Centered+spherized normal cloud in R^3 is uniform on a circle:
        // chord mean 4/pi, and the KS test against the circle law agrees.
        let cloud = draw(Prior::Normal, &stream(6, 0), 4096, 3).unwrap();
        let z = spherize(&centerize(&cloud), 1.0).unwrap();
        let stats = mc_chord_stats(&z, 100_000, &stream(6, 1 << 32)).unwrap();
        assert!((stats.mean - 4.0 / std::f64::consts::PI).abs() < 0.01, "mean {}", stats.mean);
        assert!(stats.ks < 0.02, "ks {}", stats.ks);
    }

    #[test]
    fn mc_chord_stats_paper_value_at_512() {
        let cloud = draw(Prior::Normal, &stream(20, 0), 4096, 512).unwrap();
        let z = spherize(&centerize(&cloud), 1.0).unwrap();
        let stats = mc_chord_stats(&z, 100_000, &stream(20, 1 << 32)).unwrap();
        assert!((stats.mean - 1.4139).abs() < 0.001, "mean {}", stats.mean);
    }

    #[test]
    fn uncentered_poisson_cloud_is_biased_acute() {
        // All points in the positive orthant: pairwise angles acute, so the
        // mean chord is far below the uniform value sqrt(2).
        let cloud = draw(Prior::Poisson { lambda: 4.0 }, &stream(8, 0), 1024, 512).unwrap();
        let z = spherize(&cloud, 1.0).unwrap();
        let stats = mc_chord_stats(&z, 50_000, &stream(8, 1 << 32)).unwrap();
        assert!(stats.mean < 1.0, "mean {}", stats.mean);
    }

    #[test]
    fn mc_chord_stats_preconditions() {
        let cloud = draw(Prior::Normal, &stream(5, 0), 16, 4).unwrap();
        // not spherized
        assert!(mc_chord_stats(&cloud, 2000, &stream(5, 1)).is_err());
        let z = spherize(&cloud, 1.0).unwrap();
        assert!(mc_chord_stats(&z, 10, &stream(5, 1)).is_err());
    }

    #[test]
    fn clt_diagnostic_normal_is_exact() {
        let ks = clt_diagnostic(Prior::Normal, 64, 5000, &stream(31, 0)).unwrap();
        assert!(ks < 0.02, "ks {ks}");
    }

    #[test]
    fn clt_diagnostic_poisson() {
        let ks = clt_diagnostic(Prior::Poisson { lambda: 4.0 }, 512, 5000, &stream(31, 1 << 32))
            .unwrap();
        assert!(ks < 0.03, "ks {ks}");
    }

    #[test]
    fn clt_diagnostic_chi_squared() {
        let ks = clt_diagnostic(Prior::ChiSquared { k: 1 }, 512, 5000, &stream(31, 2 << 32))
            .unwrap();
        assert!(ks < 0.04, "ks {ks}");
    }

    #[test]
    fn cloud_csv_round_trip() {
        let cloud = draw(Prior::Poisson { lambda: 4.0 }, &stream(13, 0), 20, 6).unwrap();
        let z = spherize(&centerize(&cloud), 1.0).unwrap();
        let mut bytes = Vec::new();
        write_cloud_csv(&z, &mut bytes).unwrap();
        let back = read_cloud_csv(&bytes[..]).unwrap();
        assert_eq!(back.points, z.points);
        assert_eq!(back.meta, z.meta);
        assert!(back.sphere.is_some());
    }

    #[test]
    fn cloud_csv_rejects_garbage() {
        let text = "dim=3,prior=normal,centered=false,spherized=false,seed=1\n1.0,2.0\n";
        match read_cloud_csv(text.as_bytes()) {
            Err(SampleError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((standard_normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((standard_normal_cdf(1.959_964) - 0.975).abs() < 1e-6);
        assert!((standard_normal_cdf(-1.0) - 0.158_655_25).abs() < 1e-6);
    }
}
