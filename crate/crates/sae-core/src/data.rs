//! Dataset ingestion: MNIST IDX files and a seeded synthetic manifold.

use std::fs;
use std::path::Path;

use crate::matrix::Matrix;
use crate::rng::RngStream;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {message} (byte offset {offset})")]
    Parse { path: String, offset: usize, message: String },
    #[error("synthetic manifold needs 1 ≤ k < d_x, got k={k}, d_x={d_x}")]
    IntrinsicDim { k: usize, d_x: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataSource {
    MnistTrain,
    MnistTest,
    Synthetic,
}

impl DataSource {
    pub fn name(self) -> &'static str {
        match self {
            DataSource::MnistTrain => "mnist-train",
            DataSource::MnistTest => "mnist-test",
            DataSource::Synthetic => "synthetic",
        }
    }
}

/// Flattened images in [0,1], one sample per row.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub images: Matrix,
    pub labels: Option<Vec<u8>>,
    pub source: DataSource,
    /// Latent dimension of the generating manifold (synthetic data only).
    pub intrinsic_dim: Option<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.images.rows() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.images.cols()
    }

    /// Keep only the first `n` samples.
    pub fn truncate(&mut self, n: usize) {
        if n >= self.len() {
            return;
        }
        let indices: Vec<usize> = (0..n).collect();
        self.images = self.images.take_rows(&indices);
        if let Some(labels) = &mut self.labels {
            labels.truncate(n);
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
    path: &'a str,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: String) -> DataError {
        DataError::Parse { path: self.path.to_string(), offset: self.offset, message }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DataError> {
        if self.bytes.len() < self.offset + n {
            return Err(self.err(format!(
                "truncated: need {n} bytes, {} remain",
                self.bytes.len() - self.offset
            )));
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn read_u32_be(&mut self) -> Result<u32, DataError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Parse an IDX image file: magic 0x00000803, then count/rows/cols
/// (big-endian u32), then unsigned-byte pixels scaled into [0,1].
/// Returns (flattened images, rows, cols).
pub fn parse_idx_images(bytes: &[u8], path: &str) -> Result<(Matrix, usize, usize), DataError> {
    let mut cur = Cursor { bytes, offset: 0, path };
    let magic = cur.read_u32_be()?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(DataError::Parse {
            path: path.to_string(),
            offset: 0,
            message: format!("bad image magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"),
        });
    }
    let count = cur.read_u32_be()? as usize;
    let rows = cur.read_u32_be()? as usize;
    let cols = cur.read_u32_be()? as usize;
    let payload = cur.take(count * rows * cols)?;
    if cur.offset != bytes.len() {
        return Err(DataError::Parse {
            path: path.to_string(),
            offset: cur.offset,
            message: format!("{} trailing bytes after pixel payload", bytes.len() - cur.offset),
        });
    }
    let data: Vec<f64> = payload.iter().map(|&b| b as f64 / 255.0).collect();
    Ok((Matrix::from_vec(count, rows * cols, data), rows, cols))
}

/// Parse an IDX label file: magic 0x00000801, count, then one byte per label.
pub fn parse_idx_labels(bytes: &[u8], path: &str) -> Result<Vec<u8>, DataError> {
    let mut cur = Cursor { bytes, offset: 0, path };
    let magic = cur.read_u32_be()?;
    if magic != IDX_LABELS_MAGIC {
        return Err(DataError::Parse {
            path: path.to_string(),
            offset: 0,
            message: format!("bad label magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"),
        });
    }
    let count = cur.read_u32_be()? as usize;
    let payload_offset = cur.offset;
    let payload = cur.take(count)?;
    if cur.offset != bytes.len() {
        return Err(DataError::Parse {
            path: path.to_string(),
            offset: cur.offset,
            message: format!("{} trailing bytes after labels", bytes.len() - cur.offset),
        });
    }
    if let Some(pos) = payload.iter().position(|&b| b > 9) {
        return Err(DataError::Parse {
            path: path.to_string(),
            offset: payload_offset + pos,
            message: format!("label {} outside 0..=9", payload[pos]),
        });
    }
    Ok(payload.to_vec())
}

/// Serialize images back to IDX bytes. Pixel values must be the k/255
/// grid the parser produces; round-tripping a parsed file is bit-exact.
pub fn write_idx_images(images: &Matrix, rows: usize, cols: usize) -> Vec<u8> {
    assert_eq!(images.cols(), rows * cols, "image shape mismatch");
    let mut out = Vec::with_capacity(16 + images.data().len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.rows() as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend(images.data().iter().map(|&v| (v * 255.0).round() as u8));
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Load the MNIST image/label file pair. The split is inferred from the
/// image file name (`t10k`/`test` → test split).
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset, DataError> {
    let images_name = images_path.display().to_string();
    let labels_name = labels_path.display().to_string();
    let (images, _, _) = parse_idx_images(&fs::read(images_path)?, &images_name)?;
    let labels = parse_idx_labels(&fs::read(labels_path)?, &labels_name)?;
    if labels.len() != images.rows() {
        return Err(DataError::Parse {
            path: labels_name,
            offset: 4,
            message: format!("{} labels for {} images", labels.len(), images.rows()),
        });
    }
    let file_name = images_path
        .file_name()
        .map(|f| f.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    let source = if file_name.contains("t10k") || file_name.contains("test") {
        DataSource::MnistTest
    } else {
        DataSource::MnistTrain
    };
    Ok(Dataset { images, labels: Some(labels), source, intrinsic_dim: None })
}

// Stream-id bases for the synthetic generator's independent draws.
const SYN_MIX_A: u64 = 0x0600_0000_0000;
const SYN_MIX_B: u64 = 0x0600_0000_0001;
const SYN_OFFSET: u64 = 0x0600_0000_0002;
const SYN_LATENT: u64 = 0x0700_0000_0000;

/// Pre-sigmoid features of the synthetic manifold: rows
/// `y = A sin(pi t) + B t + c` for `t ~ Uniform(-1,1)^k`, with seeded mixing
/// matrices `A, B` (entries N(0,1)/sqrt(k)) and offset `c` (0.5 N(0,1)).
/// The image of the map spans at most 2k+1 affine dimensions.
fn synthetic_features(n: usize, d_x: usize, k: usize, seed: u64) -> Matrix {
    let mut a_stream = RngStream::with_stream(seed, SYN_MIX_A);
    let mut b_stream = RngStream::with_stream(seed, SYN_MIX_B);
    let scale = 1.0 / (k as f64).sqrt();
    let mix_a = Matrix::from_fn(d_x, k, |_, _| scale * a_stream.next_normal());
    let mix_b = Matrix::from_fn(d_x, k, |_, _| scale * b_stream.next_normal());
    let mut c_stream = RngStream::with_stream(seed, SYN_OFFSET);
    let offset: Vec<f64> = (0..d_x).map(|_| 0.5 * c_stream.next_normal()).collect();

    let latent = Matrix::from_fn(n, k, |i, j| {
        let row = RngStream::with_stream(seed, SYN_LATENT + i as u64);
        2.0 * row.u01_at(j as u64) - 1.0
    });
    let sin_latent = latent.map(|t| (std::f64::consts::PI * t).sin());

    let mut features = sin_latent.matmul_nt(&mix_a);
    let linear = latent.matmul_nt(&mix_b);
    for (f, l) in features.data_mut().iter_mut().zip(linear.data()) {
        *f += l;
    }
    for i in 0..n {
        for (f, c) in features.row_mut(i).iter_mut().zip(&offset) {
            *f += c;
        }
    }
    features
}

/// Deterministic nonlinear manifold of intrinsic dimension `k` embedded in
/// `R^{d_x}`, squashed into (0,1) by the logistic function.
pub fn synthetic_manifold(
    n: usize,
    d_x: usize,
    k: usize,
    seed: u64,
) -> Result<Dataset, DataError> {
    if k == 0 || k >= d_x {
        return Err(DataError::IntrinsicDim { k, d_x });
    }
    let images = synthetic_features(n, d_x, k, seed).map(|y| 1.0 / (1.0 + (-y).exp()));
    Ok(Dataset {
        images,
        labels: None,
        source: DataSource::Synthetic,
        intrinsic_dim: Some(k),
    })
}
