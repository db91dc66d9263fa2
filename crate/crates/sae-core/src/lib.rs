//! Geometry, transport, and training tools for latent variables on
//! high-dimensional spheres.
//!
//! The crate groups six concerns:
//!
//! - [`geometry`]: closed-form chord-length law of the sphere (density,
//!   moments, large-d asymptotics) and ball-volume concentration.
//! - [`sampling`]: seeded draws from four priors, centerization/spherization
//!   transforms, Monte-Carlo chord statistics, and the central-limit
//!   diagnostic.
//! - [`transport`]: exact 2-Wasserstein distance between equal-size point
//!   clouds via the linear assignment problem, plus the dimension-sweep
//!   convergence experiment.
//! - [`nn`]: dense MLP autoencoders (plain, spherical, variational) with
//!   manual reverse-mode gradients, Adam, gradient checking, checkpoints,
//!   and a deterministic training loop.
//! - [`data`]: MNIST IDX ingestion and a seeded synthetic manifold with
//!   known intrinsic dimension.
//! - [`metrics`]: reconstruction MSE and sliced Wasserstein distance.
//!
//! All randomness flows through [`rng::RngStream`], a counter-based
//! generator: results are pure functions of `(seed, stream, index)`.

pub mod data;
pub mod geometry;
pub mod matrix;
pub mod metrics;
pub mod nn;
pub mod quad;
pub mod rng;
pub mod sampling;
pub mod transport;

pub use geometry::{ChordStats, SphereSpec};
pub use matrix::Matrix;
pub use rng::RngStream;
pub use sampling::{PointCloud, Prior};
