//! Analytic continual graph learning.
//!
//! A two-layer GCN is trained by backpropagation on the base classes only and
//! then frozen. Its embeddings pass through a fixed random expansion, and a
//! ridge-regression classifier is fit in closed form. Each later session of
//! new classes updates that classifier with an exact recursive least-squares
//! step, so the final classifier equals the one obtained by retraining on all
//! sessions jointly, while only a `d × d` autocorrelation matrix is kept.

pub mod analytic;
pub mod backbone;
pub mod container;
pub mod error;
pub mod expander;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod registry;

pub use error::{Error, Result};
pub use linalg::Matrix;
