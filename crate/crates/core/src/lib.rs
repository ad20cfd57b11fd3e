//! Binary spike-and-slab lasso biclustering.
//!
//! Sparse logistic matrix factorization `Y ~ Bernoulli(sigmoid(mu 1^T + A B^T))` fitted by
//! proximal coordinate ascent. Biclusters are the supports of the rank-one terms `a_k b_k^T`
//! of the exactly sparse posterior mode.

pub mod bench;
pub mod cli;
pub mod error;
pub mod init;
pub mod io;
pub mod metrics;
pub mod model;
pub mod optimizer;
pub mod penalty;
pub mod simgen;

pub use error::{Error, Result};
pub use model::{BinaryMatrix, FactorPair, Hyperparams, SolverState};
pub use optimizer::{fit, fit_ladder, FitResult};
