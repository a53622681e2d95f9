//! Signal-to-embedding regression for chemiresistive sensor arrays.
//!
//! A fully-connected embedder is trained on single-analyte exposures to
//! regress onto analyte representation vectors, with linear-combination
//! augmentation standing in for mixtures. Simple classifiers in the learned
//! space then detect a target analyte inside double-analyte exposures that
//! never appeared in training.
//!
//! Modules follow the pipeline order:
//!
//! - [`signals`]: synthetic exposure simulator, z-scoring, windowing, dataset IO
//! - [`targets`]: semantic, one-hot and regular-simplex target spaces
//! - [`augment`]: linear-combination (mixup-style) augmentation
//! - [`embedder`]: from-scratch MLP, training loop and the FFNN baseline
//! - [`classify`]: linear SVC, KNN, 2-D PCA, confusion counts and MCC
//! - [`harness`]: K-fold search, the two reproduction protocols and reports

pub mod augment;
pub mod classify;
pub mod embedder;
pub mod error;
pub mod harness;
mod linalg;
pub mod seed;
pub mod signals;
pub mod targets;

pub use error::{Error, Result};
