//! Downstream heads operating on embeddings or raw features, plus metrics.

mod knn;
mod metrics;
mod pca;
mod scaler;
mod svc;

pub use knn::{knn_predict, DEFAULT_K};
pub use metrics::{accuracy, confusion, mcc, ConfusionCounts};
pub use pca::{jacobi_eigen, pca_fit, pca_transform, PcaModel};
pub use scaler::RmsScaler;
pub use svc::{
    svc_decision, svc_predict, train_linear_svc, train_linear_svc_with_budget, LinearSvcModel,
    SVC_ITERATIONS,
};
