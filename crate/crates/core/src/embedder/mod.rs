//! Fully-connected embedder trained from scratch.
//!
//! The same network class backs two models: the embedder, which regresses
//! windowed sensor features onto target-space vectors with a mean-squared
//! error, and the FFNN baseline, a one-output logistic classifier.

mod io;
mod mlp;
mod train;

pub use io::{load_mlp, save_mlp};
pub(crate) use io::{mlp_from_text, mlp_to_text};
pub use mlp::{embed, forward, init_mlp, loss_and_grad, Activation, Gradients, Loss, MlpModel};
pub use train::{
    train_embedder, train_ffnn_baseline, ffnn_predict, Optimizer, TrainConfig, TrainHistory,
};
