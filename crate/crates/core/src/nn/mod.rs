//! Minimal differentiable building blocks for the Siamese network.
//!
//! Every layer is a pair of free functions: a forward pass that returns
//! whatever the backward pass needs, and a backward pass that consumes it.
//! There is no dynamic graph; the model wires the calls by hand.

mod activation;
mod adam;
mod batchnorm;
mod conv;
mod dropout;
mod loss;
mod pool;
mod tensor;

pub use activation::{
    abs_diff, abs_diff_backward, dense, dense_backward, relu, relu_backward, sigmoid,
    sigmoid_backward, sigmoid_scalar,
};
pub use adam::{AdamState, DEFAULT_LEARNING_RATE};
pub use batchnorm::{
    batchnorm1d, batchnorm1d_backward, batchnorm1d_infer, batchnorm1d_train, BatchNormCache,
    Mode, RunningStats, DEFAULT_EPSILON, DEFAULT_MOMENTUM,
};
pub use conv::{conv1d_backward, conv1d_forward, Conv1dGrads};
pub use dropout::{dropout_backward, dropout_forward};
pub use loss::{bce_loss, BCE_EPSILON};
pub use pool::{maxpool1d_backward, maxpool1d_forward, MaxPoolOutput};
pub use tensor::{Real, Tensor};
