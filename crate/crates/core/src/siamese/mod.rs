//! Siamese 1-D CNN: a shared convolutional embedding `f` and a relational
//! head `g(a, b) = sigmoid(w · |f(a) - f(b)| + bias)`.
//!
//! Each embedding block is convolution ("same" padding) → ReLU →
//! batch-norm → dropout → max-pool; the last block's output is flattened.

mod checkpoint;
mod config;
mod model;
mod train;

pub use checkpoint::{
    decode as decode_checkpoint, encode as encode_checkpoint, load_checkpoint, save_checkpoint,
    Manifest, TensorEntry, CHECKPOINT_VERSION, MANIFEST_FILE, PAYLOAD_FILE,
};
pub use config::{BlockConfig, EmbeddingConfig, DEFAULT_BLOCKS, DEFAULT_DROPOUT};
pub use model::{BlockParams, ModelParams, PairForward, SiameseNetwork};
pub use train::{
    evaluate_pairs, pretrain, pretrain_with, EarlyStopping, EpochRecord, StopReason, TrainConfig,
    TrainReport,
};
