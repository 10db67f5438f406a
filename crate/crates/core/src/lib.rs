//! Few-shot time-series classification with a Siamese 1-D CNN.
//!
//! The pipeline: parse and prepare datasets ([`data`]), build balanced
//! same/different pairs ([`pairs`]), pretrain the network ([`siamese`]),
//! and evaluate it on N-way K-shot episodes ([`episodic`]) next to 1-NN
//! Euclidean and DTW baselines ([`baselines`]).

pub mod baselines;
pub mod cli;
pub mod data;
pub mod episodic;
pub mod error;
pub mod nn;
pub mod pairs;
pub mod report;
pub mod seed;
pub mod siamese;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
