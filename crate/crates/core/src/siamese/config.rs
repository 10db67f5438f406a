use serde::{Deserialize, Serialize};

use crate::data::DEFAULT_L_MAX;
use crate::error::{Error, Result};

/// One convolutional block: `filters` kernels of length `kernel`, followed by
/// a max-pool of width `pool`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub filters: usize,
    pub kernel: usize,
    pub pool: usize,
}

impl BlockConfig {
    pub const fn new(filters: usize, kernel: usize, pool: usize) -> Self {
        Self { filters, kernel, pool }
    }
}

pub const DEFAULT_BLOCKS: [BlockConfig; 3] = [
    BlockConfig::new(128, 7, 3),
    BlockConfig::new(64, 5, 3),
    BlockConfig::new(64, 5, 2),
];

pub const DEFAULT_DROPOUT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub blocks: Vec<BlockConfig>,
    pub dropout_rate: f64,
    pub input_length: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            blocks: DEFAULT_BLOCKS.to_vec(),
            dropout_rate: DEFAULT_DROPOUT,
            input_length: DEFAULT_L_MAX,
        }
    }
}

impl EmbeddingConfig {
    pub fn with_input_length(mut self, input_length: usize) -> Self {
        self.input_length = input_length;
        self
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout_rate = rate;
        self
    }

    /// Time extent entering each block, followed by the final extent.
    pub fn time_extents(&self) -> Vec<usize> {
        let mut t = self.input_length;
        let mut out = vec![t];
        for b in &self.blocks {
            t /= b.pool.max(1);
            out.push(t);
        }
        out
    }

    pub fn final_channels(&self) -> usize {
        self.blocks.last().map_or(1, |b| b.filters)
    }

    pub fn embedding_dim(&self) -> usize {
        self.final_channels() * self.time_extents().last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidArgument("embedding needs at least one block".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidArgument(format!(
                "dropout rate must lie in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        let mut t = self.input_length;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.filters == 0 || b.kernel == 0 || b.pool == 0 {
                return Err(Error::InvalidArgument(format!("block {i}: extents must be positive")));
            }
            if b.kernel > t || b.pool > t {
                return Err(Error::InvalidArgument(format!(
                    "block {i}: kernel {} / pool {} do not fit time extent {t}",
                    b.kernel, b.pool
                )));
            }
            t /= b.pool;
        }
        Ok(())
    }
}
